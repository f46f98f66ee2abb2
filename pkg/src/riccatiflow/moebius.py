"""Projective linear algebra on the Riemann sphere and on CP^(n-1).

Points are homogeneous coordinate vectors and maps are invertible complex
matrices, both taken modulo scaling.  Every constructor divides by the
largest-magnitude entry, so long products never overflow while the
projective class is untouched.

Affine convention on the sphere: the point ``z`` is ``(z, 1)`` and infinity
is ``(1, 0)``.  A matrix ``[[a, b], [c, d]]`` therefore acts as
``z -> (a z + b) / (c z + d)``.

Distances use the Fubini-Study arc metric normalized so that antipodal
points (for instance 0 and infinity) are at distance pi/2.  Through the Hopf
map this is half the round angle on the unit sphere in R^3, which is how the
disc computations below are done.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

POINT_TOL = 1e-12
CLASSIFY_TOL = 1e-9
DISC_TOL = 1e-14
INFINITY = complex(math.inf, 0.0)


class GeometryError(ValueError):
    """Raised for degenerate projective input (zero vectors, singular maps, ...)."""


def _is_infinite(z) -> bool:
    return bool(np.isinf(np.abs(complex(z))))


def _normalized(a: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise GeometryError("non-finite entries (ill-conditioned input)")
    k = int(np.argmax(np.abs(a)))
    s = a.flat[k]
    if s == 0:
        raise GeometryError("zero vector has no projective class")
    out = a / s
    out.flags.writeable = False
    return out


class ProjectivePoint:
    """A point of CP^(n-1) stored as a max-normalized homogeneous vector."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        v = np.array(coords, dtype=complex).ravel()
        if v.size < 2:
            raise GeometryError("homogeneous coordinates need at least two entries")
        self.coords = _normalized(v)

    @classmethod
    def from_affine(cls, z) -> "ProjectivePoint":
        if _is_infinite(z):
            return cls((1.0, 0.0))
        return cls((complex(z), 1.0))

    @property
    def n(self) -> int:
        return self.coords.size

    def affine(self) -> complex:
        """Affine chart value ``w0 / w1`` (infinity when ``w1 == 0``)."""
        w0, w1 = self.coords[0], self.coords[-1]
        if self.n != 2:
            raise GeometryError("affine chart only defined for the sphere")
        if w1 == 0:
            return INFINITY
        return complex(w0 / w1)

    def __eq__(self, other):
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        return self.n == other.n and fubini_study_distance(self, other) <= POINT_TOL

    __hash__ = None

    def __repr__(self):
        if self.n == 2:
            return f"ProjectivePoint({self.affine()!r})"
        return f"ProjectivePoint({self.coords!r})"


# The sphere is CP^1, and fibers of the higher-rank bundles are CP^(n-1).
SpherePoint = ProjectivePoint


def as_point(p) -> ProjectivePoint:
    """Accept a ProjectivePoint or an affine number (``inf`` allowed)."""
    if isinstance(p, ProjectivePoint):
        return p
    return ProjectivePoint.from_affine(p)


class Kind(enum.Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


class ProjectiveMap:
    """An invertible complex matrix modulo nonzero scalars."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise GeometryError(f"expected a square matrix of size >= 2, got {m.shape}")
        m = _normalized(m)
        det = np.linalg.det(m)
        if det == 0 or not np.isfinite(det):
            raise GeometryError("singular matrix")
        self.matrix = m

    @classmethod
    def _product(cls, m: np.ndarray) -> "ProjectiveMap":
        # A product of invertible maps is invertible even when a long
        # hyperbolic word has underflowed to numerical rank one, so only the
        # normalization is applied.
        out = cls.__new__(cls)
        out.matrix = _normalized(np.asarray(m, dtype=complex))
        return out

    @classmethod
    def identity(cls, n: int = 2) -> "ProjectiveMap":
        return cls(np.eye(n))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, p):
        return apply(self, as_point(p))

    def __matmul__(self, other: "ProjectiveMap") -> "ProjectiveMap":
        return compose(self, other)

    def inverse(self) -> "ProjectiveMap":
        return inverse(self)

    def sl2(self) -> np.ndarray:
        """Determinant-one representative (n = 2 only, sign ambiguous)."""
        m = self.matrix
        return m / np.sqrt(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    def is_close(self, other: "ProjectiveMap", tol: float = CLASSIFY_TOL) -> bool:
        a, b = self.matrix, other.matrix
        if a.shape != b.shape:
            return False
        s = np.vdot(a, b) / np.vdot(a, a)
        return np.linalg.norm(b - s * a) <= tol * np.linalg.norm(b)

    def __eq__(self, other):
        if not isinstance(other, ProjectiveMap):
            return NotImplemented
        return self.is_close(other)

    __hash__ = None

    def __repr__(self):
        return f"ProjectiveMap({self.matrix.tolist()!r})"


def apply(m: ProjectiveMap, p: ProjectivePoint) -> ProjectivePoint:
    return ProjectivePoint(m.matrix @ p.coords)


def compose(m1: ProjectiveMap, m2: ProjectiveMap) -> ProjectiveMap:
    """``m1 o m2``: apply ``m2`` first."""
    return ProjectiveMap._product(m1.matrix @ m2.matrix)


def inverse(m: ProjectiveMap) -> ProjectiveMap:
    a = m.matrix
    if m.n == 2:
        # the adjugate is the inverse up to scale
        return ProjectiveMap([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]])
    return ProjectiveMap(np.linalg.inv(a))


def _sl2_data(m: ProjectiveMap):
    if m.n != 2:
        raise GeometryError("only defined for 2x2 maps")
    s = m.sl2()
    tr = s[0, 0] + s[1, 1]
    root = np.sqrt(tr * tr - 4)
    mu1, mu2 = (tr + root) / 2, (tr - root) / 2
    if abs(mu2) > abs(mu1):
        mu1, mu2 = mu2, mu1
    return s, tr, mu1, mu2


def classify(m: ProjectiveMap, tol: float = CLASSIFY_TOL) -> Kind:
    """Elliptic / parabolic / hyperbolic (loxodromic included) / identity."""
    s, tr, mu1, mu2 = _sl2_data(m)
    if abs(s[0, 1]) <= tol and abs(s[1, 0]) <= tol and abs(s[0, 0] - s[1, 1]) <= tol:
        return Kind.IDENTITY
    if abs(tr * tr - 4) <= tol * max(1.0, abs(tr) ** 2):
        return Kind.PARABOLIC
    if abs(abs(mu1) - 1) <= tol:
        return Kind.ELLIPTIC
    return Kind.HYPERBOLIC


def _eigenvector(s: np.ndarray, mu: complex) -> ProjectivePoint:
    c1 = np.array([s[0, 1], mu - s[0, 0]])
    c2 = np.array([mu - s[1, 1], s[1, 0]])
    v = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
    return ProjectivePoint(v)


def fixed_points(m: ProjectiveMap) -> list:
    """Fixed points of a 2x2 map.

    Parabolic maps give one point.  Otherwise two points are returned ordered
    by decreasing eigenvalue modulus, so for a hyperbolic map the attracting
    fixed point comes first.
    """
    kind = classify(m)
    if kind is Kind.IDENTITY:
        raise GeometryError("no isolated fixed points")
    s, tr, mu1, mu2 = _sl2_data(m)
    if kind is Kind.PARABOLIC:
        return [_eigenvector(s, tr / 2)]
    return [_eigenvector(s, mu1), _eigenvector(s, mu2)]


def fubini_study_distance(p, q) -> float:
    """Arc distance in [0, pi/2]; 0 and infinity are at distance pi/2."""
    a, b = as_point(p).coords, as_point(q).coords
    if a.size == 2:
        wedge = abs(a[0] * b[1] - a[1] * b[0])
    else:
        outer = np.outer(a, b)
        wedge = math.sqrt(max(0.0, float(np.sum(np.abs(outer - outer.T) ** 2)) / 2))
    return math.atan2(wedge, abs(np.vdot(a, b)))


def _det2(u, v) -> complex:
    return u[0] * v[1] - u[1] * v[0]


def map_from_three_points(a, b, c) -> ProjectiveMap:
    """The unique map sending a -> 0, b -> 1, c -> infinity."""
    a, b, c = as_point(a), as_point(b), as_point(c)
    for x, y in ((a, b), (b, c), (a, c)):
        if fubini_study_distance(x, y) <= POINT_TOL:
            raise GeometryError("coincident points")
    A, B, C = a.coords, b.coords, c.coords
    k1 = _det2(B, C)
    k2 = _det2(B, A)
    return ProjectiveMap([[A[1] * k1, -A[0] * k1], [C[1] * k2, -C[0] * k2]])


def cross_ratio(a, b, c, d) -> complex:
    """Image of ``d`` under the map a -> 0, b -> 1, c -> infinity.

    With this convention ``cross_ratio(0, 1, inf, z) == z``.
    """
    return apply(map_from_three_points(a, b, c), as_point(d)).affine()


def mobius_real(m: np.ndarray, z: complex) -> complex:
    """Fast affine action of a 2x2 array on a finite complex number."""
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


# -- round-sphere helpers ---------------------------------------------------

def hopf(p) -> np.ndarray:
    """Unit vector in R^3 of a sphere point; infinity maps to the north pole."""
    w = as_point(p).coords
    w = w / np.linalg.norm(w)
    x = w[0] * np.conj(w[1])
    return np.array([2 * x.real, 2 * x.imag, abs(w[0]) ** 2 - abs(w[1]) ** 2])


def from_hopf(x: np.ndarray) -> ProjectivePoint:
    x = np.asarray(x, dtype=float)
    x = x / np.linalg.norm(x)
    if x[2] >= 0:
        w0 = math.sqrt((1 + x[2]) / 2)
        return ProjectivePoint((w0, (x[0] - 1j * x[1]) / (2 * w0)))
    w1 = math.sqrt((1 - x[2]) / 2)
    return ProjectivePoint(((x[0] + 1j * x[1]) / (2 * w1), w1))


def _angle(u: np.ndarray, v: np.ndarray) -> float:
    return math.atan2(float(np.linalg.norm(np.cross(u, v))), float(np.dot(u, v)))


@dataclass(frozen=True)
class Disc:
    """Closed round disc on the sphere: three boundary points and a witness.

    The witness picks which of the two sides of the boundary circle is meant,
    so a disc containing infinity needs no special case.
    """

    boundary: tuple
    witness: ProjectivePoint

    def __post_init__(self):
        pts = tuple(as_point(p) for p in self.boundary)
        if len(pts) != 3:
            raise GeometryError("a disc needs exactly three boundary points")
        object.__setattr__(self, "boundary", pts)
        object.__setattr__(self, "witness", as_point(self.witness))
        for i in range(3):
            for j in range(i + 1, 3):
                if fubini_study_distance(pts[i], pts[j]) <= DISC_TOL:
                    raise GeometryError("disc degenerate: boundary points collapse")
        center, radius = self.cap
        if abs(_angle(hopf(self.witness), center) - radius) <= DISC_TOL:
            raise GeometryError("witness lies on the boundary circle")

    @cached_property
    def cap(self):
        """(unit center in R^3, angular radius on the unit sphere)."""
        p1, p2, p3 = (hopf(p) for p in self.boundary)
        a, b = p2 - p1, p3 - p1
        axb = np.cross(a, b)
        nn = float(np.dot(axb, axb))
        if nn == 0:
            raise GeometryError("disc degenerate: collinear boundary images")
        o = p1 + np.cross(np.dot(a, a) * b - np.dot(b, b) * a, axb) / (2 * nn)
        no = np.linalg.norm(o)
        if no > 0.5:
            c = o / no
        else:
            c = axb / math.sqrt(nn)
        r = _angle(c, p1)
        if _angle(hopf(self.witness), c) > r:
            c, r = -c, math.pi - r
        return c, r

    def complement(self) -> "Disc":
        center, _ = self.cap
        return Disc(self.boundary, from_hopf(-center))

    def contains(self, p, margin: float = 0.0) -> bool:
        center, r = self.cap
        return _angle(hopf(p), center) <= r - 2 * margin

    @classmethod
    def ball(cls, center, radius: float) -> "Disc":
        """Fubini-Study ball of the given radius (0 < radius < pi/2)."""
        if not 0 < radius < math.pi / 2:
            raise GeometryError("ball radius must lie in (0, pi/2)")
        c = as_point(center)
        w = c.coords / np.linalg.norm(c.coords)
        # unitary map sending 0 to the center
        u = ProjectiveMap([[np.conj(w[1]), w[0]], [-np.conj(w[0]), w[1]]])
        r = math.tan(radius)
        pts = [apply(u, ProjectivePoint.from_affine(r * s)) for s in (1, 1j, -1)]
        return cls(tuple(pts), c)


def disc_image(m: ProjectiveMap, d: Disc) -> Disc:
    return Disc(tuple(apply(m, p) for p in d.boundary), apply(m, d.witness))


def disc_diameter(d: Disc) -> float:
    """Exact Fubini-Study diameter of the disc.

    A cap of angular radius r has round diameter 2r, that is r in the
    Fubini-Study normalization, capped at pi/2 once it reaches a hemisphere.
    """
    return min(d.cap[1], math.pi / 2)


def nesting_margin(inner: Disc, outer: Disc) -> float:
    """Fubini-Study slack of ``inner`` inside ``outer`` (positive means nested)."""
    ci, ri = inner.cap
    co, ro = outer.cap
    return (ro - ri - _angle(ci, co)) / 2


def separation(d1: Disc, d2: Disc) -> float:
    """Fubini-Study gap between two discs (positive means disjoint)."""
    c1, r1 = d1.cap
    c2, r2 = d2.cap
    return (_angle(c1, c2) - r1 - r2) / 2


def random_map(rng: np.random.Generator, n: int = 2) -> ProjectiveMap:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return ProjectiveMap(z)


def random_point(rng: np.random.Generator, n: int = 2) -> ProjectivePoint:
    """Sample from the unitarily invariant measure on CP^(n-1)."""
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    return ProjectivePoint(z)
