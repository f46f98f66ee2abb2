"""Geodesic flow on finite-area hyperbolic surfaces given by a Fuchsian group.

A unit tangent vector of the upper half-plane is an element ``g`` of
PSL(2, R): its base point is ``g(i)`` and its direction is the image of the
upward vertical vector at ``i``.  The geodesic flow is right multiplication by
``diag(e^{t/2}, e^{-t/2})``, so ``g(inf)`` is the forward ideal endpoint and
``g(0)`` the backward one.

Surfaces are described by a convex fundamental polygon whose sides are
complete geodesics, each tagged with a signed generator letter.  When the
flow leaves the polygon through a side tagged ``l`` the deck transformation
``G_l`` (``G_{-j}`` is the inverse of ``G_j``) is applied, which carries that
side onto its partner, and ``l`` is appended to the word.  The deck word
``(l_1, ..., l_k)`` of a flow segment therefore satisfies::

    flowed_lift = G_{l_k} ... G_{l_1} . geodesic_flow_h(v, t)

Side crossings are solved in closed form instead of by bisection: pulling a
side back by ``g`` turns the flow line into the imaginary axis ``i e^s`` and
a geodesic with real endpoints ``a < 0 < b`` meets it at ``s = log(-a b) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import config
from .moebius import GeometryError

TIME_EPS = 1e-12
PROBE = 1e-7
HALF_PI = math.pi / 2


class VertexHit(GeometryError):
    """The flow passed through a polygon vertex; perturb the seed."""


class CuspCapture(RuntimeError):
    """The geodesic climbed a cusp beyond the configured limits."""

    def __init__(self, message, word=()):
        super().__init__(message)
        self.word = Word.reduce(word)


# -- words ------------------------------------------------------------------

@dataclass(frozen=True)
class Word:
    """A freely reduced word over signed generator indices."""

    letters: tuple = ()

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if any(x == 0 for x in letters):
            raise ValueError("letter 0 is not a generator")
        for x, y in zip(letters, letters[1:]):
            if x == -y:
                raise ValueError(f"word is not reduced: {letters}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def reduce(cls, letters) -> "Word":
        stack = []
        for x in letters:
            if stack and stack[-1] == -x:
                stack.pop()
            else:
                stack.append(int(x))
        return cls(tuple(stack))

    def inverse(self) -> "Word":
        return Word(tuple(-x for x in reversed(self.letters)))

    def __add__(self, other: "Word") -> "Word":
        return Word.reduce(self.letters + tuple(other.letters))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]


# -- unit tangent vectors ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class UnitTangent:
    """Element of PSL(2, R) read as a unit tangent vector of the half-plane."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float).reshape(2, 2)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if not det > 0:
            raise GeometryError("unit tangent needs a real matrix of positive determinant")
        m = m / math.sqrt(det)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "UnitTangent":
        return cls(np.eye(2))

    @classmethod
    def from_point(cls, z: complex, angle: float) -> "UnitTangent":
        """Vector at ``z`` whose Euclidean direction makes ``angle`` with +x."""
        x, y = z.real, z.imag
        if not y > 0:
            raise GeometryError("base point must lie in the upper half-plane")
        r = math.sqrt(y)
        th = (angle - HALF_PI) / 2
        c, s = math.cos(th), math.sin(th)
        a = np.array([[r, x / r], [0.0, 1 / r]])
        return cls(a @ np.array([[c, s], [-s, c]]))

    @property
    def base_point(self) -> complex:
        (a, b), (c, d) = self.matrix
        return (a * 1j + b) / (c * 1j + d)

    @property
    def direction_angle(self) -> float:
        (a, b), (c, d) = self.matrix
        return (HALF_PI - 2 * math.atan2(c, d)) % (2 * math.pi)

    def reversed(self) -> "UnitTangent":
        return UnitTangent(self.matrix @ np.array([[0.0, -1.0], [1.0, 0.0]]))

    def isclose(self, other: "UnitTangent", tol: float = 1e-9) -> bool:
        a, b = self.matrix, other.matrix
        return min(np.abs(a - b).max(), np.abs(a + b).max()) <= tol * max(1.0, np.abs(a).max())

    def __repr__(self):
        return f"UnitTangent(base={self.base_point:.6g}, angle={self.direction_angle:.6g})"


def geodesic_flow_h(v: UnitTangent, t: float) -> UnitTangent:
    e = math.exp(t / 2)
    return UnitTangent(v.matrix * np.array([e, 1 / e]))


# -- surface groups ---------------------------------------------------------

@dataclass(frozen=True)
class Side:
    """A complete geodesic side with ideal endpoints p, q (``inf`` allowed)."""

    p: float
    q: float
    letter: int


@dataclass(frozen=True)
class Cusp:
    point: float
    word: tuple


def _real_mobius(m, x: float) -> float:
    (a, b), (c, d) = m
    if math.isinf(x):
        return math.inf if c == 0 else a / c
    den = c * x + d
    if den == 0:
        return math.inf
    return (a * x + b) / den


def _same_ideal(x: float, y: float, tol: float) -> bool:
    if math.isinf(x) or math.isinf(y):
        if math.isinf(x) and math.isinf(y):
            return True
        f = y if math.isinf(x) else x
        return abs(f) > 1 / tol
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def _sl2r(m) -> np.ndarray:
    m = np.asarray(m)
    if np.iscomplexobj(m):
        if np.abs(m.imag).max() > 1e-12 * max(1.0, np.abs(m.real).max()):
            raise GeometryError("generator is not real")
        m = m.real
    m = np.array(m, dtype=float)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if not det > 0:
        raise GeometryError("generator must have positive determinant")
    return m / math.sqrt(det)


class SurfaceGroup:
    """Fuchsian group with a convex fundamental polygon and side pairings."""

    def __init__(self, generators, sides, cusps=(), base_point=1j, name="surface",
                 tol: float = 1e-9):
        self.name = name
        self.generators = tuple(_sl2r(g) for g in generators)
        self.sides = tuple(Side(float(s.p), float(s.q), int(s.letter)) for s in sides)
        self.cusps = tuple(Cusp(float(c.point), tuple(c.word)) for c in cusps)
        self.base_point = complex(base_point)
        self.tol = tol
        self._deck = {}
        for j, g in enumerate(self.generators, 1):
            self._deck[j] = g
            self._deck[-j] = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]])
        self._geometry = [self._side_geometry(s) for s in self.sides]
        self._orient = []
        for k in range(len(self.sides)):
            f = self._side_function(k, self.base_point)
            if abs(f) <= tol:
                raise GeometryError("base point lies on a polygon side")
            self._orient.append(1.0 if f > 0 else -1.0)
        self.partner = tuple(self._find_partner(k) for k in range(len(self.sides)))
        self._validate()
        self._deck_flat = {k: tuple(float(x) for x in m.ravel()) for k, m in self._deck.items()}
        self._charts = tuple(self._cusp_chart(c) for c in self.cusps)

    # construction helpers
    @staticmethod
    def _side_geometry(s: Side):
        if math.isinf(s.p) and math.isinf(s.q):
            raise GeometryError("side with both endpoints at infinity")
        if math.isinf(s.p) or math.isinf(s.q):
            return ("line", s.q if math.isinf(s.p) else s.p, 0.0)
        if s.p == s.q:
            raise GeometryError("side with coincident endpoints")
        return ("circle", (s.p + s.q) / 2, ((s.p - s.q) / 2) ** 2)

    def _side_function(self, k: int, z: complex) -> float:
        kind, c, r2 = self._geometry[k]
        if kind == "line":
            return z.real - c
        return (z.real - c) ** 2 + z.imag ** 2 - r2

    def _find_partner(self, k: int) -> int:
        letter = self.sides[k].letter
        if abs(letter) < 1 or abs(letter) > len(self.generators):
            raise GeometryError(f"side letter {letter} out of range")
        hits = [j for j, s in enumerate(self.sides) if s.letter == -letter]
        if len(hits) != 1:
            raise GeometryError(f"side letter {letter} has {len(hits)} partners")
        return hits[0]

    def _validate(self):
        for j, g in enumerate(self.generators, 1):
            if abs(g[0, 0] + g[1, 1]) < 2 - self.tol:
                raise GeometryError(f"generator {j} is elliptic")
        for k, s in enumerate(self.sides):
            m = self._deck[s.letter]
            t = self.sides[self.partner[k]]
            img = (_real_mobius(m, s.p), _real_mobius(m, s.q))
            ok = ((_same_ideal(img[0], t.p, self.tol) and _same_ideal(img[1], t.q, self.tol))
                  or (_same_ideal(img[0], t.q, self.tol) and _same_ideal(img[1], t.p, self.tol)))
            if not ok:
                raise GeometryError(f"generator {s.letter} does not carry side {k} onto its partner")
        for c in self.cusps:
            m = self.word_matrix(c.word)
            if abs(abs(m[0, 0] + m[1, 1]) - 2) > 1e-8:
                raise GeometryError(f"peripheral word {c.word} is not parabolic")
            if not _same_ideal(_real_mobius(m, c.point), c.point, 1e-8):
                raise GeometryError(f"peripheral word {c.word} does not fix {c.point}")

    def _cusp_chart(self, cusp: Cusp) -> np.ndarray:
        if math.isinf(cusp.point):
            t = np.eye(2)
        else:
            t = np.array([[0.0, -1.0], [1.0, -cusp.point]])
        p = self.word_matrix(cusp.word)
        q = t @ p @ np.linalg.inv(t)
        q = q / q[0, 0]
        tau = abs(q[0, 1])
        return np.diag([1 / math.sqrt(tau), math.sqrt(tau)]) @ t

    # queries
    @classmethod
    def from_file(cls, path) -> "SurfaceGroup":
        d = config.read_keyvalue(path)
        return cls.from_dict(d, str(path))

    @classmethod
    def from_dict(cls, d: dict, source: str = "<surface>") -> "SurfaceGroup":
        gens, sides, cusps = [], [], []
        for k in range(1, 100):
            key = f"generator.{k}"
            if key not in d:
                break
            gens.append(config.parse_matrix(d[key]))
        for k in range(1, 100):
            key = f"side.{k}"
            if key not in d:
                break
            parts = d[key].split()
            if len(parts) != 3:
                raise config.ConfigError(f"{source}: {key} needs 'p q letter'")
            sides.append(Side(config.parse_number(parts[0]), config.parse_number(parts[1]),
                              int(parts[2])))
        for k in range(1, 100):
            key = f"cusp.{k}"
            if key not in d:
                break
            point, _, word = d[key].partition(":")
            cusps.append(Cusp(config.parse_number(point), config.parse_letters(word)))
        if not gens or not sides:
            raise config.ConfigError(f"{source}: needs generator.N and side.N entries")
        base = config.parse_complex(d.get("base_point", "0 1"))
        return cls(gens, sides, cusps, base, d.get("name", Path(source).stem))

    def deck(self, letter: int) -> np.ndarray:
        return self._deck[letter]

    def word_matrix(self, word) -> np.ndarray:
        """Deck matrix ``G_{w_k} ... G_{w_1}`` (first letter acts first)."""
        m = np.eye(2)
        for x in word:
            m = self._deck[x] @ m
        return m

    def inside(self, z: complex, tol: float = 1e-9) -> bool:
        if not z.imag > 0:
            return False
        return all(o * self._side_function(k, z) >= -tol
                   for k, o in enumerate(self._orient))

    def cusp_chart(self, k: int) -> np.ndarray:
        """Real map sending cusp k to infinity with peripheral z -> z +/- 1."""
        return self._charts[k]

    def cusp_heights(self, z: complex) -> list:
        out = []
        for m in self._charts:
            (a, b), (c, d) = m
            out.append(z.imag / abs(c * z + d) ** 2)
        return out

    def ideal_vertices(self) -> list:
        """Cyclically ordered ideal vertices, or None if some vertex is finite."""
        ends = []
        for s in self.sides:
            for x in (s.p, s.q):
                if not any(_same_ideal(x, y, self.tol) for y in ends):
                    ends.append(x)
        if len(ends) != len(self.sides):
            return None
        for x in ends:
            n = sum(_same_ideal(x, s.p, self.tol) or _same_ideal(x, s.q, self.tol)
                    for s in self.sides)
            if n != 2:
                return None
        return sorted(ends)

    def __repr__(self):
        return f"SurfaceGroup({self.name!r}, {len(self.generators)} generators, {len(self.sides)} sides)"


# -- flow across the polygon ------------------------------------------------

def _pullback(a, b, c, d, x):
    # g^{-1}(x) for g = [[a, b], [c, d]] of determinant one
    if math.isinf(x):
        return math.inf if c == 0 else -d / c
    den = a - c * x
    if den == 0:
        return math.inf
    return (d * x - b) / den


def _crossing_time(a, b, c, d, side: Side):
    u = _pullback(a, b, c, d, side.p)
    w = _pullback(a, b, c, d, side.q)
    if math.isinf(u) or math.isinf(w):
        return None
    prod = u * w
    if not prod < 0:
        return None
    return 0.5 * math.log(-prod)


def _base(a, b, c, d, s=0.0):
    e = math.exp(s)
    return (a * 1j * e + b) / (c * 1j * e + d)


def _flow_core(G: SurfaceGroup, m, t: float, max_letters=None,
               max_crossings: int = 10 ** 6, cusp_height: float = 1e8):
    """Flow the matrix ``m`` for signed time ``t`` through the polygon.

    Returns the final matrix entries, the letters and the unsigned crossing
    times.  With ``max_letters`` the flow stops right after that many
    crossings regardless of ``t``.
    """
    (a, b), (c, d) = m
    sgn = 1.0 if t >= 0 else -1.0
    remaining = abs(t)
    entry = -1
    letters, times = [], []
    elapsed = 0.0
    sides = G.sides
    while True:
        best = second = math.inf
        best_k = -1
        for k, side in enumerate(sides):
            if k == entry:
                continue
            s = _crossing_time(a, b, c, d, side)
            if s is None:
                continue
            s *= sgn
            if s < -TIME_EPS:
                continue
            if s <= TIME_EPS:
                z = _base(a, b, c, d, sgn * PROBE)
                if G._orient[k] * G._side_function(k, z) > 0:
                    continue
                s = 0.0
            if s < best:
                second, best, best_k = best, s, k
            elif s < second:
                second = s
        if best_k < 0 and math.isinf(remaining):
            raise CuspCapture("cusp capture: geodesic ends in a cusp", letters)
        if best_k < 0 or best > remaining:
            e = math.exp(sgn * remaining / 2)
            a, b, c, d = a * e, b / e, c * e, d / e
            break
        if second - best < TIME_EPS:
            raise VertexHit("vertex hit, perturb seed")
        e = math.exp(sgn * best / 2)
        a, b, c, d = a * e, b / e, c * e, d / e
        letter = sides[best_k].letter
        p, q, r, s_ = G._deck_flat[letter]
        a, b, c, d = p * a + q * c, p * b + q * d, r * a + s_ * c, r * b + s_ * d
        det = math.sqrt(a * d - b * c)
        a, b, c, d = a / det, b / det, c / det, d / det
        letters.append(letter)
        elapsed += best
        times.append(elapsed)
        remaining -= best
        entry = G.partner[best_k]
        if len(letters) > max_crossings:
            raise CuspCapture("cusp capture: too many crossings", letters)
        z = _base(a, b, c, d)
        if z.imag > cusp_height or any(h > cusp_height for h in G.cusp_heights(z)):
            raise CuspCapture("cusp capture: geodesic climbed a cusp", letters)
        if max_letters is not None and len(letters) >= max_letters:
            break
    return np.array([[a, b], [c, d]]), letters, times


def _check_inside(G: SurfaceGroup, v: UnitTangent):
    if not G.inside(v.base_point, 1e-7):
        raise GeometryError(f"base point {v.base_point} is outside the fundamental polygon")


def flow_on_surface(v: UnitTangent, t: float, G: SurfaceGroup,
                    max_crossings: int = 10 ** 6, cusp_height: float = 1e8):
    """Flow ``v`` for time ``t`` (either sign) and return ``(v_t, deck word)``."""
    _check_inside(G, v)
    if t == 0:
        return v, Word()
    m, letters, _ = _flow_core(G, v.matrix, t, None, max_crossings, cusp_height)
    return UnitTangent(m), Word.reduce(letters)


def flow_with_times(v: UnitTangent, t: float, G: SurfaceGroup):
    """Like flow_on_surface but also returns the crossing times along the way."""
    _check_inside(G, v)
    m, letters, times = _flow_core(G, v.matrix, t)
    return UnitTangent(m), Word(tuple(letters)), times


def itinerary(v: UnitTangent, n_crossings: int, G: SurfaceGroup,
              max_crossings: int = 10 ** 6, cusp_height: float = 1e8) -> Word:
    """First ``n_crossings`` letters of the forward crossing sequence of ``v``."""
    _check_inside(G, v)
    if n_crossings <= 0:
        return Word()
    _, letters, _ = _flow_core(G, v.matrix, math.inf, n_crossings, max_crossings, cusp_height)
    return Word(tuple(letters))


# -- Liouville sampling -----------------------------------------------------

def _three_point_real(p, q, r) -> np.ndarray:
    # real map sending -1, 1, inf to p, q, r
    def col(x):
        return np.array([1.0, 0.0]) if math.isinf(x) else np.array([x, 1.0])

    P, Q, R = col(p), col(q), col(r)
    # K = [beta R | alpha P] sends inf, 0, 1 to r, p, q once beta R + alpha P = Q;
    # precomposing with z -> (z + 1) / 2 moves -1, 1, inf to 0, 1, inf
    coef = np.linalg.solve(np.column_stack([R, P]), Q)
    m = np.column_stack([coef[0] * R, coef[1] * P]) @ np.array([[1.0, 1.0], [0.0, 2.0]])
    det = np.linalg.det(m)
    if not det > 0:
        raise GeometryError("ideal triangle is negatively oriented")
    return m / math.sqrt(det)


def _rotation_batch(angle):
    th = (angle - HALF_PI) / 2
    c, s = np.cos(th), np.sin(th)
    return np.stack([np.stack([c, s], -1), np.stack([-s, c], -1)], -2)


class LiouvilleSampler:
    """Samples the normalized Liouville measure of the polygon.

    Ideal polygons are cut into a fan of ideal triangles of equal area pi; on
    the model triangle ``|x| < 1, |z| > 1`` the base point is drawn exactly
    (``x = sin u`` with ``u`` uniform, then ``y`` from the 1/y^2 tail).
    Polygons with finite vertices fall back to rejection from a bounding box.
    """

    def __init__(self, G: SurfaceGroup, min_acceptance: float = 1e-4):
        self.G = G
        self.min_acceptance = min_acceptance
        verts = G.ideal_vertices()
        if verts is not None:
            self.triangles = [
                _three_point_real(verts[0], verts[k], verts[k + 1])
                for k in range(1, len(verts) - 1)
            ]
            self.box = None
        else:
            self.triangles = None
            self.box = self._bounding_box()

    def _bounding_box(self):
        G = self.G
        pts = []
        for s in G.sides:
            if math.isinf(s.p) or math.isinf(s.q):
                x0 = s.q if math.isinf(s.p) else s.p
                ys = np.geomspace(1e-6, 1e6, 4001)
                zs = x0 + 1j * ys
            else:
                c, r = (s.p + s.q) / 2, abs(s.p - s.q) / 2
                th = np.linspace(0, math.pi, 4001)[1:-1]
                zs = c + r * np.exp(1j * th)
            pts.extend(z for z in zs if G.inside(z, 1e-9))
        if not pts:
            raise GeometryError("polygon has no boundary inside the half-plane")
        pts = np.array(pts)
        if pts.imag.max() > 1e5 or pts.imag.min() < 1e-5:
            raise GeometryError("polygon is unbounded but not ideal; cannot sample")
        pad = 1e-9
        return (pts.real.min() - pad, pts.real.max() + pad,
                pts.imag.min() * (1 - 1e-9), pts.imag.max() * (1 + 1e-9))

    def matrices(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.triangles is not None:
            u = rng.uniform(-HALF_PI, HALF_PI, size)
            x = np.sin(u)
            y = np.cos(u) / (1.0 - rng.random(size))
            tri = rng.integers(len(self.triangles), size=size)
            ang = rng.uniform(0, 2 * math.pi, size)
            r = np.sqrt(y)
            h = np.zeros((size, 2, 2))
            h[:, 0, 0] = r
            h[:, 0, 1] = x / r
            h[:, 1, 1] = 1 / r
            h = h @ _rotation_batch(ang)
            tris = np.array(self.triangles)[tri]
            return tris @ h
        return self._rejection(rng, size)

    def _rejection(self, rng, size):
        x0, x1, y0, y1 = self.box
        out = []
        tried = 0
        while len(out) < size:
            n = max(64, 2 * (size - len(out)))
            x = rng.uniform(x0, x1, n)
            y = 1.0 / (1 / y0 - rng.random(n) * (1 / y0 - 1 / y1))
            ang = rng.uniform(0, 2 * math.pi, n)
            tried += n
            for xi, yi, ai in zip(x, y, ang):
                if self.G.inside(complex(xi, yi), 0.0) and len(out) < size:
                    out.append(UnitTangent.from_point(complex(xi, yi), ai).matrix)
            if tried > 10_000 and len(out) / tried < self.min_acceptance:
                raise GeometryError("polygon/bounding-box mismatch: acceptance too low")
        return np.array(out)

    def sample(self, rng: np.random.Generator, size: int | None = None):
        if size is None:
            return UnitTangent(self.matrices(rng, 1)[0])
        return [UnitTangent(m) for m in self.matrices(rng, size)]


def liouville_sample(G: SurfaceGroup, rng: np.random.Generator, size: int | None = None):
    """One Liouville-distributed UnitTangent (or a list when ``size`` is given)."""
    return _sampler(G).sample(rng, size)


_SAMPLERS = {}


def _sampler(G: SurfaceGroup) -> LiouvilleSampler:
    s = _SAMPLERS.get(id(G))
    if s is None or s.G is not G:
        s = LiouvilleSampler(G)
        _SAMPLERS[id(G)] = s
    return s


# -- cusp excursions --------------------------------------------------------

def cusp_excursion_parameters(v: UnitTangent, tol: float = 1e-9):
    """Exact excursion data of a vector entering the horoball ``Im z > 1``.

    ``v`` must sit on the horocycle ``Im z = 1`` of a chart in which the
    peripheral deck transformation is ``z -> z + 1``.  ``eta`` is the signed
    angle between ``v`` and the upward vertical.  Returns ``(t_u, a_u, eta)``
    where ``t_u`` is the hyperbolic time spent above the horocycle and ``a_u``
    the signed horizontal displacement, both read off the geodesic circle.
    """
    z = v.base_point
    if abs(z.imag - 1) > tol:
        raise GeometryError("vector is not on the horocycle Im z = 1")
    eta = (HALF_PI - v.direction_angle + math.pi) % (2 * math.pi) - math.pi
    if abs(eta) > HALF_PI + tol:
        raise GeometryError("vector does not enter the cusp region")
    if abs(math.sin(eta)) < 1e-12:
        raise GeometryError("infinite excursion: radial vector")
    (a, b), (c, d) = v.matrix
    end_fwd, end_bwd = a / c, b / d
    center = (end_fwd + end_bwd) / 2
    radius = abs(end_fwd - end_bwd) / 2
    sin_phi = min(1.0, 1.0 / radius)
    cos_phi = math.sqrt(max(0.0, 1 - sin_phi * sin_phi))
    t_u = 2 * math.log((1 + cos_phi) / sin_phi)
    exit_x = center + math.copysign(radius * cos_phi, end_fwd - end_bwd)
    a_u = exit_x - z.real
    return t_u, a_u, eta


def horocycle_vector(x: float, eta: float) -> UnitTangent:
    """Vector at ``x + i`` making signed angle ``eta`` with the upward vertical."""
    return UnitTangent.from_point(complex(x, 1.0), HALF_PI - eta)
