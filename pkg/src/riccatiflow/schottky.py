"""Ping-pong certificates and the two invariant sections of a Schottky group.

A ping-pong system is a list of maps ``f_i`` with discs ``A_i`` (repelling)
and ``B_i`` (attracting) such that ``f_i`` sends the complement of ``A_i``
into ``B_i``.  For a signed letter ``x`` we write ``C(x)`` for the disc the
map ``f_x`` pushes into and ``C'(x)`` for the disc it pushes out of, so
``C(+i) = B_i``, ``C'(+i) = A_i`` and the roles swap for ``-i``.

For a bi-infinite reduced word ``... g_-2 g_-1 | g_0 g_1 ...`` the nested
discs::

    K+_n = g_-1 ... g_-n (complement of C'(g_-n))
    K-_n = g_0^-1 ... g_(n-1)^-1 (complement of C(g_(n-1)))

shrink to the points ``s+`` and ``s-``; the diameter of the last disc is a
rigorous bound on the distance between the returned witness and the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import config
from .cocycle import Representation
from .moebius import (Disc, GeometryError, ProjectiveMap, ProjectivePoint, apply,
                      disc_diameter, disc_image, from_hopf, hopf, nesting_margin,
                      random_point, separation)
from .surface import SurfaceGroup, UnitTangent, itinerary


@dataclass(frozen=True, eq=False)
class PingPongSystem:
    maps: tuple
    repelling: tuple
    attracting: tuple
    name: str = "ping-pong"

    def __post_init__(self):
        maps = tuple(m if isinstance(m, ProjectiveMap) else ProjectiveMap(m) for m in self.maps)
        if len(maps) < 2:
            raise GeometryError("a ping-pong system needs at least two maps")
        if any(m.n != 2 for m in maps):
            raise GeometryError("ping-pong maps act on the sphere")
        if not len(self.repelling) == len(self.attracting) == len(maps):
            raise GeometryError("one pair of discs per map is required")
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "_inv", tuple(m.inverse() for m in maps))

    @property
    def k(self) -> int:
        return len(self.maps)

    def letters(self):
        return [x for j in range(1, self.k + 1) for x in (j, -j)]

    def map(self, x: int) -> ProjectiveMap:
        return self.maps[x - 1] if x > 0 else self._inv[-x - 1]

    def target(self, x: int) -> Disc:
        """C(x): the disc ``f_x`` maps everything else into."""
        return self.attracting[x - 1] if x > 0 else self.repelling[-x - 1]

    def source(self, x: int) -> Disc:
        """C'(x): the disc ``f_x`` expands."""
        return self.repelling[x - 1] if x > 0 else self.attracting[-x - 1]

    def discs(self):
        out = []
        for j in range(self.k):
            out.append((f"A{j + 1}", self.repelling[j]))
            out.append((f"B{j + 1}", self.attracting[j]))
        return out

    @classmethod
    def from_file(cls, path) -> "PingPongSystem":
        d = config.read_keyvalue(path)
        return cls.from_dict(d, str(path))

    @classmethod
    def from_dict(cls, d: dict, source: str = "<schottky>") -> "PingPongSystem":
        maps, rep, att = [], [], []
        for k in range(1, 100):
            if f"map.{k}" not in d:
                break
            maps.append(config.parse_matrix(d[f"map.{k}"]))
            rep.append(_parse_disc(config.require(d, f"repelling.{k}", source)))
            att.append(_parse_disc(config.require(d, f"attracting.{k}", source)))
        return cls(tuple(maps), tuple(rep), tuple(att), d.get("name", Path(source).stem))


def _parse_disc(text: str) -> Disc:
    parts = [p.strip() for p in text.split(";")]
    if len(parts) != 4:
        raise config.ConfigError(f"disc needs 'p1; p2; p3; witness', got {text!r}")
    pts = [ProjectivePoint.from_affine(config.parse_complex(p)) for p in parts]
    return Disc(tuple(pts[:3]), pts[3])


def format_disc(d: Disc) -> str:
    def fmt(p):
        z = p.affine()
        if math.isinf(abs(z)):
            return "inf"
        return f"{z.real!r} {z.imag!r}"

    return "; ".join(fmt(p) for p in (*d.boundary, d.witness))


# -- certification ----------------------------------------------------------

class Certificate(NamedTuple):
    ok: bool
    min_gap: float
    min_nesting: float
    contraction: float
    failures: tuple


def _circle_points(d: Disc, count: int = 256):
    c, r = d.cap
    u = np.cross(c, [1.0, 0.0, 0.0])
    if np.linalg.norm(u) < 0.1:
        u = np.cross(c, [0.0, 1.0, 0.0])
    u /= np.linalg.norm(u)
    w = np.cross(c, u)
    for phi in np.linspace(0, 2 * math.pi, count, endpoint=False):
        yield from_hopf(math.cos(r) * c + math.sin(r) * (math.cos(phi) * u + math.sin(phi) * w))


def spherical_derivative(m: ProjectiveMap, p: ProjectivePoint) -> float:
    """Local Lipschitz factor of ``m`` at ``p`` for the Fubini-Study metric."""
    s = m.sl2()
    v = p.coords / np.linalg.norm(p.coords)
    return float(1 / np.linalg.norm(s @ v) ** 2)


def lipschitz_constant(m: ProjectiveMap) -> float:
    """Global Fubini-Study Lipschitz constant: the squared top singular value."""
    sv = np.linalg.svd(m.sl2(), compute_uv=False)
    return float(sv[0] ** 2)


def certify_ping_pong(sys: PingPongSystem, tol: float = 0.0) -> Certificate:
    """Check disjointness and nesting; record margins and a contraction factor.

    Margins are Fubini-Study distances.  The contraction factor is the largest
    spherical derivative of any ``f_x`` on the complement of ``C'(x)``; it is
    attained on the boundary circle unless the most expanded point lies in
    that complement.
    """
    failures = []
    gaps = []
    discs = sys.discs()
    for i in range(len(discs)):
        for j in range(i + 1, len(discs)):
            g = separation(discs[i][1], discs[j][1])
            gaps.append(g)
            if not g > tol:
                failures.append((f"disjoint {discs[i][0]} {discs[j][0]}", g))
    nest = []
    contraction = 0.0
    for x in sys.letters():
        f = sys.map(x)
        outside = sys.source(x).complement()
        img = disc_image(f, outside)
        margin = nesting_margin(img, sys.target(x))
        nest.append(margin)
        if not margin > tol:
            failures.append((f"nest f({x}) into C({x})", margin))
        u, sv, vh = np.linalg.svd(f.sl2())
        worst = ProjectivePoint(vh[-1].conj())
        if outside.contains(worst):
            contraction = max(contraction, float(sv[0] ** 2))
        else:
            contraction = max(contraction, max(spherical_derivative(f, p)
                                               for p in _circle_points(sys.source(x))))
    return Certificate(not failures, min(gaps), min(nest), contraction, tuple(failures))


def _outside_points(sys: PingPongSystem, rng, count=3):
    out = []
    while len(out) < count:
        p = random_point(rng)
        if all(not d.contains(p) for _, d in sys.discs()):
            out.append(p)
    return out


def freeness_probe(sys: PingPongSystem, rng: np.random.Generator, n_words: int = 1000,
                   max_length: int = 12, tol: float = 1e-9) -> int:
    """Count random reduced words that fix all three test points (expected 0)."""
    from .moebius import fubini_study_distance

    pts = _outside_points(sys, rng)
    bad = 0
    for _ in range(n_words):
        length = int(rng.integers(1, max_length + 1))
        w = random_reduced(sys.k, length, rng)
        m = ProjectiveMap.identity()
        for x in w:
            m = sys.map(x) @ m
        if all(fubini_study_distance(apply(m, p), p) <= tol for p in pts):
            bad += 1
    return bad


# -- bi-words and sections --------------------------------------------------

def random_reduced(k: int, length: int, rng: np.random.Generator, prev: int = 0) -> tuple:
    out = []
    last = prev
    for _ in range(length):
        while True:
            x = int(rng.integers(1, k + 1)) * (1 if rng.random() < 0.5 else -1)
            if x != -last:
                break
        out.append(x)
        last = x
    return tuple(out)


@dataclass(frozen=True)
class ReducedBiWord:
    """Window of a bi-infinite reduced word.

    ``past = (g_-1, g_-2, ...)`` is stored outward from the cut and
    ``future = (g_0, g_1, ...)``.
    """

    past: tuple
    future: tuple

    def __post_init__(self):
        past, future = tuple(map(int, self.past)), tuple(map(int, self.future))
        seq = tuple(reversed(past)) + future
        if any(x == 0 for x in seq):
            raise ValueError("letter 0 is not a generator")
        for a, b in zip(seq, seq[1:]):
            if a == -b:
                raise ValueError("bi-word is not reduced")
        object.__setattr__(self, "past", past)
        object.__setattr__(self, "future", future)

    def shifted(self) -> "ReducedBiWord":
        """Shift left: the new ``g_0`` is the old ``g_1``."""
        if not self.future:
            raise ValueError("no future letter to shift")
        return ReducedBiWord((self.future[0],) + self.past, self.future[1:])

    @classmethod
    def constant(cls, x: int, m: int) -> "ReducedBiWord":
        return cls((x,) * m, (x,) * m)

    @classmethod
    def random(cls, k: int, m: int, rng: np.random.Generator) -> "ReducedBiWord":
        seq = random_reduced(k, 2 * m, rng)
        return cls(tuple(reversed(seq[:m])), seq[m:])


class NestedLimit(NamedTuple):
    point: ProjectivePoint
    bound: float
    depth: int
    converged: bool


def _nested(sys: PingPongSystem, letters, disc_of, tol: float, diameters=None) -> NestedLimit:
    m = ProjectiveMap.identity()
    disc = None
    bound = math.pi / 2
    for n, x in enumerate(letters, 1):
        m = m @ sys.map(x)
        disc = disc_image(m, disc_of(x).complement())
        bound = disc_diameter(disc)
        if diameters is not None:
            diameters.append(bound)
        if bound < tol:
            return NestedLimit(disc.witness, bound, n, True)
    if disc is None:
        raise ValueError("empty window")
    return NestedLimit(disc.witness, bound, len(letters), False)


def s_plus(sys: PingPongSystem, word: ReducedBiWord, tol: float = 1e-9,
           diameters=None) -> NestedLimit:
    """Attracting section: limit of ``g_-1 ... g_-n`` applied to far-away discs."""
    return _nested(sys, word.past, sys.source, tol, diameters)


def s_minus(sys: PingPongSystem, word: ReducedBiWord, tol: float = 1e-9,
            diameters=None) -> NestedLimit:
    """Repelling section: limit of ``g_0^-1 ... g_(n-1)^-1`` on far-away discs."""
    return _nested(sys, tuple(-x for x in word.future), sys.source, tol, diameters)


def s_minus_disc(sys: PingPongSystem, word: ReducedBiWord, depth: int) -> Disc:
    m = ProjectiveMap.identity()
    for x in word.future[:depth]:
        m = m @ sys.map(-x)
    return disc_image(m, sys.target(word.future[depth - 1]).complement())


def s_plus_disc(sys: PingPongSystem, word: ReducedBiWord, depth: int) -> Disc:
    m = ProjectiveMap.identity()
    for x in word.past[:depth]:
        m = m @ sys.map(x)
    return disc_image(m, sys.source(word.past[depth - 1]).complement())


def letter_map(sys: PingPongSystem, rho: Representation) -> dict:
    """Signed Schottky letter for every signed surface letter."""
    if rho.n != 2:
        raise GeometryError("Schottky sections need a rank-two representation")
    out = {}
    for j in range(1, len(rho.images) + 1):
        img = rho.projective(j)
        hit = [x for x in sys.letters() if sys.map(x).is_close(img)]
        if len(hit) != 1:
            raise GeometryError(f"image of generator {j} is not a Schottky generator")
        out[j], out[-j] = hit[0], -hit[0]
    return out


class GeodesicSection(NamedTuple):
    plus: NestedLimit
    minus: NestedLimit
    crossings: int


def schottky_section_for_geodesic(sys: PingPongSystem, rho: Representation, G: SurfaceGroup,
                                  v: UnitTangent, n_crossings: int = 8, tol: float = 1e-9,
                                  max_crossings: int = 64) -> GeodesicSection:
    """Both Schottky sections at ``v`` from its forward and backward itinerary.

    The crossing depth starts at ``n_crossings`` and doubles until both bounds
    drop below ``tol`` or the depth exceeds ``max_crossings``.  Inside the
    simply connected polygon the transport between base point and ``v`` is
    trivial, so no extra holonomy is applied.
    """
    lm = letter_map(sys, rho)
    n = max(1, n_crossings)
    while True:
        fwd = itinerary(v, n, G)
        bwd = itinerary(v.reversed(), n, G)
        word = ReducedBiWord(tuple(lm[-x] for x in bwd), tuple(lm[x] for x in fwd))
        plus = s_plus(sys, word, tol)
        minus = s_minus(sys, word, tol)
        if (plus.converged and minus.converged) or 2 * n > max_crossings:
            return GeodesicSection(plus, minus, n)
        n *= 2


def preset_discs(radius: float = 0.36):
    """Discs of the shipped rank-two system for a given Fubini-Study radius."""
    h = ProjectiveMap(np.array([[1.0, 1.0], [-1.0, 1.0]]))
    a1 = Disc.ball(0, radius)
    b1 = Disc.ball(math.inf, radius)
    return (a1, disc_image(h, a1)), (b1, disc_image(h, b1))


def preset_system(radius: float = 0.36) -> PingPongSystem:
    """z -> 9z and its conjugate by the rotation taking 0, inf to 1, -1."""
    g1 = np.diag([3.0, 1 / 3])
    h = np.array([[1.0, 1.0], [-1.0, 1.0]]) / math.sqrt(2)
    g2 = h @ g1 @ np.linalg.inv(h)
    rep, att = preset_discs(radius)
    return PingPongSystem((ProjectiveMap(g1), ProjectiveMap(g2)), rep, att,
                          f"schottky-9-r{radius}")
