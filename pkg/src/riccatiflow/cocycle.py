"""Linear and projective cocycles over the surface geodesic flow.

A representation assigns an invertible matrix (a fixed linear lift) to every
surface generator.  Transport in the fiber follows the deck word of the base
flow: the cocycle over a segment with deck word ``(l_1, ..., l_k)`` is::

    A(v, t) = rho(l_k) ... rho(l_1),    rho(-j) = rho(j)^{-1}

so the first letter acts first.  This is the covariant convention in which
the fiber coordinate of the universal cover is constant along leaves; the
monodromy of a closed loop is then the inverse of this product, which is
how the holonomy convention is absorbed.  A single letter ``+j`` gives
``rho(g_j)`` itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import config
from .moebius import (CLASSIFY_TOL, GeometryError, ProjectiveMap, ProjectivePoint,
                      fubini_study_distance)
from .surface import (CuspCapture, SurfaceGroup, UnitTangent, Word, flow_on_surface,
                      liouville_sample)

FiberPoint = ProjectivePoint


# -- representations --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Representation:
    """Linear lifts ``rho(g_j)`` of the monodromy, one per surface generator."""

    images: tuple
    name: str = "representation"
    _inverses: tuple = field(init=False, repr=False)

    def __post_init__(self):
        mats = []
        for m in self.images:
            m = np.array(m, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
                raise GeometryError("representation images must be square matrices")
            if not np.isfinite(m).all() or abs(np.linalg.det(m)) == 0:
                raise GeometryError("representation image is not invertible")
            m.flags.writeable = False
            mats.append(m)
        if not mats:
            raise GeometryError("representation needs at least one image")
        if len({m.shape for m in mats}) != 1:
            raise GeometryError("images have different sizes")
        logdet = tuple(float(np.log(abs(np.linalg.det(m)))) for m in mats)
        object.__setattr__(self, "_logdet", logdet)
        inv = []
        for m in mats:
            mi = np.linalg.inv(m)
            mi.flags.writeable = False
            inv.append(mi)
        object.__setattr__(self, "images", tuple(mats))
        object.__setattr__(self, "_inverses", tuple(inv))

    @property
    def n(self) -> int:
        return self.images[0].shape[0]

    def letter(self, x: int) -> np.ndarray:
        return self.images[x - 1] if x > 0 else self._inverses[-x - 1]

    def projective(self, j: int) -> ProjectiveMap:
        return ProjectiveMap(self.images[j - 1])

    def log_abs_det(self, word) -> float:
        """log |det| of the cocycle over a word, summed letter by letter."""
        return sum(self._logdet[x - 1] if x > 0 else -self._logdet[-x - 1] for x in word)

    @classmethod
    def canonical(cls, G: SurfaceGroup) -> "Representation":
        """The covering representation: every generator is its own image."""
        return cls(tuple(G.generators), f"canonical({G.name})")

    @classmethod
    def trivial(cls, G: SurfaceGroup, n: int = 2) -> "Representation":
        return cls(tuple(np.eye(n) for _ in G.generators), "trivial")

    def scaled(self, c: complex) -> "Representation":
        return Representation(tuple(c * m for m in self.images), f"{self.name}*{c}")

    def conjugated(self, p) -> "Representation":
        p = np.asarray(p, dtype=complex)
        pi = np.linalg.inv(p)
        return Representation(tuple(p @ m @ pi for m in self.images), f"{self.name}^P")

    @classmethod
    def from_file(cls, path) -> "Representation":
        d = config.read_keyvalue(path)
        return cls.from_dict(d, str(path))

    @classmethod
    def from_dict(cls, d: dict, source: str = "<representation>") -> "Representation":
        mats = []
        for k in range(1, 100):
            key = f"image.{k}"
            if key not in d:
                break
            mats.append(config.parse_matrix(d[key]))
        if not mats:
            raise config.ConfigError(f"{source}: no image.N entries")
        if "n" in d and int(d["n"]) != mats[0].shape[0]:
            raise config.ConfigError(f"{source}: n does not match the image size")
        return cls(tuple(mats), d.get("name", Path(source).stem))

    def check_surface(self, G: SurfaceGroup):
        if len(self.images) != len(G.generators):
            raise GeometryError(
                f"representation has {len(self.images)} images but the surface has "
                f"{len(G.generators)} generators")


# -- cocycle values ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CocycleValue:
    """``exp(log_scale) * matrix`` with the matrix's largest entry in [1, 2)."""

    matrix: np.ndarray
    log_scale: float = 0.0

    @classmethod
    def normalized(cls, m: np.ndarray, log_scale: float = 0.0) -> "CocycleValue":
        big = float(np.abs(m).max())
        if big == 0 or not math.isfinite(big):
            raise GeometryError("degenerate cocycle value")
        # power-of-two scaling keeps the rescaling exact
        _, e = math.frexp(big)
        e -= 1
        return cls(m * math.ldexp(1.0, -e), log_scale + e * math.log(2))

    @classmethod
    def identity(cls, n: int) -> "CocycleValue":
        return cls(np.eye(n, dtype=complex), 0.0)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def full(self) -> np.ndarray:
        return math.exp(self.log_scale) * self.matrix

    def __matmul__(self, other: "CocycleValue") -> "CocycleValue":
        return CocycleValue.normalized(self.matrix @ other.matrix,
                                       self.log_scale + other.log_scale)

    def inverse(self) -> "CocycleValue":
        return CocycleValue.normalized(np.linalg.inv(self.matrix), -self.log_scale)

    def apply(self, p: ProjectivePoint) -> ProjectivePoint:
        return ProjectivePoint(self.matrix @ p.coords)

    def projective(self) -> ProjectiveMap:
        return ProjectiveMap(self.matrix)

    def relative_error(self, other: "CocycleValue") -> float:
        """``|self - other| / |self|`` computed without leaving log space."""
        a = self.matrix
        b = other.matrix * math.exp(other.log_scale - self.log_scale)
        return float(np.linalg.norm(a - b) / np.linalg.norm(a))


def evaluate_word(rho: Representation, w) -> CocycleValue:
    """``rho(w_k) ... rho(w_1)``; the empty word gives the identity."""
    letters = w.letters if isinstance(w, Word) else tuple(w)
    value = CocycleValue.identity(rho.n)
    m, s = value.matrix, 0.0
    for k, x in enumerate(letters, 1):
        m = rho.letter(x) @ m
        if k % 8 == 0:
            v = CocycleValue.normalized(m, s)
            m, s = v.matrix, v.log_scale
    return CocycleValue.normalized(m, s)


def cocycle_along(rho: Representation, v: UnitTangent, t: float, G: SurfaceGroup):
    """Cocycle value over the flow segment from ``v`` of length ``t``."""
    _, word = flow_on_surface(v, t, G)
    return evaluate_word(rho, word)


def foliated_flow(rho: Representation, G: SurfaceGroup, v: UnitTangent,
                  w: FiberPoint, t: float):
    """Flow the pair (base vector, fiber point) for time ``t``."""
    vt, word = flow_on_surface(v, t, G)
    if len(word) == 0:
        return vt, w, word
    return vt, evaluate_word(rho, word).apply(w), word


# -- integrability ----------------------------------------------------------

class CuspVerdict(NamedTuple):
    point: float
    word: tuple
    moduli: tuple
    integrable: bool


class IntegrabilityReport(NamedTuple):
    integrable: bool
    cusps: tuple

    def __bool__(self):
        return self.integrable


def check_integrability(rho: Representation, G: SurfaceGroup,
                        tol: float = CLASSIFY_TOL) -> IntegrabilityReport:
    """Eigenvalue criterion at every cusp: all moduli equal (up to the lift).

    Moduli are measured after dividing the peripheral image by the n-th root
    of its determinant, so a scalar rescaling of the lift does not matter.
    """
    rho.check_surface(G)
    verdicts = []
    for c in G.cusps:
        m = evaluate_word(rho, c.word).matrix
        m = m / abs(np.linalg.det(m)) ** (1 / rho.n)
        moduli = tuple(sorted(float(x) for x in np.abs(np.linalg.eigvals(m))))
        ok = all(abs(x - 1) <= max(tol, 1e-7) for x in moduli)
        verdicts.append(CuspVerdict(c.point, c.word, moduli, ok))
    return IntegrabilityReport(all(v.integrable for v in verdicts), tuple(verdicts))


# -- Lyapunov spectrum ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LyapunovEstimate:
    exponents: tuple
    T: float
    step: float
    history: np.ndarray
    stderr: tuple
    restarts: int = 0
    net_letters: int = 0
    total_letters: int = 0
    integrable: bool = True

    @property
    def advisory(self) -> str:
        return "" if self.integrable else "advisory, may diverge"

    def partial_exponents(self) -> np.ndarray:
        """Running estimates after each block (rows) for each exponent (columns)."""
        cum = np.cumsum(self.history, axis=0)
        t = self.step * np.arange(1, len(self.history) + 1)
        return np.sort(cum / t[:, None], axis=1)[:, ::-1]


def lyapunov_spectrum(rho: Representation, G: SurfaceGroup, v0: UnitTangent, T: float,
                      step: float = 1.0, rng: np.random.Generator | None = None,
                      max_restarts: int = 1000) -> LyapunovEstimate:
    """QR-reorthonormalized Lyapunov spectrum along one orbit.

    The frame is pushed through the cocycle of every block of length ``step``
    and re-orthonormalized; block log-increments are kept in ``history``.
    Cusp capture restarts the orbit from a fresh Liouville sample.
    """
    if not (T > 0 and step > 0 and T >= step):
        raise ValueError("need T >= step > 0")
    rho.check_surface(G)
    rng = np.random.default_rng(0) if rng is None else rng
    n = rho.n
    nblocks = int(round(T / step))
    q = np.eye(n, dtype=complex)
    history = np.zeros((nblocks, n))
    v = v0
    restarts = net = total = 0
    k = 0
    while k < nblocks:
        try:
            v_next, word = flow_on_surface(v, step, G)
        except CuspCapture:
            restarts += 1
            if restarts > max_restarts:
                raise
            v = liouville_sample(G, rng)
            continue
        value = evaluate_word(rho, word)
        q, r = np.linalg.qr(value.matrix @ q)
        diag = np.abs(np.diag(r))
        if np.any(diag[:-1] == 0):
            raise GeometryError("degenerate frame")
        logs = np.log(diag[:-1]) + value.log_scale
        # the last diagonal entry can underflow in long cusp excursions;
        # the determinant gives it exactly
        history[k, :-1] = logs
        history[k, -1] = rho.log_abs_det(word) - logs.sum()
        net += sum(1 if x > 0 else -1 for x in word)
        total += len(word)
        v = v_next
        k += 1
    sums = history.sum(axis=0) / (nblocks * step)
    order = np.argsort(-sums)
    exps = tuple(float(x) for x in sums[order])
    history = history[:, order]
    nb = min(100, nblocks)
    blocks = np.array_split(history, nb)
    means = np.array([b.mean(axis=0) for b in blocks]) / step
    se = means.std(axis=0, ddof=1) / math.sqrt(nb) if nb > 1 else np.full(n, np.inf)
    return LyapunovEstimate(exps, nblocks * step, step, history, tuple(float(x) for x in se),
                            restarts, net, total, check_integrability(rho, G).integrable)


# -- section estimators -----------------------------------------------------

class SectionEstimate(NamedTuple):
    point: FiberPoint
    change: float
    dominated: bool


def _generic_vector(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def _past_transport(rho, G, v, T):
    # Cocycle from phi(v, -T) to v.  The backward flow records deck letters
    # whose product carries the lift of v to that of phi(v, -T); transporting
    # forward is the inverse of that product.
    _, word = flow_on_surface(v, -T, G)
    return evaluate_word(rho, word.inverse())


def top_section_estimate(rho: Representation, G: SurfaceGroup, v: UnitTangent, T: float = 30.0,
                         seed: int = 12345, tol: float = 1e-8) -> SectionEstimate:
    """Direction of largest expansion at ``v``.

    A fixed generic vector is transported from ``phi(v, -T)`` to ``v``.  The
    same is done from ``phi(v, -T/2)``; if the two projective estimates differ
    by more than ``tol`` the result is flagged as not dominated.
    """
    w0 = _generic_vector(rho.n, seed)
    full = _past_transport(rho, G, v, T).matrix @ w0
    half = _past_transport(rho, G, v, T / 2).matrix @ w0
    p, h = FiberPoint(full), FiberPoint(half)
    change = fubini_study_distance(p, h)
    return SectionEstimate(p, change, change <= tol)


def bottom_section_estimate(rho: Representation, G: SurfaceGroup, v: UnitTangent,
                            T: float = 30.0, seed: int = 12345,
                            tol: float = 1e-8) -> SectionEstimate:
    """Direction of largest contraction: the top estimate for the reversed vector."""
    return top_section_estimate(rho, G, v.reversed(), T, seed, tol)
