"""Cusp excursions and the integrability dichotomy.

A geodesic entering the horoball ``Im z > 1`` of a cusp chart at signed angle
``eta`` from the vertical spends time ``t_u = 2 log((1 + cos eta) / |sin eta|)``
inside and winds ``a_u = 2 cot eta`` times around the cusp.  The monodromy
picked up is modelled by

* parabolic (unit-modulus eigenvalues): ``exp((a_u / 2 pi) A_theta)`` where
  ``exp(t A_theta) = e^{i t theta} [t^(k-j) / (k-j)!]``;
* hyperbolic (an eigenvalue of modulus > 1): ``C diag(lam^(a_u/2), 1, ...,
  lam^(-a_u/2)) C^-1``.

The excursion contribution to the integrability integral is
``I(eps) = 2 pi * int_eps^(pi/2) log+ |B(eta)| d eta`` (the theta integral is
a constant factor since |e^{i t theta}| = 1).  It stays bounded as eps -> 0
in the parabolic case and grows like ``2 pi log(lam) log(1/eps)`` in the
hyperbolic case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .moebius import GeometryError

TWO_PI = 2 * math.pi


@dataclass(frozen=True, eq=False)
class CuspMonodromySpec:
    n: int
    kind: str
    theta: float = 0.0
    lam: float = 1.0
    conjugator: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension must be at least 2")
        if self.kind not in ("parabolic", "hyperbolic"):
            raise ValueError(f"unknown cusp monodromy kind {self.kind!r}")
        if self.kind == "hyperbolic" and not self.lam > 1:
            raise ValueError("hyperbolic cusp monodromy needs lambda > 1")
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")
        if self.conjugator is not None:
            c = np.array(self.conjugator, dtype=complex)
            if c.shape != (self.n, self.n) or abs(np.linalg.det(c)) == 0:
                raise ValueError("conjugator must be an invertible n x n matrix")
            object.__setattr__(self, "conjugator", c)

    @classmethod
    def parabolic(cls, theta: float = 0.0, n: int = 2) -> "CuspMonodromySpec":
        return cls(n, "parabolic", theta=theta)

    @classmethod
    def hyperbolic(cls, lam: float, n: int = 2, conjugator=None) -> "CuspMonodromySpec":
        return cls(n, "hyperbolic", lam=lam, conjugator=conjugator)

    @classmethod
    def from_matrix(cls, m, tol: float = 1e-7) -> "CuspMonodromySpec":
        """Spec with the same eigenvalue-modulus profile as a peripheral image."""
        m = np.asarray(m, dtype=complex)
        n = m.shape[0]
        m = m / abs(np.linalg.det(m)) ** (1 / n)
        mu, vecs = np.linalg.eig(m)
        mod = np.abs(mu)
        if mod.max() - mod.min() <= tol * mod.max():
            return cls.parabolic(float(np.angle(mu[0])), n)
        lam = math.sqrt(mod.max() / mod.min())
        order = np.argsort(-mod)
        conj = vecs[:, order]
        if abs(np.linalg.det(conj)) < 1e-12:
            conj = None
        return cls.hyperbolic(lam, n, conj)

    @property
    def conditioning(self) -> float:
        """K = 1 / cond(C): lower bound factor in |B| >= K lam^(a_u/2)."""
        if self.conjugator is None:
            return 1.0
        return float(1 / np.linalg.cond(self.conjugator))


def exp_tA_theta(theta: float, t: float, n: int) -> np.ndarray:
    """Closed form of ``exp(t A_theta)``: phase times the unipotent Jordan exponential."""
    m = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for k in range(j, n):
            m[j, k] = t ** (k - j) / math.factorial(k - j)
    return np.exp(1j * t * theta) * m


def winding(eta):
    """a_u = 2 cos(eta) / sin(eta)."""
    eta = np.asarray(eta, dtype=float)
    if np.any(eta == 0):
        raise GeometryError("radial vector: infinite excursion")
    return 2 * np.cos(eta) / np.sin(eta)


def excursion_time(eta):
    """Exact time spent above the horocycle for entry angle ``eta``."""
    eta = np.abs(np.asarray(eta, dtype=float))
    return 2 * np.log((1 + np.cos(eta)) / np.sin(eta))


def excursion_bounds(eta):
    """Interval ``-2 log|sin eta| -/+ 2 cos eta`` that must contain t_u."""
    eta = np.asarray(eta, dtype=float)
    base = -2 * np.log(np.abs(np.sin(eta)))
    half = 2 * np.cos(eta)
    return base - half, base + half


def in_out_matrix(spec: CuspMonodromySpec, eta: float) -> np.ndarray:
    if eta == 0:
        raise GeometryError("radial: in-out matrix undefined at eta = 0")
    a = float(winding(eta))
    if spec.kind == "parabolic":
        return exp_tA_theta(spec.theta, a / TWO_PI, spec.n)
    d = np.ones(spec.n)
    d[0] = spec.lam ** (a / 2)
    d[-1] = spec.lam ** (-a / 2)
    c = np.eye(spec.n) if spec.conjugator is None else spec.conjugator
    return c @ np.diag(d) @ np.linalg.inv(c)


def operator_norm(m: np.ndarray):
    """Largest singular value; closed form for (batches of) 2x2 matrices."""
    m = np.asarray(m)
    if m.shape[-2:] == (2, 2):
        fro = np.sum(np.abs(m) ** 2, axis=(-2, -1))
        det = np.abs(m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0])
        return np.sqrt((fro + np.sqrt(np.maximum(fro * fro - 4 * det * det, 0.0))) / 2)
    return np.linalg.svd(m, compute_uv=False)[..., 0]


def log_norm(spec: CuspMonodromySpec, eta) -> np.ndarray:
    """``log |B(eta)|`` for an array of angles, free of overflow."""
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    a = winding(eta)
    n = spec.n
    if spec.kind == "parabolic":
        t = a / TWO_PI
        m = np.zeros((eta.size, n, n))
        for j in range(n):
            for k in range(j, n):
                m[:, j, k] = t ** (k - j) / math.factorial(k - j)
        # |e^{i t theta}| = 1, so the phase drops out of the norm
        return np.log(operator_norm(m))
    s = a / 2
    sgn = np.where(s >= 0, 1.0, -1.0)
    # factor out lam^|s| and keep the remaining diagonal in [0, 1]
    r = spec.lam ** (-np.abs(s))
    d = np.ones((eta.size, n))
    d[:, 1:-1] = r[:, None]
    d[:, 0] = np.where(sgn > 0, 1.0, r * r)
    d[:, -1] = np.where(sgn > 0, r * r, 1.0)
    c = np.eye(n) if spec.conjugator is None else spec.conjugator
    ci = np.linalg.inv(c)
    m = np.einsum("ij,nj,jk->nik", c, d, ci)
    return np.abs(s) * math.log(spec.lam) + np.log(operator_norm(m))


def integrability_integral(spec: CuspMonodromySpec, eps: float, rtol: float = 1e-6,
                           start_panels: int = 64, max_panels: int = 2 ** 22) -> float:
    """``2 pi * int_eps^(pi/2) log+ |B(eta)| d eta`` by composite midpoint in log eta.

    Panels double until the relative change drops below ``rtol``.
    """
    if not 0 < eps < math.pi / 2:
        raise ValueError("eps must lie in (0, pi/2)")
    lo, hi = math.log(eps), math.log(math.pi / 2)

    def midpoint(n):
        h = (hi - lo) / n
        u = lo + h * (np.arange(n) + 0.5)
        eta = np.exp(u)
        return TWO_PI * h * float(np.sum(np.maximum(log_norm(spec, eta), 0.0) * eta))

    n = start_panels
    prev = midpoint(n)
    while n < max_panels:
        n *= 2
        cur = midpoint(n)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    return prev


class DichotomyReport(NamedTuple):
    eps: tuple
    values: tuple
    slope: float
    intercept: float
    r2: float
    tail_increment: float
    integrable: bool


def integrability_dichotomy(spec: CuspMonodromySpec, exponents=range(4, 17)) -> DichotomyReport:
    """Evaluate I(eps) on eps = 2^-k and decide between bounded and log-divergent.

    A least-squares line of I against log(1/eps) is fitted.  The behaviour is
    called divergent when the fit is good (R^2 > 0.99), its slope is positive
    and the last halving still adds at least half of what the slope predicts;
    a convergent integral has increments that shrink like eps log(1/eps).
    """
    eps = tuple(2.0 ** -k for k in exponents)
    vals = tuple(integrability_integral(spec, e) for e in eps)
    x = np.log(1 / np.array(eps))
    y = np.array(vals)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1 - ss_res / ss_tot if ss_tot > 0 else 1.0
    tail = vals[-1] - vals[-2]
    divergent = slope > 0 and r2 > 0.99 and tail > 0.5 * slope * math.log(2)
    return DichotomyReport(eps, vals, float(slope), float(intercept), float(r2), float(tail),
                           not divergent)


# -- Monte Carlo ------------------------------------------------------------

def liouville_excursion_sampler(rng: np.random.Generator, size: int):
    """Samples ``(theta, eta, t)`` from cos(eta) d theta d eta d t on excursions.

    ``theta`` is uniform on [0, 2 pi), ``eta`` on (0, pi/2] has density
    cos(eta) (drawn as arcsin of a uniform) and ``t`` is uniform on
    [0, t_u(eta)].
    """
    theta = rng.uniform(0, TWO_PI, size)
    eta = np.arcsin(1.0 - rng.random(size))
    t = rng.random(size) * excursion_time(eta)
    return theta, eta, t


def monte_carlo_integral(spec: CuspMonodromySpec, eps: float, rng: np.random.Generator,
                         size: int = 100_000):
    """Reweighted Monte-Carlo estimate of I(eps) and its standard error."""
    _, eta, _ = liouville_excursion_sampler(rng, size)
    f = np.where(eta > eps, np.maximum(log_norm(spec, eta), 0.0) / np.cos(eta), 0.0)
    return TWO_PI * float(f.mean()), TWO_PI * float(f.std(ddof=1) / math.sqrt(size))
