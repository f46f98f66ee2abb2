"""Orbit statistics of the foliated flow: time averages, basins and histograms.

States are kept as (unit tangent inside the fundamental polygon, fiber point)
pairs, so any function of the pair descends to the quotient.  Orbits are
sampled every ``dt``; observables are evaluated on whole trajectories at once.

Observables are multiplied by the indicator of a compact window, the polygon
with every cusp cut off at chart height ``WINDOW_HEIGHT``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .cocycle import Representation, top_section_estimate
from .moebius import GeometryError
from .surface import (CuspCapture, SurfaceGroup, UnitTangent, _flow_core, _sampler,
                      liouville_sample)

WINDOW_HEIGHT = 10.0
MAX_DT = 0.1


# -- orbits -----------------------------------------------------------------

class OrbitRecord(NamedTuple):
    """Sampled states at times ``dt, 2 dt, ...``; ``mats`` has shape (N, 2, 2)."""

    dt: float
    mats: np.ndarray
    fiber: np.ndarray
    captured: bool

    @property
    def duration(self) -> float:
        return self.dt * len(self.mats)


_REVERSE = np.array([[0.0, -1.0], [1.0, 0.0]])


def orbit(rho: Representation, G: SurfaceGroup, v: UnitTangent, w, T: float,
          dt: float = MAX_DT, direction: int = 1) -> OrbitRecord:
    """Sample the foliated orbit of ``(v, w)`` for time ``T``.

    ``direction=-1`` runs the flow backwards; the recorded unit tangents are
    then those of the backward orbit itself, not of the reversed vector.
    A cusp capture or vertex hit ends the record early and sets ``captured``.
    """
    if not 0 < dt <= MAX_DT:
        raise ValueError(f"dt must lie in (0, {MAX_DT}]")
    n_steps = int(round(T / dt))
    m = v.matrix if direction > 0 else v.matrix @ _REVERSE
    x = np.array(w.coords if hasattr(w, "coords") else w, dtype=complex)
    x = x / np.abs(x).max()
    mats = np.empty((n_steps, 2, 2))
    fiber = np.empty((n_steps, x.size), dtype=complex)
    captured = False
    k = 0
    for k in range(n_steps):
        try:
            m, letters, _ = _flow_core(G, m, dt)
        except (CuspCapture, GeometryError):
            captured = True
            break
        for letter in letters:
            x = rho.letter(letter) @ x
        x = x / np.abs(x).max()
        mats[k] = m
        fiber[k] = x
    else:
        k = n_steps
    mats, fiber = mats[:k], fiber[:k]
    if direction < 0:
        mats = mats @ _REVERSE
    return OrbitRecord(dt, mats, fiber, captured)


# -- observables ------------------------------------------------------------

def base_points(mats: np.ndarray) -> np.ndarray:
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    return (a * 1j + b) / (c * 1j + d)


def in_window(G: SurfaceGroup, mats: np.ndarray, height: float = WINDOW_HEIGHT) -> np.ndarray:
    z = base_points(mats)
    ok = z.imag < height
    for k in range(len(G.cusps)):
        (a, b), (c, d) = G.cusp_chart(k)
        ok &= z.imag / np.abs(c * z + d) ** 2 < height
    return ok


def _fs(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Fubini-Study distance between rows of two (N, 2) arrays."""
    wedge = np.abs(x[:, 0] * p[:, 1] - x[:, 1] * p[:, 0])
    inner = np.abs(x[:, 0] * np.conj(p[:, 0]) + x[:, 1] * np.conj(p[:, 1]))
    return np.arctan2(wedge, inner)


def trivialized(mats: np.ndarray, fiber: np.ndarray) -> np.ndarray:
    """Homogeneous coordinates of ``-i g^{-1}(w)`` for every state."""
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    w0, w1 = fiber[:, 0], fiber[:, 1]
    return np.stack([-1j * (d * w0 - b * w1), -c * w0 + a * w1], axis=1)


def section_points(mats: np.ndarray, which: str) -> np.ndarray:
    """Fiber points of the explicit sections in homogeneous coordinates."""
    n = len(mats)
    if which == "attracting":  # backward endpoint g(0)
        return mats[:, :, 1].astype(complex)
    if which == "repelling":  # forward endpoint g(inf)
        return mats[:, :, 0].astype(complex)
    if which == "diagonal":
        return np.stack([base_points(mats), np.ones(n)], axis=1)
    if which == "pole":
        return np.tile(np.array([0.0, 1.0], dtype=complex), (n, 1))
    raise ValueError(f"unknown section {which!r}")


def _require_line(fiber):
    if fiber.shape[1] != 2:
        raise ValueError("fiber observables are defined for n = 2")


@dataclass(frozen=True)
class SectionDistance:
    """Fubini-Study distance from the fiber point to a reference section."""

    section: str = "diagonal"
    windowed: bool = True

    @property
    def name(self) -> str:
        return f"fs_{self.section}"

    def __call__(self, G, mats, fiber):
        _require_line(fiber)
        h = _fs(fiber, section_points(mats, self.section))
        return h * in_window(G, mats) if self.windowed else h


@dataclass(frozen=True)
class FiberBin:
    """Indicator that the trivialized fiber coordinate has polar angle in [lo, hi)."""

    lo: float = 0.0
    hi: float = math.pi / 2

    @property
    def name(self) -> str:
        return f"bin_{self.lo:.3f}_{self.hi:.3f}"

    def __call__(self, G, mats, fiber):
        _require_line(fiber)
        theta = polar_angle(trivialized(mats, fiber))
        return ((theta >= self.lo) & (theta < self.hi) & in_window(G, mats)).astype(float)


@dataclass(frozen=True)
class BaseBump:
    """``exp(-(d(z, center) / scale)^2)`` in the hyperbolic distance."""

    center: complex = 1j
    scale: float = 1.0

    @property
    def name(self) -> str:
        return "bump"

    def __call__(self, G, mats, fiber):
        z = base_points(mats)
        c = complex(self.center)
        cosh_d = 1 + np.abs(z - c) ** 2 / (2 * z.imag * c.imag)
        d = np.arccosh(np.maximum(cosh_d, 1.0))
        return np.exp(-(d / self.scale) ** 2) * in_window(G, mats)


@dataclass(frozen=True)
class Constant:
    value: float = 1.0

    @property
    def name(self) -> str:
        return "constant"

    def __call__(self, G, mats, fiber):
        return np.full(len(mats), float(self.value))


def default_observables(G: SurfaceGroup) -> list:
    return [SectionDistance("diagonal"), SectionDistance("pole"), FiberBin(),
            BaseBump(G.base_point)]


# -- time averages ----------------------------------------------------------

class TimeAverage(NamedTuple):
    value: float
    stderr: float
    duration: float
    captured: bool


def _batch_stderr(x: np.ndarray, n_batches: int) -> float:
    if len(x) < 2 * n_batches:
        return math.nan
    means = np.array([b.mean() for b in np.array_split(x, n_batches)])
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def average_of(G, record: OrbitRecord, h, n_batches: int = 10) -> TimeAverage:
    if len(record.mats) == 0:
        return TimeAverage(math.nan, math.nan, 0.0, record.captured)
    x = np.asarray(h(G, record.mats, record.fiber), dtype=float)
    return TimeAverage(float(x.mean()), _batch_stderr(x, n_batches), record.duration,
                       record.captured)


def time_average(rho: Representation, G: SurfaceGroup, v: UnitTangent, w, h, T: float,
                 dt: float = MAX_DT, direction: int = 1) -> TimeAverage:
    """``(1/T) sum h(state_k) dt`` over the sampled orbit; partial if captured."""
    return average_of(G, orbit(rho, G, v, w, T, dt, direction), h)


# -- basin test -------------------------------------------------------------

def random_fiber(rng: np.random.Generator, n: int = 2) -> np.ndarray:
    """Uniform (unitarily invariant) point of the projective fiber."""
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    return x / np.abs(x).max()


@dataclass
class OrbitResult:
    averages: np.ndarray
    stderrs: np.ndarray
    block_means: np.ndarray
    resampled: int
    forward_cells: np.ndarray | None = None
    backward_cells: np.ndarray | None = None


@dataclass(frozen=True)
class _OrbitJob:
    rho: Representation
    G: SurfaceGroup
    observables: tuple
    T: float
    dt: float
    n_blocks: int
    grid: "Grid | None"
    backward: bool
    max_resample: int

    def __call__(self, seed) -> OrbitResult:
        rng = np.random.default_rng(seed)
        n = int(round(self.T / self.dt))
        for attempt in range(self.max_resample + 1):
            v = liouville_sample(self.G, rng)
            w = random_fiber(rng, self.rho.n)
            rec = orbit(self.rho, self.G, v, w, self.T, self.dt)
            if rec.captured or len(rec.mats) < n:
                continue
            back = None
            if self.backward:
                back = orbit(self.rho, self.G, v, w, self.T, self.dt, direction=-1)
                if back.captured:
                    continue
            break
        else:
            raise CuspCapture(f"orbit captured {self.max_resample + 1} times in a row")
        avgs, errs, blocks = [], [], []
        late = rec.mats[n // 2:], rec.fiber[n // 2:]
        for h in self.observables:
            x = np.asarray(h(self.G, rec.mats, rec.fiber), dtype=float)
            avgs.append(x.mean())
            errs.append(_batch_stderr(x, self.n_blocks))
            y = x[n // 2:]
            blocks.append([b.mean() for b in np.array_split(y, self.n_blocks)])
        res = OrbitResult(np.array(avgs), np.array(errs), np.array(blocks), attempt)
        if self.grid is not None:
            res.forward_cells = self.grid.cells(*late)
            if back is not None:
                res.backward_cells = self.grid.cells(back.mats[n // 2:], back.fiber[n // 2:])
        return res


def run_orbits(job, seeds, workers: int = 1) -> list:
    """Run ``job`` for every seed; results come back in seed order."""
    if workers <= 1:
        return [job(s) for s in seeds]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(job, seeds, chunksize=max(1, len(seeds) // (4 * workers))))


@dataclass
class BasinReport:
    names: list
    averages: np.ndarray  # (n_orbits, n_observables)
    stderrs: np.ndarray
    across: np.ndarray
    within: np.ndarray
    factor: float
    resampled: int
    T: float
    forward: "EmpiricalMeasure | None" = None
    backward: "EmpiricalMeasure | None" = None
    per_observable: list = field(default_factory=list)

    @property
    def means(self) -> np.ndarray:
        return self.averages.mean(axis=0)

    @property
    def mean_stderr(self) -> np.ndarray:
        return self.averages.std(axis=0, ddof=1) / math.sqrt(len(self.averages))

    @property
    def single_statistics(self) -> bool:
        return bool(all(self.per_observable))

    @property
    def verdict(self) -> str:
        return "single SRB statistics" if self.single_statistics else "no single statistics"


def basin_test(rho: Representation, G: SurfaceGroup, observables: Sequence | None = None,
               T: float = 200.0, n_orbits: int = 200, rng=None, seed: int | None = None,
               dt: float = MAX_DT, factor: float = 3.0, n_blocks: int = 10,
               grid: "Grid | None" = None, backward: bool = False, workers: int = 1,
               max_resample: int = 100) -> BasinReport:
    """Do independent (Liouville, uniform fiber) pairs share their time averages?

    Across-orbit dispersion is the standard deviation over orbits of the full
    time averages.  Within-orbit dispersion is the root mean square over
    orbits of the standard deviation of ``n_blocks`` block means taken over
    the late window ``[T/2, T]``.  The verdict is positive when, for every
    observable, across < factor * within.

    Each orbit slot gets its own child seed, so results do not depend on
    ``workers``.  Captured orbits are redrawn inside their slot and counted.
    """
    if observables is None:
        observables = default_observables(G)
    if seed is None:
        rng = rng if rng is not None else np.random.default_rng()
        seed = int(rng.integers(2 ** 63))
    seeds = np.random.SeedSequence(seed).spawn(n_orbits)
    job = _OrbitJob(rho, G, tuple(observables), T, dt, n_blocks, grid, backward, max_resample)
    results = run_orbits(job, seeds, workers)
    avgs = np.array([r.averages for r in results])
    errs = np.array([r.stderrs for r in results])
    blocks = np.array([r.block_means for r in results])  # (orbits, obs, blocks)
    across = avgs.std(axis=0, ddof=1)
    within = np.sqrt(np.mean(blocks.std(axis=2, ddof=1) ** 2, axis=0))
    report = BasinReport([h.name for h in observables], avgs, errs, across, within, factor,
                         sum(r.resampled for r in results), T)
    report.per_observable = [bool(a < factor * b) for a, b in zip(across, within)]
    if grid is not None:
        report.forward = EmpiricalMeasure.from_cells(grid, [r.forward_cells for r in results])
        if backward:
            report.backward = EmpiricalMeasure.from_cells(
                grid, [r.backward_cells for r in results])
    return report


# -- histograms -------------------------------------------------------------

def polar_angle(x: np.ndarray) -> np.ndarray:
    """Polar angle on the Riemann sphere of ``x0 / x1``: 0 at 0, pi at infinity."""
    return 2 * np.arctan2(np.abs(x[:, 0]), np.abs(x[:, 1]))


@dataclass(frozen=True)
class Grid:
    """Product grid: base cells on the disc model times latitude/longitude fiber cells.

    The base point is mapped to ``u = (z - i) / (z + i)`` and binned on a
    ``base_bins`` square grid over [-1, 1]^2.  Longitude cells are centred on
    multiples of ``2 pi / fiber_lon`` so the real circle sits inside cells;
    the two polar latitude rows are single cells (longitude index 0).
    ``fiber_chart`` is "fixed" (the fiber coordinate itself) or
    "trivialized" (``-i g^{-1}(w)``, where the explicit sections sit at the poles).
    """

    base_bins: int = 32
    fiber_lat: int = 8
    fiber_lon: int = 8
    fiber_chart: str = "fixed"

    def __post_init__(self):
        if self.fiber_chart not in ("fixed", "trivialized"):
            raise ValueError(f"unknown fiber chart {self.fiber_chart!r}")
        if min(self.base_bins, self.fiber_lat, self.fiber_lon) < 1:
            raise ValueError("grid sizes must be positive")

    @property
    def shape(self) -> tuple:
        return (self.base_bins, self.base_bins, self.fiber_lat, self.fiber_lon)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def fiber_cells(self, x: np.ndarray):
        theta = polar_angle(x)
        lat = np.minimum((theta / math.pi * self.fiber_lat).astype(int), self.fiber_lat - 1)
        phi = np.angle(x[:, 0] * np.conj(x[:, 1]))
        width = 2 * math.pi / self.fiber_lon
        lon = np.floor((phi + width / 2) / width).astype(int) % self.fiber_lon
        # longitude is rounding noise near the poles, so each polar cap is one cell
        lon[(lat == 0) | (lat == self.fiber_lat - 1)] = 0
        return lat, lon

    def cells(self, mats: np.ndarray, fiber: np.ndarray) -> np.ndarray:
        z = base_points(mats)
        u = (z - 1j) / (z + 1j)
        nb = self.base_bins
        i = np.clip(((u.real + 1) / 2 * nb).astype(int), 0, nb - 1)
        j = np.clip(((u.imag + 1) / 2 * nb).astype(int), 0, nb - 1)
        x = trivialized(mats, fiber) if self.fiber_chart == "trivialized" else fiber
        lat, lon = self.fiber_cells(x)
        return np.ravel_multi_index((i, j, lat, lon), self.shape)


@dataclass
class EmpiricalMeasure:
    grid: Grid
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.grid.size,) or (w < 0).any():
            raise ValueError("weights must be a nonnegative vector over the grid")
        total = w.sum()
        if total <= 0:
            raise ValueError("empty measure")
        self.weights = w / total

    @classmethod
    def from_cells(cls, grid: Grid, cells) -> "EmpiricalMeasure":
        if isinstance(cells, np.ndarray):
            cells = [cells]
        counts = np.zeros(grid.size)
        # merged by addition in the given order, so worker count never matters
        for c in cells:
            counts += np.bincount(c, minlength=grid.size)
        return cls(grid, counts)

    def tv_distance(self, other: "EmpiricalMeasure") -> float:
        if other.grid != self.grid:
            raise ValueError("measures live on different grids")
        return 0.5 * float(np.abs(self.weights - other.weights).sum())

    def fiber_marginal(self) -> np.ndarray:
        return self.weights.reshape(self.grid.shape).sum(axis=(0, 1))

    def base_marginal(self) -> np.ndarray:
        return self.weights.reshape(self.grid.shape).sum(axis=(2, 3))

    def rows(self):
        """Nonzero cells as (base_i, base_j, lat, lon, weight) tuples."""
        nz = np.flatnonzero(self.weights)
        idx = np.unravel_index(nz, self.grid.shape)
        return [(int(a), int(b), int(c), int(d), float(w))
                for a, b, c, d, w in zip(*idx, self.weights[nz])]


def occupation_measure(records, grid: Grid, t0: float = 0.0, t1: float = math.inf):
    """Histogram of the states of ``records`` sampled in the time window [t0, t1)."""
    cells = []
    for rec in records:
        t = rec.dt * np.arange(1, len(rec.mats) + 1)
        keep = (t >= t0) & (t < t1)
        if keep.any():
            cells.append(grid.cells(rec.mats[keep], rec.fiber[keep]))
    return EmpiricalMeasure.from_cells(grid, cells)


def pushforward_measure(rho: Representation, G: SurfaceGroup, section_source: str,
                        n_samples: int, grid: Grid, rng: np.random.Generator,
                        system=None, T: float = 30.0) -> EmpiricalMeasure:
    """Histogram of ``(v, section(v))`` for Liouville-distributed ``v``.

    ``canonical`` uses the exact attracting section ``g(0)`` (this is only
    meaningful for the canonical representation), ``estimator`` the generic
    top-section estimate and ``schottky`` the ping-pong construction for the
    given ``system``.
    """
    arr = _sampler(G).matrices(rng, n_samples)
    mats = [UnitTangent(m) for m in arr] if section_source != "canonical" else []
    if section_source == "canonical":
        fiber = section_points(arr, "attracting")
    elif section_source == "estimator":
        fiber = np.array([top_section_estimate(rho, G, v, T).point.coords for v in mats])
    elif section_source == "schottky":
        from .schottky import schottky_section_for_geodesic

        if system is None:
            raise ValueError("schottky sections need a ping-pong system")
        fiber = np.array([schottky_section_for_geodesic(system, rho, G, v).plus.point.coords
                          for v in mats])
    else:
        raise ValueError(f"unknown section source {section_source!r}")
    return EmpiricalMeasure.from_cells(grid, grid.cells(arr, fiber))
