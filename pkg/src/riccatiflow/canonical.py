"""Exact sections and the homothety law for the canonical representation.

When the monodromy is the covering representation itself, everything is
explicit.  For a unit tangent ``g``:

* ``sigma_plus(v) = g(inf)`` and ``sigma_minus(v) = g(0)`` are the forward
  and backward ideal endpoints of its geodesic,
* ``diagonal_section(v) = g(i)`` is the base point seen in the fiber,
* the chart sending ``sigma_minus -> 0``, ``diagonal -> 1``,
  ``sigma_plus -> inf`` is ``w -> -i g^{-1}(w)``.

Crossing a side replaces ``g`` by ``G g`` and the fiber point ``w`` by
``G w``, so the chart coordinate only feels the flow part and evolves as
``c_t = e^{-t} c_0``.  In forward time fiber points therefore converge to
``sigma_minus``: with the covariant transport the backward endpoint is the
section of largest expansion (the attractor) and the forward endpoint is
the section of largest contraction.  ``attracting_section`` and
``repelling_section`` name these roles explicitly.
"""

from __future__ import annotations

import math

import numpy as np

from .cocycle import Representation, foliated_flow
from .moebius import (INFINITY, ProjectivePoint, SpherePoint, apply, as_point,
                      map_from_three_points, ProjectiveMap)
from .surface import SurfaceGroup, UnitTangent


def canonical_representation(G: SurfaceGroup) -> Representation:
    return Representation.canonical(G)


def sigma_plus(v: UnitTangent) -> SpherePoint:
    """Forward ideal endpoint ``g(inf)``."""
    m = v.matrix
    return ProjectivePoint((m[0, 0], m[1, 0]))


def sigma_minus(v: UnitTangent) -> SpherePoint:
    """Backward ideal endpoint ``g(0)``."""
    m = v.matrix
    return ProjectivePoint((m[0, 1], m[1, 1]))


def diagonal_section(v: UnitTangent) -> SpherePoint:
    return ProjectivePoint.from_affine(v.base_point)


def attracting_section(v: UnitTangent) -> SpherePoint:
    """Section of largest expansion of the canonical cocycle."""
    return sigma_minus(v)


def repelling_section(v: UnitTangent) -> SpherePoint:
    """Section of largest contraction of the canonical cocycle."""
    return sigma_plus(v)


def trivialization_map(v: UnitTangent) -> ProjectiveMap:
    return map_from_three_points(sigma_minus(v), diagonal_section(v), sigma_plus(v))


def trivialization_coordinate(v: UnitTangent, w) -> complex:
    """Affine coordinate of ``w`` in the chart sigma_minus, diagonal, sigma_plus -> 0, 1, inf."""
    return apply(trivialization_map(v), as_point(w)).affine()


def fast_coordinate(v: UnitTangent, w) -> complex:
    """Closed form ``-i g^{-1}(w)`` of the same coordinate."""
    (a, b), (c, d) = v.matrix
    w0, w1 = as_point(w).coords
    num = d * w0 - b * w1
    den = -c * w0 + a * w1
    if den == 0:
        return INFINITY
    return complex(-1j * num / den)


def contraction_check(v: UnitTangent, w, t: float, G: SurfaceGroup):
    """Return ``(c_t, e^{-t} c_0, |c_t - e^{-t} c_0|)`` along the foliated flow."""
    w = as_point(w)
    c0 = trivialization_coordinate(v, w)
    vt, wt, _ = foliated_flow(Representation.canonical(G), G, v, w, t)
    ct = trivialization_coordinate(vt, wt)
    rhs = math.exp(-t) * c0
    err = abs(ct - rhs)
    if math.isnan(err):
        err = 0.0 if (math.isinf(abs(ct)) and math.isinf(abs(rhs))) else math.inf
    return ct, rhs, err


def coordinate_rows(G: SurfaceGroup, rng: np.random.Generator, n: int, times):
    """Maximum contraction-law error over ``n`` random pairs for each time."""
    from .moebius import random_point
    from .surface import liouville_sample

    vs = liouville_sample(G, rng, n)
    ws = [random_point(rng) for _ in range(n)]
    rows = []
    for t in times:
        errs = [contraction_check(v, w, t, G)[2] for v, w in zip(vs, ws)]
        rows.append((float(t), float(max(errs))))
    return rows
