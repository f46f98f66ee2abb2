import cmath
import math

import numpy as np

from riccatiflow.canonical import (attracting_section, contraction_check, coordinate_rows,
                                   diagonal_section, fast_coordinate, repelling_section,
                                   sigma_minus, sigma_plus, trivialization_coordinate)
from riccatiflow.cocycle import Representation, foliated_flow
from riccatiflow.moebius import (INFINITY, ProjectiveMap, ProjectivePoint, apply,
                                 fubini_study_distance, random_point)
from riccatiflow.surface import UnitTangent, geodesic_flow_h, liouville_sample


def random_sl2r(rng):
    m = rng.normal(size=(2, 2))
    if np.linalg.det(m) < 0:
        m[:, 0] *= -1
    return m / math.sqrt(np.linalg.det(m))


def random_tangent(rng):
    return UnitTangent(random_sl2r(rng))


def close(p, q, tol=1e-9):
    return fubini_study_distance(p, q) <= tol


def test_identity_vector_sections():
    v = UnitTangent.identity()
    assert sigma_plus(v) == ProjectivePoint.from_affine(INFINITY)
    assert sigma_minus(v) == ProjectivePoint.from_affine(0)
    assert diagonal_section(v) == ProjectivePoint.from_affine(1j)
    assert attracting_section(v) == sigma_minus(v)
    assert repelling_section(v) == sigma_plus(v)


def test_sections_equivariant_under_real_maps():
    rng = np.random.default_rng(1)
    for _ in range(100):
        v = random_tangent(rng)
        t = random_sl2r(rng)
        tv = UnitTangent(t @ v.matrix)
        T = ProjectiveMap(t)
        assert close(sigma_plus(tv), apply(T, sigma_plus(v)))
        assert close(sigma_minus(tv), apply(T, sigma_minus(v)))
        assert close(diagonal_section(tv), apply(T, diagonal_section(v)))


def test_sections_flow_invariant():
    rng = np.random.default_rng(2)
    for _ in range(100):
        v = random_tangent(rng)
        vt = geodesic_flow_h(v, rng.uniform(-5, 5))
        assert close(sigma_plus(vt), sigma_plus(v), 1e-12)
        assert close(sigma_minus(vt), sigma_minus(v), 1e-12)


def test_sections_real_distinct_and_disjoint_from_diagonal():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        v = random_tangent(rng)
        p, m, d = sigma_plus(v), sigma_minus(v), diagonal_section(v)
        for s in (p, m):
            z = s.affine()
            assert z == INFINITY or abs(z.imag) < 1e-12
        assert fubini_study_distance(p, m) > 1e-9
        assert d.affine().imag > 0
        assert fubini_study_distance(d, p) > 1e-9 and fubini_study_distance(d, m) > 1e-9


def test_trivialization_coordinate_values():
    rng = np.random.default_rng(4)
    for _ in range(100):
        v = random_tangent(rng)
        assert cmath.isclose(trivialization_coordinate(v, diagonal_section(v)), 1, abs_tol=1e-9)
        assert abs(trivialization_coordinate(v, sigma_minus(v))) < 1e-9
        assert trivialization_coordinate(v, sigma_plus(v)) == INFINITY or \
            abs(trivialization_coordinate(v, sigma_plus(v))) > 1e8
        w = random_point(rng)
        a, b = trivialization_coordinate(v, w), fast_coordinate(v, w)
        assert cmath.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)


def test_contraction_law(sphere):
    rng = np.random.default_rng(5)
    for v in liouville_sample(sphere, rng, 50):
        w = random_point(rng)
        assert contraction_check(v, w, 0.0, sphere)[2] == 0
        ct, rhs, err = contraction_check(v, w, 5.0, sphere)
        assert err < 1e-8 * max(1.0, abs(rhs))
        ct, rhs, err = contraction_check(v, diagonal_section(v), 3.0, sphere)
        assert cmath.isclose(ct, math.exp(-3.0), rel_tol=1e-9)


def test_contraction_law_on_torus(torus):
    rng = np.random.default_rng(6)
    for v in liouville_sample(torus, rng, 50):
        ct, rhs, err = contraction_check(v, random_point(rng), 5.0, torus)
        assert err < 1e-8 * max(1.0, abs(rhs))


def test_north_south(sphere):
    # fiber points other than the repelling section are drawn to the attracting one
    rho = Representation.canonical(sphere)
    rng = np.random.default_rng(7)
    for v in liouville_sample(sphere, rng, 100):
        w = random_point(rng)
        assert fubini_study_distance(w, repelling_section(v)) > 1e-3
        vt, wt, _ = foliated_flow(rho, sphere, v, w, 20.0)
        assert fubini_study_distance(wt, attracting_section(vt)) < 1e-7
        vb, wb, _ = foliated_flow(rho, sphere, v, w, -20.0)
        assert fubini_study_distance(wb, repelling_section(vb)) < 1e-7


def test_coordinate_rows(sphere):
    rows = coordinate_rows(sphere, np.random.default_rng(8), 10, [1.0, 5.0])
    assert [r[0] for r in rows] == [1.0, 5.0]
    assert all(r[1] < 1e-8 for r in rows)
