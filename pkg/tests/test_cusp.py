import math

import numpy as np
import pytest
from scipy import stats
from scipy.linalg import expm

from riccatiflow.cocycle import check_integrability, evaluate_word
from riccatiflow.cusp import (CuspMonodromySpec, excursion_bounds, excursion_time, exp_tA_theta,
                              in_out_matrix, integrability_dichotomy, integrability_integral,
                              liouville_excursion_sampler, log_norm, monte_carlo_integral,
                              operator_norm, winding)
from riccatiflow.moebius import GeometryError
from riccatiflow.presets import load_representation

# I(eps) for the parabolic n = 2 block, from scipy.integrate.quad at 1e-12
PARABOLIC_QUAD = {4: 2.5044348117589412, 8: 3.408562646985047,
                  15: 3.5391448741055593, 16: 3.540061363452923}


def hyperbolic_exact(lam, eps):
    # 2 pi int_eps^(pi/2) cot(eta) log(lam) d eta
    return 2 * math.pi * math.log(lam) * -math.log(math.sin(eps))


def jordan(theta, n):
    return 1j * theta * np.eye(n) + np.diag(np.ones(n - 1), 1)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("theta", [0.0, 0.7, -2.1])
def test_exp_against_expm(n, theta):
    for t in (0.0, 0.5, -1.3, 4.0):
        assert np.allclose(exp_tA_theta(theta, t, n), expm(t * jordan(theta, n)), atol=1e-12)


def test_exp_group_law():
    a, b = exp_tA_theta(0.4, 1.2, 3), exp_tA_theta(0.4, -0.5, 3)
    assert np.allclose(a @ b, exp_tA_theta(0.4, 0.7, 3), atol=1e-13)
    assert np.allclose(exp_tA_theta(0.4, 0.0, 3), np.eye(3))


def test_in_out_examples():
    par = CuspMonodromySpec.parabolic()
    assert np.allclose(in_out_matrix(par, math.pi / 2), np.eye(2), atol=1e-15)
    eta = math.atan(1 / math.pi)  # winding 2 pi
    assert np.allclose(in_out_matrix(par, eta), [[1, 1], [0, 1]], atol=1e-12)
    hyp = CuspMonodromySpec.hyperbolic(3.0)
    assert np.allclose(in_out_matrix(hyp, math.pi / 4), np.diag([3.0, 1 / 3]))
    with pytest.raises(GeometryError):
        in_out_matrix(par, 0.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        CuspMonodromySpec.hyperbolic(1.0)
    with pytest.raises(ValueError):
        CuspMonodromySpec(1, "parabolic")
    with pytest.raises(ValueError):
        CuspMonodromySpec(2, "elliptic")
    with pytest.raises(ValueError):
        CuspMonodromySpec.hyperbolic(2.0, conjugator=np.zeros((2, 2)))


def test_operator_norm_closed_form():
    m = np.random.default_rng(0).normal(size=(50, 2, 2))
    assert np.allclose(operator_norm(m), np.linalg.svd(m, compute_uv=False)[:, 0], rtol=1e-12)


def test_log_norm_matches_matrices():
    rng = np.random.default_rng(1)
    c = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    specs = [CuspMonodromySpec.parabolic(0.3, 3), CuspMonodromySpec.hyperbolic(2.5, 3, c)]
    eta = np.concatenate([rng.uniform(0.05, math.pi / 2, 20), -rng.uniform(0.05, 1.5, 5)])
    for spec in specs:
        direct = [math.log(np.linalg.norm(in_out_matrix(spec, e), 2)) for e in eta]
        assert np.allclose(log_norm(spec, eta), direct, rtol=1e-9, atol=1e-12)
    # no overflow deep in the cusp
    assert np.isfinite(log_norm(specs[1], [1e-8])).all()


def test_hyperbolic_lower_bound():
    rng = np.random.default_rng(2)
    c = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    spec = CuspMonodromySpec.hyperbolic(3.0, conjugator=c)
    k = spec.conditioning
    for eta in rng.uniform(0.01, math.pi / 2, 200):
        a = float(winding(eta))
        assert np.linalg.norm(in_out_matrix(spec, eta), 2) >= k * 3.0 ** (abs(a) / 2) * (1 - 1e-12)
    assert np.linalg.norm(in_out_matrix(spec, math.pi / 4), 2) >= 3 * k


@pytest.mark.parametrize("n", [2, 3])
def test_parabolic_polynomial_bound(n):
    spec = CuspMonodromySpec.parabolic(1.1, n)
    eta = np.geomspace(1e-6, math.pi / 2, 200)
    t = np.abs(winding(eta)) / (2 * math.pi)
    assert np.all(np.exp(log_norm(spec, eta)) <= n * (1 + t) ** (n - 1))


def test_parabolic_integral_against_quad():
    spec = CuspMonodromySpec.parabolic()
    for k, ref in PARABOLIC_QUAD.items():
        assert math.isclose(integrability_integral(spec, 2.0 ** -k), ref, rel_tol=1e-5)


def test_hyperbolic_integral_closed_form():
    for lam in (1.5, 3.0, 10.0):
        spec = CuspMonodromySpec.hyperbolic(lam)
        for k in (4, 10, 16):
            assert math.isclose(integrability_integral(spec, 2.0 ** -k),
                                hyperbolic_exact(lam, 2.0 ** -k), rel_tol=1e-5)


def test_integral_theta_independent():
    vals = [integrability_integral(CuspMonodromySpec.parabolic(th, 3), 2.0 ** -10)
            for th in (0.0, 1.0, 2.5)]
    assert max(vals) - min(vals) < 1e-12 * max(vals)


def test_integral_rejects_bad_eps():
    with pytest.raises(ValueError):
        integrability_integral(CuspMonodromySpec.parabolic(), 0.0)
    with pytest.raises(ValueError):
        integrability_integral(CuspMonodromySpec.parabolic(), 2.0)


def test_dichotomy_verdicts():
    par = integrability_dichotomy(CuspMonodromySpec.parabolic())
    assert par.integrable
    assert abs(par.values[-1] - par.values[-2]) < 1e-3
    assert len(par.eps) == 13
    hyp = integrability_dichotomy(CuspMonodromySpec.hyperbolic(3.0))
    assert not hyp.integrable and hyp.r2 > 0.99
    assert math.isclose(hyp.slope, 2 * math.pi * math.log(3), rel_tol=1e-3)
    assert integrability_dichotomy(CuspMonodromySpec.parabolic(0.5, 3)).integrable


def test_from_matrix():
    assert CuspMonodromySpec.from_matrix([[1, 2], [0, 1]]).kind == "parabolic"
    rot = CuspMonodromySpec.from_matrix([[math.cos(1), -math.sin(1)], [math.sin(1), math.cos(1)]])
    assert rot.kind == "parabolic"
    h = CuspMonodromySpec.from_matrix(np.diag([5.0, 0.2]))
    assert h.kind == "hyperbolic" and math.isclose(h.lam, 5.0)


@pytest.mark.parametrize("name", ["canonical", "schottky", "unitary-diagonal", "hyperbolic-cusp"])
def test_verdicts_match_eigenvalue_criterion(sphere, name):
    rho = load_representation(name, sphere)
    report = check_integrability(rho, sphere)
    for cusp in report.cusps:
        spec = CuspMonodromySpec.from_matrix(evaluate_word(rho, cusp.word).matrix)
        assert integrability_dichotomy(spec, range(4, 13)).integrable == cusp.integrable


def test_eta_marginal_ks():
    _, eta, t = liouville_excursion_sampler(np.random.default_rng(3), 100_000)
    # density cos(eta) on (0, pi/2] has CDF sin(eta)
    assert stats.kstest(eta, np.sin).pvalue > 0.01
    assert np.all((t >= 0) & (t <= excursion_time(eta)))


def test_monte_carlo_agrees():
    rng = np.random.default_rng(4)
    for spec, ref in ((CuspMonodromySpec.parabolic(), PARABOLIC_QUAD[4]),
                      (CuspMonodromySpec.hyperbolic(3.0), hyperbolic_exact(3.0, 2.0 ** -4))):
        est, se = monte_carlo_integral(spec, 2.0 ** -4, rng, 200_000)
        assert abs(est - ref) < 3 * se


def test_excursion_sandwich():
    _, eta, _ = liouville_excursion_sampler(np.random.default_rng(5), 10_000)
    eta = eta * np.where(np.random.default_rng(6).random(eta.size) < 0.5, -1, 1)
    lo, hi = excursion_bounds(eta)
    t = excursion_time(eta)
    assert np.count_nonzero((t < lo) | (t > hi)) == 0
    assert excursion_time(math.pi / 2) == pytest.approx(0.0, abs=1e-15)
