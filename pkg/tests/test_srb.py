import math

import numpy as np
import pytest
from scipy.integrate import quad

from riccatiflow.srb import (BaseBump, Constant, EmpiricalMeasure, FiberBin, Grid, SectionDistance,
                             basin_test, default_observables, occupation_measure, orbit,
                             polar_angle, pushforward_measure, random_fiber, section_points,
                             time_average, trivialized)
from riccatiflow.surface import UnitTangent, flow_on_surface, liouville_sample

COARSE = Grid(4, 4, 4, "trivialized")


def pole_distance_std():
    # FS distance to a pole for a uniform point: polar angle / 2 with density sin(theta) / 2
    m1 = quad(lambda th: th / 2 * math.sin(th) / 2, 0, math.pi)[0]
    m2 = quad(lambda th: (th / 2) ** 2 * math.sin(th) / 2, 0, math.pi)[0]
    return math.sqrt(m2 - m1 * m1)


@pytest.fixture(scope="module")
def canonical_orbits(sphere, canonical):
    rng = np.random.default_rng(7)
    recs = []
    while len(recs) < 40:
        rec = orbit(canonical, sphere, liouville_sample(sphere, rng), random_fiber(rng), 200)
        if not rec.captured:
            recs.append(rec)
    return recs


def test_constant_average(sphere, canonical):
    rng = np.random.default_rng(0)
    avg = time_average(canonical, sphere, liouville_sample(sphere, rng), random_fiber(rng),
                       Constant(), 20)
    assert avg.value == 1.0 and avg.stderr == 0.0
    assert avg.duration == pytest.approx(20)


def test_orbit_validation(sphere, canonical):
    v = liouville_sample(sphere, np.random.default_rng(0))
    with pytest.raises(ValueError):
        orbit(canonical, sphere, v, [1, 0], 10, dt=0.5)


def test_fiber_converges_to_attracting_section(canonical_orbits):
    for rec in canonical_orbits[:10]:
        h = SectionDistance("attracting", windowed=False)(None, rec.mats, rec.fiber)
        assert h[-1] < 1e-8
        assert h[len(h) // 2:].max() < 1e-4


def test_backward_orbit_avoids_attracting_section(sphere, canonical):
    rng = np.random.default_rng(8)
    h = SectionDistance("attracting", windowed=False)
    for _ in range(5):
        v, w = liouville_sample(sphere, rng), random_fiber(rng)
        back = orbit(canonical, sphere, v, w, 50, direction=-1)
        if back.captured:
            continue
        # backwards the fiber is pulled to the other endpoint
        assert h(None, back.mats, back.fiber)[len(back.mats) // 2:].min() > 1e-3
        rev = SectionDistance("repelling", windowed=False)
        assert rev(None, back.mats, back.fiber)[-1] < 1e-8


def test_backward_orbit_retraces(sphere, canonical):
    v = liouville_sample(sphere, np.random.default_rng(9))
    back = orbit(canonical, sphere, v, [1, 0], 5, direction=-1)
    start = UnitTangent(back.mats[-1])
    again, _ = flow_on_surface(start, 5.0, sphere)
    # equal in PSL(2, R), i.e. up to sign
    assert min(np.abs(again.matrix - s * v.matrix).max() for s in (1, -1)) < 1e-9


def test_trivialized_sections_at_poles(canonical_orbits):
    mats = canonical_orbits[0].mats
    top = polar_angle(trivialized(mats, section_points(mats, "attracting")))
    bot = polar_angle(trivialized(mats, section_points(mats, "repelling")))
    assert np.allclose(top, 0, atol=1e-12)
    assert np.allclose(bot, math.pi, atol=1e-12)


def test_observable_names(sphere):
    names = [h.name for h in default_observables(sphere)]
    assert names == ["fs_diagonal", "fs_pole", "bin_0.000_1.571", "bump"]
    with pytest.raises(ValueError):
        section_points(np.eye(2)[None], "sideways")


def test_bump_peaks_at_center(sphere):
    mats = np.array([np.eye(2), np.diag([2.0, 0.5])])
    vals = BaseBump(1j)(sphere, mats, np.ones((2, 2)))
    assert vals[0] == pytest.approx(1.0) and vals[1] < vals[0]


def test_unitary_keeps_initial_dispersion(sphere, unitary_rep):
    h = SectionDistance("pole", windowed=False)
    rep = basin_test(unitary_rep, sphere, [h], T=100, n_orbits=60, seed=3)
    assert not rep.single_statistics
    assert rep.verdict == "no single statistics"
    assert rep.within[0] < 1e-12
    # across-orbit spread is the spread of the initial fiber points
    assert rep.across[0] == pytest.approx(pole_distance_std(), rel=0.3)


def test_canonical_single_statistics(sphere, canonical):
    rep = basin_test(canonical, sphere, T=200, n_orbits=30, seed=5)
    assert rep.single_statistics, rep.across / rep.within


def test_seed_subensembles_agree(sphere, canonical):
    a = basin_test(canonical, sphere, T=100, n_orbits=20, seed=1)
    b = basin_test(canonical, sphere, T=100, n_orbits=20, seed=2)
    se = np.hypot(a.mean_stderr, b.mean_stderr)
    assert np.all(np.abs(a.means - b.means) < 3 * se)


def test_workers_do_not_change_results(sphere, canonical):
    grid = Grid(4, 4, 4)
    one = basin_test(canonical, sphere, T=20, n_orbits=6, seed=4, grid=grid)
    two = basin_test(canonical, sphere, T=20, n_orbits=6, seed=4, grid=grid, workers=2)
    assert np.array_equal(one.averages, two.averages)
    assert np.array_equal(one.forward.weights, two.forward.weights)


def test_real_fiber_stays_on_real_cells(sphere, canonical):
    grid = Grid(4, 4, 8, "fixed")
    rng = np.random.default_rng(10)
    recs = [orbit(canonical, sphere, liouville_sample(sphere, rng), [rng.normal(), 1.0], 30)]
    marg = occupation_measure(recs, grid).fiber_marginal()
    assert marg[:, [0, 4]].sum() == pytest.approx(1.0)


def test_measure_normalization():
    grid = Grid(2, 2, 2)
    m = EmpiricalMeasure.from_cells(grid, [np.array([0, 1, 1]), np.array([3])])
    assert m.weights.sum() == pytest.approx(1.0)
    assert m.tv_distance(m) == 0
    assert len(m.rows()) == 3
    with pytest.raises(ValueError):
        EmpiricalMeasure(grid, np.zeros(grid.size))
    with pytest.raises(ValueError):
        m.tv_distance(EmpiricalMeasure(Grid(3, 2, 2), np.ones(Grid(3, 2, 2).size)))
    with pytest.raises(ValueError):
        Grid(fiber_chart="polar")


def test_pushforward_sample_size_stable(sphere, canonical):
    a = pushforward_measure(canonical, sphere, "canonical", 100_000, COARSE, np.random.default_rng(1))
    b = pushforward_measure(canonical, sphere, "canonical", 400_000, COARSE, np.random.default_rng(2))
    assert a.tv_distance(b) < 0.05


def test_occupation_matches_pushforward(sphere, canonical, canonical_orbits):
    push = pushforward_measure(canonical, sphere, "canonical", 400_000, COARSE,
                               np.random.default_rng(2))
    occ = occupation_measure(canonical_orbits, COARSE, 100, 200)
    assert push.tv_distance(occ) < 0.1


def test_occupation_windows_agree(canonical_orbits):
    early = occupation_measure(canonical_orbits, COARSE, 50, 100)
    late = occupation_measure(canonical_orbits, COARSE, 100, 200)
    assert early.tv_distance(late) < 0.1


def test_pushforward_sources_agree(sphere, schottky_rep, pingpong):
    grid = Grid(2, 4, 4, "fixed")
    a = pushforward_measure(schottky_rep, sphere, "estimator", 300, grid, np.random.default_rng(3))
    b = pushforward_measure(schottky_rep, sphere, "schottky", 300, grid, np.random.default_rng(3),
                            system=pingpong)
    # sections agree to 1e-5, so only points on a cell boundary can move
    assert a.tv_distance(b) < 0.02
    with pytest.raises(ValueError):
        pushforward_measure(schottky_rep, sphere, "schottky", 3, grid, np.random.default_rng(3))


def test_forward_backward_measures_differ(sphere, canonical):
    rep = basin_test(canonical, sphere, T=60, n_orbits=10, seed=6, grid=COARSE, backward=True)
    assert rep.forward.tv_distance(rep.backward) > 0.5


def test_canonical_pushforward_on_real_circle(sphere, canonical):
    grid = Grid(4, 4, 8, "fixed")
    push = pushforward_measure(canonical, sphere, "canonical", 10_000, grid,
                               np.random.default_rng(12))
    marg = push.fiber_marginal()
    # longitude cells 0 and 4 are centred on the positive and negative real axis
    assert marg[:, [0, 4]].sum() == pytest.approx(1.0)
    assert marg[:, 4].sum() > 0.1 and marg[1:-1, 0].sum() > 0.1
