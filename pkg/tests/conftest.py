import time

import numpy as np
import pytest

from riccatiflow.cocycle import Representation
from riccatiflow.presets import load_representation, load_surface
from riccatiflow.schottky import preset_system

SURFACES = ("thrice-punctured-sphere", "punctured-torus")

_criteria = {}
_session_start = time.perf_counter()


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    number, title = crit
    ok, _ = _criteria.get(number, (True, title))
    _criteria[number] = (ok and report.outcome == "passed", title)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_criteria):
        ok, title = _criteria[number]
        tr.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
    tr.write_line(f"session wall time: {time.perf_counter() - _session_start:.1f} s")


@pytest.fixture(scope="session")
def sphere():
    return load_surface("thrice-punctured-sphere")


@pytest.fixture(scope="session")
def torus():
    return load_surface("punctured-torus")


@pytest.fixture(scope="session", params=SURFACES)
def surface(request):
    return load_surface(request.param)


@pytest.fixture(scope="session")
def canonical(sphere):
    return Representation.canonical(sphere)


@pytest.fixture(scope="session")
def schottky_rep(sphere):
    return load_representation("schottky", sphere)


@pytest.fixture(scope="session")
def unitary_rep(sphere):
    return load_representation("unitary-diagonal", sphere)


@pytest.fixture(scope="session")
def pingpong():
    return preset_system()


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)
