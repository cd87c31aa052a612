import re

import pytest

from shapes import square_cone, triangle_cone, wedge
from conelab.families import lorentz

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")
_outcomes = {}


@pytest.fixture
def lorentz3():
    return lorentz(3)


@pytest.fixture
def lorentz4():
    return lorentz(4)


@pytest.fixture
def square():
    return square_cone()


@pytest.fixture
def triangle():
    return triangle_cone()


@pytest.fixture
def wedge2():
    return wedge()


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if m is None:
        return
    key = int(m.group(1))
    failed = report.failed or (report.when == "call" and report.outcome != "passed")
    if failed:
        _outcomes[key] = "FAIL"
    elif report.when == "call":
        _outcomes.setdefault(key, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_outcomes):
        terminalreporter.write_line(f"criterion {key:2d}: {_outcomes[key]}")
