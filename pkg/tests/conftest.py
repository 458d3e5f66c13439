import math

import numpy as np
import pytest

from oimlab.ising import IsingInstance


@pytest.fixture
def pair():
    """Two spins with W_01 = +1."""
    return IsingInstance.from_upper(2, [(0, 1, 1.0)])


@pytest.fixture
def frustrated_triangle():
    return IsingInstance.from_upper(3, [(0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)])


@pytest.fixture
def ferro_triangle():
    return IsingInstance.from_upper(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])


@pytest.fixture
def single():
    return IsingInstance(np.zeros((1, 1)))


@pytest.fixture
def write_graph(tmp_path):
    def _write(text, name="g.txt"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return _write


HALF_PI = math.pi / 2


# -- acceptance reporting ---------------------------------------------------

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when not in ("setup", "call"):
        return
    number, title = mark.args
    if report.when == "call" or report.failed:
        _criteria[number] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, verdict = _criteria[number]
        terminalreporter.write_line(f"criterion {number} [{verdict}] {title}")
