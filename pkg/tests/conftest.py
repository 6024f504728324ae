import numpy as np
import pytest

from qbrach import brachistochrone as bc

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number and summary")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    n, text = marker.args
    ok = _CRITERIA.get(n, (text, True))[1] and call.excinfo is None
    _CRITERIA[n] = (text, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        text, ok = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {text}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


R0_FAMILY = (0.0, 0.0, 0.8)


@pytest.fixture(scope="session")
def family():
    """The six-angle optimal family at the default step."""
    return bc.angle_family(bc.BrachConfig(), R0_FAMILY)


@pytest.fixture(scope="session")
def family_oracle():
    """Same family integrated with dt = 1e-5, recorded every 1e-3."""
    cfg = bc.BrachConfig(dt=1e-5)
    return bc.angle_family(cfg, R0_FAMILY, record_stride=100)
