import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_stochastic(rng, n, positive=True):
    A = rng.dirichlet(np.ones(n), size=n)
    if positive:
        A = 0.9 * A + 0.1 / n
    return A


_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when == "teardown":
        return
    k, title = mark.args
    ok = _CRITERIA.get(k, (title, True))[1] and not rep.failed
    if rep.when == "call" or rep.failed or rep.skipped:
        _CRITERIA[k] = (title, ok and not rep.skipped)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        title, ok = _CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {title}")
