import numpy as np
import pytest

from zerofpr import kernels

BACKENDS = kernels.backends()


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Route every kernel call through one backend for the duration of a test."""
    mod = BACKENDS[request.param]
    for name in kernels._NAMES:
        monkeypatch.setattr(kernels, name, getattr(mod, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    detail = dict(item.user_properties).get("detail", "")
    item.config.stash[ACCEPTANCE].append((marker.args[0], rep.outcome, rep.duration, detail))


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for cid, outcome, duration, detail in sorted(results):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{cid:<6} {verdict}  {duration:7.1f}s  {detail}")
