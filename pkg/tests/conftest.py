import numpy as np
import pytest

from hamform import zoo


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=zoo.NAMES)
def entry(request):
    return zoo.build(request.param)


def rosenzweig_variants():
    return [zoo.rosenzweig(holling=k) for k in (1, 2, 3)]


ACCEPTANCE = pytest.StashKey[list]()
STARTED = pytest.StashKey[float]()
SUITE_BUDGET_S = 180.0


def pytest_configure(config):
    import time

    config.stash[ACCEPTANCE] = []
    config.stash[STARTED] = time.perf_counter()


@pytest.fixture
def acceptance_log(request, capsys):
    """Record and immediately print one PASS/FAIL line per criterion."""
    log = request.config.stash[ACCEPTANCE]

    def record(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        log.append(line)
        with capsys.disabled():
            print("\n" + line)
        return passed

    return record


def _elapsed(config):
    import time

    return time.perf_counter() - config.stash[STARTED]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
    elapsed = _elapsed(config)
    ok = elapsed < SUITE_BUDGET_S
    terminalreporter.write_line(
        f"criterion 10: {'PASS' if ok else 'FAIL'}  full test session took {elapsed:.1f} s "
        f"(budget {SUITE_BUDGET_S:.0f} s)"
    )


def pytest_sessionfinish(session, exitstatus):
    if session.config.stash.get(ACCEPTANCE, None) and _elapsed(session.config) >= SUITE_BUDGET_S:
        session.exitstatus = 1
