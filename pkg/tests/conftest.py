import numpy as np
import pytest

from membrane_sta import PulseParams, SystemParams, build_schedule


@pytest.fixture
def system():
    return SystemParams()


@pytest.fixture
def default_pulse():
    return PulseParams.from_ratios(1.0, 0.1)


@pytest.fixture
def default_schedule(default_pulse, system):
    return build_schedule(default_pulse, system)


@pytest.fixture
def rng():
    return np.random.default_rng(20181018)


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash[ACCEPTANCE_LINES]

    def record(label, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
