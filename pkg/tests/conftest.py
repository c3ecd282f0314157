import numpy as np
import pytest

from asnfit.distribution import AsnParams

ALPHA_PANEL = (-10.0, -5.0, -1.0, 0.0, 1.0, 5.0, 10.0)
SIGMA_PANEL = (0.1, 1.0, 10.0)

_acceptance_key = pytest.StashKey[list]()


def panel(mu=0.7):
    return [AsnParams(mu, s, a) for a in ALPHA_PANEL for s in SIGMA_PANEL]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config.stash.setdefault(_acceptance_key, [])

    def record(label, passed, detail=""):
        lines.append(f"[{'PASS' if passed else 'FAIL'}] {label}" + (f" -- {detail}" if detail else ""))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_acceptance_key, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
