import numpy as np
import pytest

from lbtstop import GammaFading, LbtParams


@pytest.fixture
def defaults():
    """Parameters of the reference experiment (q=32, 12 ms, 20 us, tau=0.1, 1 MHz)."""
    return LbtParams(q=32, t_ecca=20e-6, t_cot_max=12e-3, tau=0.1, p=0.5, bandwidth=1e6)


@pytest.fixture
def rayleigh():
    return GammaFading(k=1.0, snr_db=10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record a criterion verdict; all verdicts are echoed after the run."""

    def record(number, name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {name}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
