import math

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


def within_3sigma(successes, n, p):
    """Binomial 3-sigma acceptance band around ``p``."""
    sigma = math.sqrt(p * (1 - p) / n)
    return abs(successes / n - p) <= 3 * sigma


ACCEPTANCE_LINES = []


def accept(criterion, label, ok, detail=""):
    """Record one acceptance line for the terminal summary, then assert."""
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] criterion {criterion}: {label}" + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {criterion}: {label} {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
