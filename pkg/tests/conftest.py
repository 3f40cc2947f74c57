import numpy as np
import pytest

from sbm.bernstein import log_power, log_power_neg, relativistic, stable, stable_sum


@pytest.fixture
def families():
    return [stable(1.0), relativistic(1.0), stable_sum(1.0, 0.5), log_power(1.0, 0.5), log_power_neg(1.0, 0.5)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
