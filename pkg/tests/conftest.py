import numpy as np
import pytest

from hrkl.series import make_series


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sine_series():
    t = np.linspace(0, 1, 40)
    y = np.sin(2 * np.pi * 4 * t) + 0.05 * np.random.default_rng(0).normal(size=t.size)
    return make_series("sine", t, y)


@pytest.fixture
def line_series():
    t = np.linspace(0, 1, 40)
    y = 2.0 * t + 0.05 * np.random.default_rng(1).normal(size=t.size)
    return make_series("line", t, y)


ACCEPTANCE = {}


def record(criterion: str, passed: bool, detail: str) -> None:
    """Store one acceptance line; printed in the terminal summary."""
    ACCEPTANCE[criterion] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0].lstrip("C"))):
        passed, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
