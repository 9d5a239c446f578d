import numpy as np
import pytest

from ekmanqg.pressure import PressureLaw


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def law2():
    return PressureLaw(2.0, 1.0)


ACCEPTANCE = []


@pytest.fixture
def report():
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    def _report(n, ok, detail):
        line = f"acceptance {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: s.split()[1].rstrip(":").zfill(3)):
            terminalreporter.write_line(line)
