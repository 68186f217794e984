import numpy as np
import pytest

from synclevy import MEDistribution


@pytest.fixture(scope="session")
def expo():
    return MEDistribution.exponential(1.0)


@pytest.fixture(scope="session")
def erlang2():
    return MEDistribution.erlang(2, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance lines collected by tests/test_acceptance.py, echoed after the run
ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    def report(num, title, passed, detail, seconds):
        line = f"criterion {num:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail} [{seconds:.1f}s]"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
