import pytest

from stefan_front import catalog

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def logistic():
    return catalog("logistic")


@pytest.fixture(scope="session")
def bistable():
    return catalog("cubic_bistable", theta=0.25)


@pytest.fixture(scope="session")
def combustion():
    return catalog("combustion", theta=0.25)


@pytest.fixture(scope="session")
def zero_reaction():
    return catalog("custom", coeffs=[0.0])


@pytest.fixture
def acceptance_record():
    """Collect one pass/fail line per acceptance criterion for the summary."""

    def record(criterion: int, passed: bool, detail: str):
        _ACCEPTANCE_LINES.append(
            f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
