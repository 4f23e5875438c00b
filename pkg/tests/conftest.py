import pytest

from wstate_polaron.circuit import CircuitParams


@pytest.fixture(scope="session")
def circuit_defaults():
    return CircuitParams()


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
