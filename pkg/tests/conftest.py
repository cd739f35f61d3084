import pytest

from brody_forge.curves import build_curve
from brody_forge.products import NodeSystem


@pytest.fixture(scope="session")
def default_nodes():
    return NodeSystem.geometric(4.0, 4.0, 12)


@pytest.fixture(scope="session")
def punctured():
    return build_curve("punctured")


@pytest.fixture(scope="session")
def plane():
    return build_curve("plane")


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(LINES):
            terminalreporter.write_line(LINES[number])
