import pytest

from lacpair.sequences import LacunarySequence

# lines recorded by test_acceptance, echoed after the run
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def g2():
    return LacunarySequence.geometric(2)


@pytest.fixture(scope="session")
def g32():
    return LacunarySequence.geometric("3/2")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
