import pytest

from rangecorr.special_fn import build_phi_table

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def phi_table():
    return build_phi_table(0.001)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
