import pytest

from confmodels import catalog


@pytest.fixture(scope="session")
def standard():
    """Every catalog algebra the suites sweep over, keyed by printable name."""
    return {catalog.spec_name(spec): H for spec, H in catalog.standard_algebras()}


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


# Acceptance verdicts, one per criterion, filled in by test_acceptance.py.
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
