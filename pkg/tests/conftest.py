import pytest

from wdwkit import checks


def module_checks(module):
    return [c["id"] for c in checks.catalog() if c["module"] == module]


def assert_check(check_id):
    rec = checks.run_check(check_id)
    assert rec["pass"], rec


@pytest.fixture(scope="session")
def run_check():
    return checks.run_check
