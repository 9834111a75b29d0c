import os

import pytest

from premsel import data_path

# acceptance outcomes, filled in by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def chain_dir():
    return data_path("chain")


@pytest.fixture(scope="session")
def suite_files():
    d = data_path("suite")
    return sorted(os.path.join(d, f) for f in os.listdir(d) if f.endswith(".p"))


@pytest.fixture
def stub():
    d = os.path.join(os.path.dirname(__file__), "stubs")
    return lambda name: os.path.join(d, name)
