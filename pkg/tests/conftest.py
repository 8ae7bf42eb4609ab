import pytest

from lossprobe.cli import default_model_path
from lossprobe.stpa import load_model


@pytest.fixture(scope="session")
def dlcu():
    return load_model(default_model_path())


@pytest.fixture(scope="session")
def dlcu_text():
    with open(default_model_path(), encoding="utf-8") as fh:
        return fh.read()


# acceptance criteria outcomes, filled by test_acceptance and echoed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
