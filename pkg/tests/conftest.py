from pathlib import Path

import pytest

import hyperpctl
from hyperpctl import load_model

DATA = Path(hyperpctl.__file__).parent / "data"


def data_path(name):
    return DATA / name


@pytest.fixture(scope="session")
def fig2():
    return load_model(DATA / "fig2.dtmc")


@pytest.fixture(scope="session")
def qbf2():
    return load_model(DATA / "qbf2.dtmc")


@pytest.fixture(scope="session")
def scheduler():
    return load_model(DATA / "scheduler.dtmc")


@pytest.fixture(scope="session")
def rr():
    return load_model(DATA / "randomized_response.dtmc")


_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record the PASS/FAIL line of an acceptance criterion, then assert it."""
    recorded = []

    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        _CRITERIA[number] = line
        recorded.append(number)
        print(line)
        assert ok, line

    yield record
    if not recorded:
        _CRITERIA[request.node.name] = f"FAIL {request.node.name}: raised before reporting"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=str):
        terminalreporter.write_line(_CRITERIA[key])
