import pytest

from mmgeom.zoo import generate


@pytest.fixture(scope="session")
def interval_fine():
    return generate("interval", h=1e-3)


@pytest.fixture(scope="session")
def interval():
    return generate("interval", h=0.01)


@pytest.fixture(scope="session")
def tripod():
    return generate("star", d=3, h=0.01)


@pytest.fixture(scope="session")
def cycle():
    return generate("cycle", h=0.01)


@pytest.fixture(scope="session")
def square():
    return generate("grid", h=0.02)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
