import pytest

from restricted_mg1 import backend


@pytest.fixture(params=backend.available())
def kernels(request):
    return backend.get(request.param)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
