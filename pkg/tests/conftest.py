import sys

import pytest

from wsclust import MatrixMetric


@pytest.fixture
def square():
    return MatrixMetric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
