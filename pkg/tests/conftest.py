import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spselect.graph import DirectedGraph, gen_named  # noqa: E402

@pytest.fixture
def figure2():
    return gen_named("figure2")


@pytest.fixture
def figure4():
    return gen_named("figure4")


@pytest.fixture
def mutual_pair():
    return DirectedGraph(2, frozenset({(1, 2), (2, 1)}))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
