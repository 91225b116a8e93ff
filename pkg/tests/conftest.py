from __future__ import annotations

import pytest

from hybridgraph import oracle as orc
from hybridgraph.redundant import RedundantGraph


def dense(x):
    if isinstance(x, orc.DenseState):
        return x
    if isinstance(x, RedundantGraph):
        return orc.build_redundant_state(x)
    return orc.build_graph_state(x)


def same_state(x, y, tol: float = 1e-8) -> bool:
    return orc.equal_up_to_phase(dense(x), dense(y), tol)


@pytest.fixture
def same():
    return same_state


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.verdict_lines():
        terminalreporter.write_line(line)
