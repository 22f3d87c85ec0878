import numpy as np
import pytest

from firmcontrol import DirectedGraph


def digraph(n, edges):
    s = [a for a, _ in edges]
    t = [b for _, b in edges]
    return DirectedGraph.from_edges(n, s, t, ids=[chr(ord("a") + i) for i in range(n)] if n <= 26 else None)


def random_digraph(rng, n, p=0.3):
    adj = rng.random((n, n)) < p
    np.fill_diagonal(adj, False)
    s, t = np.nonzero(adj)
    return DirectedGraph.from_edges(n, s, t)


@pytest.fixture
def chain():
    return digraph(3, [(0, 1), (1, 2)])


@pytest.fixture
def dilation():
    return digraph(3, [(0, 1), (0, 2)])


@pytest.fixture
def cycle3():
    return digraph(3, [(0, 1), (1, 2), (2, 0)])


ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
