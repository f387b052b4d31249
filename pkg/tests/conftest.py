from __future__ import annotations

import itertools

from hypothesis import strategies as st

from wsep.graph import Graph
from wsep.separator import Instance


def graph(n: int, edges) -> Graph:
    return Graph.from_edges(n, list(edges))


def path(n: int) -> Graph:
    return graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Graph:
    return graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> Graph:
    return graph(n, itertools.combinations(range(n), 2))


def star(leaves: int) -> Graph:
    return graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def disjoint(*gs: Graph) -> Graph:
    edges, offset = [], 0
    for g in gs:
        edges += [(a + offset, b + offset) for a, b in g.edges()]
        offset += g.n
    return graph(offset, edges)


@st.composite
def graphs(draw, min_n: int = 1, max_n: int = 8) -> Graph:
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return graph(n, [e for e, k in zip(pairs, keep) if k])


@st.composite
def instances(draw, min_n: int = 1, max_n: int = 8, max_w: int = 3) -> Instance:
    return Instance(draw(graphs(min_n, max_n)), draw(st.integers(1, max_w)))


# one line per acceptance criterion, echoed again in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
