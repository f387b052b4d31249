"""Simple undirected graphs over dense vertex ids, plus the small-subgraph
machinery the rest of the package is built on.

Vertex sets travel through the public API as ``frozenset[int]``.  Internally
most routines work on Python ints used as bitsets, which is what makes the
evolutionary loop and the exhaustive oracles fast enough at desk scale.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, TextIO

VertexSet = frozenset


class GraphFormatError(ValueError):
    """Raised for malformed edge-list input; carries the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def set_of(mask: int) -> frozenset[int]:
    return frozenset(iter_bits(mask))


@dataclass(frozen=True)
class Graph:
    n: int
    adjacency: tuple[tuple[int, ...], ...]
    nbr: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.adjacency) != self.n:
            raise ValueError("adjacency length must equal n")
        for v, row in enumerate(self.adjacency):
            for u in row:
                if u == v:
                    raise ValueError(f"self-loop at {v}")
                if not 0 <= u < self.n or v not in self.adjacency[u]:
                    raise ValueError(f"adjacency not symmetric at {v}-{u}")
        object.__setattr__(self, "nbr", tuple(mask_of(row) for row in self.adjacency))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> Graph:
        rows: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge {u}-{v} out of range for n={n}")
            rows[u].add(v)
            rows[v].add(u)
        return cls(n, tuple(tuple(sorted(r)) for r in rows))

    @property
    def edge_count(self) -> int:
        return sum(len(r) for r in self.adjacency) // 2

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def induced(self, keep: Iterable[int]) -> tuple[Graph, tuple[int, ...]]:
        """Induced subgraph on ``keep``, relabeled to 0..k-1 in increasing id order.

        Returns the subgraph and ``labels`` with ``labels[new] == old``.
        """
        labels = tuple(sorted(set(keep)))
        index = {old: new for new, old in enumerate(labels)}
        rows = tuple(
            tuple(index[u] for u in self.adjacency[old] if u in index) for old in labels
        )
        return Graph(len(labels), rows), labels

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return g


def load_graph(source: TextIO | bytes | str) -> Graph:
    """Parse the ``n m`` header + ``u v`` edge-list format.

    ``source`` may be a text stream, raw bytes, or the text itself.
    Duplicate edges collapse; the header's ``m`` must match the number of
    edge lines given.
    """
    if isinstance(source, bytes):
        source = source.decode()
    if isinstance(source, str):
        source = io.StringIO(source)
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(source)]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise GraphFormatError(1, "missing 'n m' header")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise GraphFormatError(lineno, f"expected 'n m', got {header!r}")
    n, m = int(parts[0]), int(parts[1])
    body = lines[1:]
    if len(body) != m:
        raise GraphFormatError(lineno, f"header announces {m} edges, found {len(body)}")
    edges = []
    for lineno, text in body:
        parts = text.split()
        if len(parts) != 2 or not all(p.lstrip("-").isdigit() for p in parts):
            raise GraphFormatError(lineno, f"expected 'u v', got {text!r}")
        u, v = int(parts[0]), int(parts[1])
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(lineno, f"vertex id out of range 0..{n - 1}")
        if u == v:
            raise GraphFormatError(lineno, f"self-loop at {u}")
        edges.append((u, v))
    return Graph.from_edges(n, edges)


def dump_graph(g: Graph) -> str:
    edges = g.edges()
    out = [f"{g.n} {len(edges)}"]
    out.extend(f"{u} {v}" for u, v in edges)
    return "\n".join(out) + "\n"


def components_mask(g: Graph, alive: int) -> list[int]:
    """Connected components of ``G[alive]`` as bitmasks, ordered by smallest member."""
    nbr = g.nbr
    comps = []
    rest = alive
    while rest:
        comp = rest & -rest
        frontier = comp
        while frontier:
            reach = 0
            for v in iter_bits(frontier):
                reach |= nbr[v]
            frontier = reach & rest & ~comp
            comp |= frontier
        comps.append(comp)
        rest &= ~comp
    return comps


def connected_components(g: Graph, removed: Iterable[int] = ()) -> list[frozenset[int]]:
    alive = g.full_mask & ~mask_of(removed)
    return [set_of(c) for c in components_mask(g, alive)]


def neighborhood_mask(g: Graph, s: int) -> int:
    reach = 0
    for v in iter_bits(s):
        reach |= g.nbr[v]
    return reach & ~s


def neighborhood(g: Graph, s: Iterable[int]) -> frozenset[int]:
    return set_of(neighborhood_mask(g, mask_of(s)))


def is_connected_mask(g: Graph, s: int) -> bool:
    return s != 0 and len(components_mask(g, s)) == 1


def iter_connected_masks(
    g: Graph,
    size: int,
    alive: int | None = None,
    prune: Callable[[int], bool] | None = None,
) -> Iterator[int]:
    """Yield every connected vertex set of exactly ``size`` vertices inside ``alive``.

    Canonical extension: each set is grown from its smallest vertex ``v`` and
    only extended by vertices greater than ``v`` that are exclusive neighbours
    of the newest vertex, so every set comes out exactly once.  ``prune(mask)``
    returning True cuts the whole subtree rooted at the partial set ``mask``
    (used by LP separation once a partial set already carries mass >= 1).
    """
    if size < 1:
        return
    if alive is None:
        alive = g.full_mask
    nbr = g.nbr

    def extend(sub: int, ext: int, closed: int, above: int, left: int) -> Iterator[int]:
        if left == 0:
            yield sub
            return
        while ext:
            w_bit = ext & -ext
            ext ^= w_bit
            w = w_bit.bit_length() - 1
            new_sub = sub | w_bit
            if prune is not None and prune(new_sub):
                continue
            excl = nbr[w] & alive & above & ~closed
            yield from extend(new_sub, ext | excl, closed | nbr[w], above, left - 1)

    for v in iter_bits(alive):
        v_bit = 1 << v
        if prune is not None and prune(v_bit):
            continue
        above = alive & ~((v_bit << 1) - 1)
        yield from extend(v_bit, nbr[v] & above, nbr[v] | v_bit, above, size - 1)


def enumerate_connected_subgraphs(g: Graph, size: int) -> Iterator[frozenset[int]]:
    if not 1 <= size <= max(g.n, 1):
        raise ValueError(f"size must lie in 1..n, got {size}")
    for m in iter_connected_masks(g, size):
        yield set_of(m)


def connected_subset_containing(g: Graph, start: int, size: int, alive: int) -> int:
    """A connected ``size``-subset of ``G[alive]`` containing ``start`` (BFS order), or 0."""
    got = 1 << start
    frontier = [start]
    count = 1
    while frontier and count < size:
        nxt = []
        for v in frontier:
            for u in iter_bits(g.nbr[v] & alive & ~got):
                got |= 1 << u
                count += 1
                nxt.append(u)
                if count == size:
                    return got
        frontier = nxt
    return got if count == size else 0


def iter_connected_masks_containing(g: Graph, root: int, size: int, alive: int) -> Iterator[int]:
    """Every connected ``size``-set of ``G[alive]`` that contains ``root``, each once."""
    if not alive >> root & 1 or size < 1:
        return
    nbr = g.nbr

    def extend(sub: int, ext: int, closed: int, left: int) -> Iterator[int]:
        if left == 0:
            yield sub
            return
        while ext:
            w_bit = ext & -ext
            ext ^= w_bit
            w = w_bit.bit_length() - 1
            excl = nbr[w] & alive & ~closed
            yield from extend(sub | w_bit, ext | excl, closed | nbr[w], left - 1)

    r_bit = 1 << root
    yield from extend(r_bit, nbr[root] & alive, nbr[root] | r_bit, size - 1)
