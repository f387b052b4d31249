"""Integral max flow by shortest augmenting paths (Edmonds-Karp).

Arcs are explored in insertion order, so results are deterministic.
"""

from __future__ import annotations

from collections import deque


class FlowNetwork:
    def __init__(self, nodes: int, source: int, sink: int):
        self.nodes = nodes
        self.source = source
        self.sink = sink
        self.head: list[int] = []
        self.cap: list[int] = []
        self.flow: list[int] = []
        self.out: list[list[int]] = [[] for _ in range(nodes)]

    def add_arc(self, u: int, v: int, cap: int) -> int:
        """Add arc u->v (and its residual twin); returns the forward arc id."""
        idx = len(self.head)
        self.head += [v, u]
        self.cap += [cap, 0]
        self.flow += [0, 0]
        self.out[u].append(idx)
        self.out[v].append(idx + 1)
        return idx

    def residual(self, arc: int) -> int:
        return self.cap[arc] - self.flow[arc]

    def _augmenting_path(self) -> list[int] | None:
        parent_arc = [-1] * self.nodes
        seen = [False] * self.nodes
        seen[self.source] = True
        queue = deque([self.source])
        while queue:
            u = queue.popleft()
            for arc in self.out[u]:
                v = self.head[arc]
                if not seen[v] and self.residual(arc) > 0:
                    seen[v] = True
                    parent_arc[v] = arc
                    if v == self.sink:
                        path = []
                        while v != self.source:
                            a = parent_arc[v]
                            path.append(a)
                            v = self.head[a ^ 1]
                        return path[::-1]
                    queue.append(v)
        return None

    def augment_once(self) -> int:
        """Push flow along one shortest augmenting path; returns the amount pushed."""
        path = self._augmenting_path()
        if path is None:
            return 0
        delta = min(self.residual(a) for a in path)
        for a in path:
            self.flow[a] += delta
            self.flow[a ^ 1] -= delta
        return delta

    def max_flow(self) -> int:
        while self.augment_once():
            pass
        return self.value()

    def value(self) -> int:
        return sum(self.flow[a] for a in self.out[self.source] if a % 2 == 0)

    def reachable(self) -> set[int]:
        """Nodes reachable from the source in the residual network."""
        seen = {self.source}
        queue = deque([self.source])
        while queue:
            u = queue.popleft()
            for arc in self.out[u]:
                v = self.head[arc]
                if v not in seen and self.residual(arc) > 0:
                    seen.add(v)
                    queue.append(v)
        return seen

    def set_flow(self, arc: int, amount: int) -> None:
        self.flow[arc] = amount
        self.flow[arc ^ 1] = -amount

    def copy(self) -> FlowNetwork:
        other = FlowNetwork(self.nodes, self.source, self.sink)
        other.head = list(self.head)
        other.cap = list(self.cap)
        other.flow = list(self.flow)
        other.out = [list(o) for o in self.out]
        return other
