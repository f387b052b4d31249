"""Reducible pairs (head A, crown B): verification through assignment flow
networks, discovery, minimisation, packings and the two reduction rules.

Crown components are indexed by their position in ``ReduciblePair.components``
(ordered by smallest vertex); an assignment maps ``(component index, head)``
to a number of units.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable

from .flow import FlowNetwork
from .graph import (
    Graph,
    components_mask,
    iter_bits,
    mask_of,
    neighborhood_mask,
    set_of,
)
from .lp import persistent_ones_mask
from .separator import Instance, Packing, verify_packing

Assignment = dict[tuple[int, int], int]


class InvariantError(RuntimeError):
    """A construction that the theory guarantees produced an invalid result."""


@dataclass(frozen=True)
class ReduciblePair:
    head: frozenset[int]
    crown: frozenset[int]
    components: tuple[frozenset[int], ...]
    assignment: Assignment = field(compare=False)
    strict_witness: int | None = None
    greedy_minimal: bool = field(default=False, compare=False)

    @property
    def strict(self) -> bool:
        return self.strict_witness is not None

    def head_mass(self, a: int) -> int:
        return sum(units for (_, h), units in self.assignment.items() if h == a)

    def to_json(self) -> dict:
        return {
            "head": sorted(self.head),
            "crown": sorted(self.crown),
            "components": [sorted(c) for c in self.components],
            "assignment": [
                {"component": ci, "head": a, "units": u}
                for (ci, a), u in sorted(self.assignment.items())
                if u
            ],
            "strict_witness": self.strict_witness,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data: dict) -> ReduciblePair:
        """Only ``head`` and ``crown`` are required; callers re-verify the rest."""
        return cls(
            head=frozenset(data["head"]),
            crown=frozenset(data["crown"]),
            components=tuple(frozenset(c) for c in data.get("components", ())),
            assignment={(e["component"], e["head"]): e["units"] for e in data.get("assignment", ())},
            strict_witness=data.get("strict_witness"),
        )


@dataclass
class _Network:
    net: FlowNetwork
    heads: list[int]
    comps: list[int]
    comp_arc: dict[tuple[int, int], int]
    head_arc: dict[int, int]
    source_arc: list[int]

    def assignment(self) -> Assignment:
        return {k: self.net.flow[arc] for k, arc in self.comp_arc.items() if self.net.flow[arc] > 0}


def _assignment_network(g: Graph, comps: list[int], heads: list[int], quota: int) -> _Network:
    """The network H: s -> C (cap |C|), C -> a for a in N(C) (cap |C|), a -> t (cap quota)."""
    s, t = 0, 1
    net = FlowNetwork(2 + len(comps) + len(heads), s, t)
    head_node = {a: 2 + len(comps) + i for i, a in enumerate(heads)}
    comp_arc = {}
    source_arc = []
    for ci, c in enumerate(comps):
        size = c.bit_count()
        source_arc.append(net.add_arc(s, 2 + ci, size))
        nb = neighborhood_mask(g, c)
        for a in heads:
            if nb >> a & 1:
                comp_arc[(ci, a)] = net.add_arc(2 + ci, head_node[a], size)
    head_arc = {a: net.add_arc(head_node[a], t, quota) for a in heads}
    return _Network(net, heads, comps, comp_arc, head_arc, source_arc)


def _boost(network: _Network, a: int) -> _Network:
    """H_a from a max flow of H: raise a's sink capacity by one and augment once."""
    net = network.net.copy()
    net.cap[network.head_arc[a]] += 1
    net.augment_once()
    return _Network(net, network.heads, network.comps, network.comp_arc, network.head_arc, network.source_arc)


def _structure_ok(inst: Instance, a: int, b: int) -> list[int] | None:
    g = inst.graph
    if a & b or neighborhood_mask(g, b) & ~a:
        return None
    comps = components_mask(g, b)
    if any(c.bit_count() > inst.w for c in comps):
        return None
    return comps


def _as_mask(vs: Iterable[int] | int) -> int:
    return vs if isinstance(vs, int) else mask_of(vs)


def verify_reducible_pair(
    inst: Instance, a: Iterable[int] | int, b: Iterable[int] | int
) -> ReduciblePair | None:
    """Check (A, B) and extract an integral assignment from a max flow in H.

    The pair is reducible iff every head's sink arc saturates (flow
    |A|(2W-1)); it is strict iff some H_a admits one more unit.  The returned
    assignment comes from H (reducible) or from the first boosted H_a
    (strict), so the witness head really receives 2W units.
    """
    am, bm = _as_mask(a), _as_mask(b)
    comps = _structure_ok(inst, am, bm)
    if comps is None:
        return None
    heads = list(iter_bits(am))
    quota = 2 * inst.w - 1
    network = _assignment_network(inst.graph, comps, heads, quota)
    if network.net.max_flow() != quota * len(heads):
        return None
    witness = None
    for h in heads:
        boosted = _boost(network, h)
        if boosted.net.value() == quota * len(heads) + 1:
            witness, network = h, boosted
            break
    return ReduciblePair(
        head=set_of(am),
        crown=set_of(bm),
        components=tuple(set_of(c) for c in comps),
        assignment=network.assignment(),
        strict_witness=witness,
    )


def boosted_flow_value(inst: Instance, pair: ReduciblePair, a_star: int) -> int:
    """Max flow of H_{a*} computed from scratch (independent of any stored assignment)."""
    comps = [mask_of(c) for c in pair.components]
    heads = sorted(pair.head)
    network = _assignment_network(inst.graph, comps, heads, 2 * inst.w - 1)
    network.net.cap[network.head_arc[a_star]] += 1
    return network.net.max_flow()


def reducible_by_enumeration(
    inst: Instance, a: Iterable[int] | int, b: Iterable[int] | int
) -> tuple[bool, bool]:
    """Direct search over assignment functions: returns (reducible, strictly reducible).

    Independent of the flow formulation; exponential, meant for tiny inputs.
    """
    am, bm = _as_mask(a), _as_mask(b)
    comps = _structure_ok(inst, am, bm)
    if comps is None:
        return False, False
    g = inst.graph
    heads = list(iter_bits(am))
    quota = 2 * inst.w - 1
    per_comp = []
    for c in comps:
        adj = [h for h in heads if neighborhood_mask(g, c) >> h & 1]
        options = []
        for units in itertools.product(range(c.bit_count() + 1), repeat=len(adj)):
            if sum(units) <= c.bit_count():
                options.append(tuple(zip(adj, units)))
        per_comp.append(options)
    reducible = strict = False
    for choice in itertools.product(*per_comp):
        mass = dict.fromkeys(heads, 0)
        for opt in choice:
            for h, u in opt:
                mass[h] += u
        if all(m >= quota for m in mass.values()):
            reducible = True
            if any(m >= quota + 1 for m in mass.values()):
                return True, True
    return reducible, strict


def _small_components(inst: Instance, heads: int, alive: int | None = None) -> list[int]:
    """Non-isolated components of G[alive] - heads with at most W vertices."""
    g = inst.graph
    if alive is None:
        alive = g.full_mask
    return [
        c
        for c in components_mask(g, alive & ~heads)
        if c.bit_count() <= inst.w and neighborhood_mask(g, c) & heads
    ]


def _extract_from_heads(inst: Instance, candidate: int) -> ReduciblePair | None:
    """Residual-closure extraction: heads and crown components reachable from s."""
    comps = _small_components(inst, candidate)
    if not comps:
        return None
    heads = list(iter_bits(candidate))
    network = _assignment_network(inst.graph, comps, heads, 2 * inst.w - 1)
    network.net.max_flow()
    reach = network.net.reachable()
    n_comp = len(comps)
    close_heads = 0
    for i, h in enumerate(heads):
        if 2 + n_comp + i in reach:
            close_heads |= 1 << h
    if not close_heads:
        return None
    crown = 0
    for ci, c in enumerate(comps):
        if 2 + ci in reach:
            crown |= c
    pair = verify_reducible_pair(inst, close_heads, crown)
    if pair is not None and pair.strict:
        return pair
    return None


def _cut_vertex_candidate(inst: Instance) -> int:
    g = inst.graph
    out = 0
    for v in range(g.n):
        for c in components_mask(g, g.full_mask & ~(1 << v)):
            if c.bit_count() <= inst.w and g.nbr[v] & c:
                out |= 1 << v
                break
    return out


def find_strictly_reducible_pair(inst: Instance) -> ReduciblePair | None:
    """Locate a strictly reducible pair, or None.

    Heads of minimal strictly reducible pairs are persistent ones of the LP
    and their crowns are small components of G minus those vertices, so
    running the residual closure on the persistent-one set finds a pair
    whenever one exists.  A cheaper cut-vertex candidate is tried afterwards
    as a fallback.  Whatever comes out has been re-verified.
    """
    g = inst.graph
    for candidate in (persistent_ones_mask(inst, g.full_mask), _cut_vertex_candidate(inst)):
        if candidate:
            pair = _extract_from_heads(inst, candidate)
            if pair is not None:
                return pair
    return None


def _crown_for(pair: ReduciblePair, inst: Instance, heads: int) -> int:
    """Union of the pair's crown components whose whole neighbourhood lies in ``heads``."""
    out = 0
    for c in pair.components:
        cm = mask_of(c)
        if not neighborhood_mask(inst.graph, cm) & ~heads:
            out |= cm
    return out


def _strict_sub_pair(inst: Instance, pair: ReduciblePair, heads: int) -> ReduciblePair | None:
    sub = verify_reducible_pair(inst, heads, _crown_for(pair, inst, heads))
    return sub if sub is not None and sub.strict else None


def is_minimal(inst: Instance, pair: ReduciblePair) -> bool:
    """No proper head subset forms a strictly reducible pair with part of the crown."""
    heads = sorted(pair.head)
    for r in range(1, len(heads)):
        for sub in itertools.combinations(heads, r):
            if _strict_sub_pair(inst, pair, mask_of(sub)) is not None:
                return False
    return True


def minimize_pair(inst: Instance, pair: ReduciblePair, exhaustive_limit: int = 8) -> ReduciblePair:
    """Shrink to a minimal strictly reducible pair with head inside ``pair.head``.

    Exhaustive over head subsets by increasing size when |A| <= exhaustive_limit
    (the first strict subset found is minimal); otherwise drop single heads
    greedily and flag the result ``greedy_minimal``.
    """
    heads = sorted(pair.head)
    if len(heads) <= exhaustive_limit:
        for r in range(1, len(heads)):
            for sub in itertools.combinations(heads, r):
                found = _strict_sub_pair(inst, pair, mask_of(sub))
                if found is not None:
                    return found
        return pair
    current = pair
    shrunk = True
    while shrunk:
        shrunk = False
        for h in sorted(current.head):
            found = _strict_sub_pair(inst, current, mask_of(current.head) & ~(1 << h))
            if found is not None:
                current, shrunk = found, True
                break
    return ReduciblePair(
        current.head,
        current.crown,
        current.components,
        current.assignment,
        current.strict_witness,
        greedy_minimal=True,
    )


def _lift(pair: ReduciblePair, labels: tuple[int, ...]) -> ReduciblePair:
    return ReduciblePair(
        head=frozenset(labels[v] for v in pair.head),
        crown=frozenset(labels[v] for v in pair.crown),
        components=tuple(frozenset(labels[v] for v in c) for c in pair.components),
        assignment={(ci, labels[a]): u for (ci, a), u in pair.assignment.items()},
        strict_witness=None if pair.strict_witness is None else labels[pair.strict_witness],
        greedy_minimal=pair.greedy_minimal,
    )


def reducible_sequence(inst: Instance) -> list[ReduciblePair]:
    """Minimal strictly reducible pairs, each found after deleting earlier heads."""
    g = inst.graph
    removed = 0
    out = []
    while True:
        sub_graph, labels = g.induced(iter_bits(g.full_mask & ~removed))
        sub = Instance(sub_graph, inst.w)
        pair = find_strictly_reducible_pair(sub)
        if pair is None:
            return out
        pair = _lift(minimize_pair(sub, pair), labels)
        out.append(pair)
        removed |= mask_of(pair.head)


def exhaustive_strict_heads(inst: Instance, alive: int | None = None) -> list[int]:
    """Every head set (mask) that admits a strictly reducible pair in G[alive]; 2^n flows."""
    g = inst.graph
    if alive is None:
        alive = g.full_mask
    sub_graph, labels = g.induced(iter_bits(alive))
    sub = Instance(sub_graph, inst.w)
    out = []
    for r in range(1, sub_graph.n + 1):
        for heads in itertools.combinations(range(sub_graph.n), r):
            hm = mask_of(heads)
            comps = _small_components(sub, hm)
            crown = 0
            for c in comps:
                crown |= c
            pair = verify_reducible_pair(sub, hm, crown)
            if pair is not None and pair.strict:
                out.append(mask_of(labels[h] for h in heads))
    return out


@dataclass(frozen=True)
class Reduction:
    instance: Instance
    k: int
    labels: tuple[int, ...]
    forced: frozenset[int] = frozenset()

    @property
    def no_instance(self) -> bool:
        return self.k < 0


def crown_reduce(inst: Instance, k: int, pair: ReduciblePair) -> Reduction:
    """(G, k) -> (G - (A u B), k - |A|), with ``labels`` mapping new ids to old ones."""
    if verify_reducible_pair(inst, pair.head, pair.crown) is None:
        raise ValueError("pair does not verify in this instance")
    g = inst.graph
    keep = g.full_mask & ~mask_of(pair.head | pair.crown)
    sub, labels = g.induced(iter_bits(keep))
    return Reduction(Instance(sub, inst.w), k - len(pair.head), labels, pair.head)


def degree_reduce(inst: Instance, k: int) -> Reduction:
    """Take any vertex of degree > k + W into the solution, repeatedly.

    Stops as soon as the budget goes negative (then ``no_instance`` is set).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    g = inst.graph
    alive = g.full_mask
    forced = 0
    while k >= 0:
        hit = None
        for v in iter_bits(alive):
            if (g.nbr[v] & alive).bit_count() > k + inst.w:
                hit = v
                break
        if hit is None:
            break
        forced |= 1 << hit
        alive &= ~(1 << hit)
        k -= 1
    sub, labels = g.induced(iter_bits(alive))
    return Reduction(Instance(sub, inst.w), k, labels, set_of(forced))


def kernel_vertex_count(inst: Instance) -> int:
    g = inst.graph
    return sum(c.bit_count() for c in components_mask(g, g.full_mask) if c.bit_count() > inst.w)


def kernel_size_check(inst: Instance, k: int) -> bool:
    """Vertices in components larger than W must number at most kW(k+W)+k."""
    w = inst.w
    return kernel_vertex_count(inst) <= k * w * (k + w) + k


# --- packings -------------------------------------------------------------


def normalize_assignment(pair: ReduciblePair, quota: int) -> Assignment:
    """Cut every head's mass down to exactly ``quota``, trimming entries from the
    highest component index downwards."""
    g = dict(pair.assignment)
    for a in sorted(pair.head):
        excess = pair.head_mass(a) - quota
        if excess < 0:
            raise InvariantError(f"head {a} receives less than {quota} units")
        for key in sorted((k for k in g if k[1] == a), reverse=True):
            if excess == 0:
                break
            take = min(excess, g[key])
            g[key] -= take
            excess -= take
    return {k: v for k, v in g.items() if v > 0}


def _find_cycle(weights: Assignment) -> list[tuple[str, int]] | None:
    """A cycle in the bipartite support graph as a node list, or None if it is a forest."""
    adj: dict[tuple[str, int], list[tuple[str, int]]] = {}
    for ci, a in sorted(weights):
        adj.setdefault(("C", ci), []).append(("A", a))
        adj.setdefault(("A", a), []).append(("C", ci))
    parent: dict[tuple[str, int], tuple[str, int] | None] = {}
    for start in sorted(adj):
        if start in parent:
            continue
        parent[start] = None
        stack = [(start, iter(adj[start]))]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                continue
            if nxt == parent[node]:
                continue
            if nxt in parent:
                on_stack = [s for s, _ in stack]
                if nxt in on_stack:
                    return on_stack[on_stack.index(nxt):]
                continue
            parent[nxt] = node
            stack.append((nxt, iter(adj[nxt])))
    return None


def _edge(x: tuple[str, int], y: tuple[str, int]) -> tuple[int, int]:
    return (x[1], y[1]) if x[0] == "C" else (y[1], x[1])


def cycle_cancel(weights: Assignment) -> Assignment:
    """Remove cycles from the support of ``weights`` while keeping every head's total
    and never raising any component's total; ends with a forest."""
    w = {k: v for k, v in weights.items() if v > 0}
    while True:
        cycle = _find_cycle(w)
        if cycle is None:
            return w
        edges = [_edge(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))]
        low = min(edges, key=lambda e: (w[e], e))
        x = w[low]
        # open the cycle at the cheapest edge so the walk runs from its component to its head
        i = edges.index(low)
        nodes = cycle[i + 1:] + cycle[: i + 1]
        if nodes[0][0] != "C":
            nodes = nodes[::-1]
        w[low] -= x
        sign = 1
        for j in range(len(nodes) - 1):
            e = _edge(nodes[j], nodes[j + 1])
            w[e] += sign * x
            sign = -sign
        w = {k: v for k, v in w.items() if v > 0}


def _trees(weights: Assignment) -> list[tuple[set[int], set[int]]]:
    """Connected pieces of the support forest as (component indices, heads)."""
    adj: dict[tuple[str, int], set[tuple[str, int]]] = {}
    for ci, a in weights:
        adj.setdefault(("C", ci), set()).add(("A", a))
        adj.setdefault(("A", a), set()).add(("C", ci))
    seen: set[tuple[str, int]] = set()
    out = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp_ids, heads = set(), set()
        stack = [start]
        seen.add(start)
        while stack:
            node = stack.pop()
            (comp_ids if node[0] == "C" else heads).add(node[1])
            for nb in adj[node]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        out.append((comp_ids, heads))
    return out


def pack_forest(
    pair: ReduciblePair, forest: Assignment, roots: Iterable[int] = ()
) -> dict[int, frozenset[int]]:
    """The packing process: root each tree at a head, hand every component to its parent head.

    ``roots`` may fix the root of the trees containing those heads; other trees
    are rooted at their smallest head.  Returns head -> part.
    """
    root_pref = set(roots)
    adj_c: dict[int, list[int]] = {}
    adj_a: dict[int, list[int]] = {}
    for ci, a in sorted(forest):
        adj_c.setdefault(ci, []).append(a)
        adj_a.setdefault(a, []).append(ci)
    parts: dict[int, set[int]] = {}
    for comp_ids, heads in _trees(forest):
        pref = sorted(heads & root_pref)
        root = pref[0] if pref else min(heads)
        parts[root] = {root}
        seen_c: set[int] = set()
        seen_a = {root}
        stack = [root]
        while stack:
            a = stack.pop()
            for ci in adj_a.get(a, []):
                if ci in seen_c:
                    continue
                seen_c.add(ci)
                parts[a] |= pair.components[ci]
                for b in adj_c[ci]:
                    if b not in seen_a:
                        seen_a.add(b)
                        parts[b] = {b}
                        stack.append(b)
    for a in pair.head:
        parts.setdefault(a, {a})
    return {a: frozenset(p) for a, p in sorted(parts.items())}


def _check_head_packing(inst: Instance, pair: ReduciblePair, parts: dict[int, frozenset[int]]) -> Packing:
    packing = Packing(tuple(parts[a] for a in sorted(parts)))
    if len(packing) != len(pair.head) or not verify_packing(inst, packing):
        raise InvariantError("packing process produced an invalid packing")
    for part in packing.parts:
        if len(part & pair.head) != 1:
            raise InvariantError("packing part does not hold exactly one head")
    return packing


def packing_from_pair(inst: Instance, pair: ReduciblePair, roots: Iterable[int] = ()) -> Packing:
    """A (W+1)-packing of size |A| in G[A u B], one head per part."""
    if verify_reducible_pair(inst, pair.head, pair.crown) is None:
        raise ValueError("pair does not verify in this instance")
    forest = cycle_cancel(normalize_assignment(pair, 2 * inst.w - 1))
    return _check_head_packing(inst, pair, pack_forest(pair, forest, roots))


def _surviving_parts(inst: Instance, parts: Iterable[frozenset[int]], deleted: int) -> list[frozenset[int]]:
    g = inst.graph
    out = []
    for part in parts:
        rest = mask_of(part) & ~deleted
        pieces = [c for c in components_mask(g, rest) if c.bit_count() > inst.w]
        if pieces:
            out.append(set_of(max(pieces, key=lambda c: (c.bit_count(), -c))))
    return out


def _boosted_forest(inst: Instance, pair: ReduciblePair, forest: Assignment, a: int) -> Assignment | None:
    """Embed ``forest`` in H_a, push one more unit to ``a`` and cycle-cancel again."""
    comps = [mask_of(c) for c in pair.components]
    heads = sorted(pair.head)
    network = _assignment_network(inst.graph, comps, heads, 2 * inst.w - 1)
    net = network.net
    for (ci, h), units in forest.items():
        net.set_flow(network.comp_arc[(ci, h)], units)
    for ci in range(len(comps)):
        net.set_flow(network.source_arc[ci], sum(u for (c, _), u in forest.items() if c == ci))
    for h in heads:
        net.set_flow(network.head_arc[h], sum(u for (_, b), u in forest.items() if b == h))
    net.cap[network.head_arc[a]] += 1
    if not net.augment_once():
        return None
    return cycle_cancel(network.assignment())


def packing_after_deletion(inst: Instance, pair: ReduciblePair, s: Iterable[int]) -> Packing:
    """A packing of size >= |A| - |S| + 1 in G[A u B] - S when S meets the crown.

    Follows the re-rooting argument: root the tree holding a deleted crown
    vertex's component at a head assigned to it; if that head would be left
    with only W - 1 spare units, first push one more unit to it through H_a.
    """
    sm = mask_of(s)
    region = mask_of(pair.head | pair.crown)
    if sm & ~region or sm == region:
        raise ValueError("S must be a proper subset of A u B")
    if len(set(s)) > len(pair.head):
        raise ValueError("|S| must not exceed |A|")
    if not sm & mask_of(pair.crown):
        raise ValueError("S must contain a crown vertex")
    if not pair.strict or verify_reducible_pair(inst, pair.head, pair.crown) is None:
        raise ValueError("pair must be strictly reducible in this instance")
    if not is_minimal(inst, pair):
        raise ValueError("pair must be a minimal strictly reducible pair")
    target = len(pair.head) - sm.bit_count() + 1
    forest = cycle_cancel(normalize_assignment(pair, 2 * inst.w - 1))

    def attempt(f: Assignment, roots: Iterable[int]) -> Packing | None:
        parts = pack_forest(pair, f, roots)
        alive = _surviving_parts(inst, parts.values(), sm)
        if len(alive) >= target:
            packing = Packing(tuple(alive))
            if not verify_packing(inst, packing) or any(mask_of(p) & sm for p in packing.parts):
                raise InvariantError("surviving parts do not form a packing")
            return packing
        return None

    found = attempt(forest, ())
    if found is not None:
        return found
    for v in sorted(set(s) & pair.crown):
        ci = next(i for i, c in enumerate(pair.components) if v in c)
        for (cj, a), units in sorted(forest.items()):
            if cj != ci:
                continue
            found = attempt(forest, [a])
            if found is not None:
                return found
            if units == inst.w:
                boosted = _boosted_forest(inst, pair, forest, a)
                if boosted is not None:
                    found = attempt(boosted, [a])
                    if found is not None:
                        return found
    raise InvariantError("no packing of the guaranteed size was constructed")
