"""The W-separator LP in exact arithmetic.

``LP(G[U])`` decomposes over the connected components of ``G[U]``: components
with at most W vertices carry no constraint, the rest are solved one by one.
Each component is solved with lazy constraint generation (connected
(W+1)-sets with mass < 1 are found by pruned canonical enumeration and added
as cuts) and cached under its relabeled edge list, so identical induced
subgraphs met anywhere, in any instance, are solved once.

Cache contract: the module-level caches are shared by every caller in the
process and guarded by a lock, so concurrent threads may use them; two
threads can race to solve the same component, which only wastes work.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .graph import Graph, components_mask, iter_bits, iter_connected_masks, mask_of, set_of
from .separator import Instance
from .simplex import ONE, ZERO, CoveringLP

_SEPARATION_BATCH = 16


@dataclass(frozen=True)
class FractionalSeparator:
    values: dict[int, Fraction]
    objective: Fraction

    def __getitem__(self, v: int) -> Fraction:
        return self.values.get(v, ZERO)


@dataclass(frozen=True)
class LpResult:
    value: Fraction
    solution: FractionalSeparator
    constraint_count: int


@dataclass(frozen=True)
class _ComponentLP:
    value: Fraction
    y: tuple[Fraction, ...]
    rows: tuple[tuple[int, ...], ...]


_lock = threading.Lock()
_component_cache: dict[tuple, _ComponentLP] = {}
_minimizer_cache: dict[tuple, tuple[Fraction, ...]] = {}


def clear_caches() -> None:
    with _lock:
        _component_cache.clear()
        _minimizer_cache.clear()


def _component_key(g: Graph, comp: int, w: int) -> tuple[tuple, tuple[int, ...]]:
    labels = tuple(iter_bits(comp))
    index = {v: i for i, v in enumerate(labels)}
    edges = tuple(
        (index[v], index[u]) for v in labels for u in iter_bits(g.nbr[v] & comp) if u > v
    )
    return (w, len(labels), edges), labels


def _separate(g: Graph, w: int, y: list[Fraction], limit: int) -> list[int]:
    """Up to ``limit`` connected (W+1)-sets whose y-mass is below 1."""

    def mass(m: int) -> Fraction:
        return sum((y[v] for v in iter_bits(m)), ZERO)

    found = []
    for s in iter_connected_masks(g, w + 1, prune=lambda m: mass(m) >= 1):
        found.append(s)
        if len(found) >= limit:
            break
    return found


def _solve_lazy(g: Graph, w: int, lp: CoveringLP, extra_rows: set[int]) -> None:
    while True:
        lp.optimize()
        y = lp.multipliers()
        cuts = [s for s in _separate(g, w, y, _SEPARATION_BATCH) if s not in extra_rows]
        if not cuts:
            return
        for s in cuts:
            extra_rows.add(s)
            lp.add_row({v: 1 for v in iter_bits(s)}, 1)


def _solve_component(key: tuple) -> _ComponentLP:
    with _lock:
        hit = _component_cache.get(key)
    if hit is not None:
        return hit
    w, k, edges = key
    g = Graph.from_edges(k, edges)
    lp = CoveringLP([1] * k)
    pool: set[int] = set()
    _solve_lazy(g, w, lp, pool)
    y = tuple(lp.multipliers())
    rows = tuple(tuple(sorted(r)) for r in (lp.rows[i][0] for i in range(len(lp.rows))))
    result = _ComponentLP(lp.objective(), y, rows)
    assert result.value == sum(y, ZERO)
    with _lock:
        _component_cache.setdefault(key, result)
    return result


def _minimize_vertex(key: tuple, v: int) -> tuple[Fraction, ...]:
    """An optimal solution of the component LP that minimises ``y_v``."""
    ck = key + (v,)
    with _lock:
        hit = _minimizer_cache.get(ck)
    if hit is not None:
        return hit
    base = _solve_component(key)
    w, k, edges = key
    g = Graph.from_edges(k, edges)
    lp = CoveringLP([1 if u == v else 0 for u in range(k)])
    pool: set[int] = set()
    for row in base.rows:
        pool.add(mask_of(row))
        lp.add_row({u: 1 for u in row}, 1)
    # pin the objective: sum y <= LP value, written as -sum y >= -LP
    lp.add_row({u: -1 for u in range(k)}, -base.value)
    _solve_lazy(g, w, lp, pool)
    y = tuple(lp.multipliers())
    assert sum(y, ZERO) == base.value
    with _lock:
        _minimizer_cache.setdefault(ck, y)
    return y


def _restrict_mask(inst: Instance, restrict_to: Iterable[int] | int | None) -> int:
    if restrict_to is None:
        return inst.graph.full_mask
    if isinstance(restrict_to, int):
        return restrict_to
    m = mask_of(restrict_to)
    if m & ~inst.graph.full_mask:
        raise ValueError("restrict_to contains ids outside the graph")
    return m


def _constrained_components(inst: Instance, alive: int) -> list[int]:
    return [c for c in components_mask(inst.graph, alive) if c.bit_count() > inst.w]


def lp_objective_mask(inst: Instance, alive: int) -> Fraction:
    total = ZERO
    for comp in _constrained_components(inst, alive):
        key, _ = _component_key(inst.graph, comp, inst.w)
        total += _solve_component(key).value
    return total


def lp_value(inst: Instance, restrict_to: Iterable[int] | int | None = None) -> LpResult:
    """Exact optimum of the W-separator LP over ``G[restrict_to]`` (default: all of G)."""
    alive = _restrict_mask(inst, restrict_to)
    values = {v: ZERO for v in iter_bits(alive)}
    total = ZERO
    count = 0
    for comp in _constrained_components(inst, alive):
        key, labels = _component_key(inst.graph, comp, inst.w)
        res = _solve_component(key)
        total += res.value
        count += len(res.rows)
        for i, v in enumerate(labels):
            values[v] = res.y[i]
    return LpResult(total, FractionalSeparator(values, total), count)


def persistent_ones(inst: Instance, restrict_to: Iterable[int] | int | None = None) -> frozenset[int]:
    """Vertices that take value 1 in every optimal fractional separator of ``G[restrict_to]``."""
    return set_of(persistent_ones_mask(inst, _restrict_mask(inst, restrict_to)))


def persistent_ones_mask(inst: Instance, alive: int) -> int:
    out = 0
    for comp in _constrained_components(inst, alive):
        key, labels = _component_key(inst.graph, comp, inst.w)
        base = _solve_component(key)
        for i, v in enumerate(labels):
            # an optimum with y_v < 1 already rules v out
            if base.y[i] == ONE and _minimize_vertex(key, i)[i] == ONE:
                out |= 1 << v
    return out


class PersistentOneError(ValueError):
    def __init__(self, vertex: int):
        super().__init__(f"vertex {vertex} has y = 1 in every optimal fractional separator")
        self.vertex = vertex


def avoid_ones_solution(
    inst: Instance, restrict_to: Iterable[int] | int | None = None
) -> FractionalSeparator:
    """An optimal fractional separator with every value strictly below 1.

    For each vertex take an optimum minimising that vertex's value and
    average them; optimal values never exceed 1, so the average stays below 1
    everywhere as long as no vertex is a persistent one.
    """
    alive = _restrict_mask(inst, restrict_to)
    values = {v: ZERO for v in iter_bits(alive)}
    total = ZERO
    for comp in _constrained_components(inst, alive):
        key, labels = _component_key(inst.graph, comp, inst.w)
        k = len(labels)
        sols = [_minimize_vertex(key, i) for i in range(k)]
        for i, v in enumerate(labels):
            if sols[i][i] == ONE:
                raise PersistentOneError(v)
        for i, v in enumerate(labels):
            values[v] = sum((s[i] for s in sols), ZERO) / k
            total += values[v]
    return FractionalSeparator(values, total)


def lp_superadditivity_check(
    inst: Instance, part1: Iterable[int], part2: Iterable[int]
) -> bool:
    m1, m2 = mask_of(part1), mask_of(part2)
    if m1 & m2 or (m1 | m2) != inst.graph.full_mask:
        raise ValueError("part1 and part2 must partition the vertex set")
    whole = lp_objective_mask(inst, inst.graph.full_mask)
    return whole >= lp_objective_mask(inst, m1) + lp_objective_mask(inst, m2)


def is_feasible_fractional(inst: Instance, y: FractionalSeparator, alive: int | None = None) -> bool:
    """Full (non-lazy) constraint check of ``y`` over ``G[alive]``."""
    if alive is None:
        alive = inst.graph.full_mask
    if any(y[v] < 0 for v in iter_bits(alive)):
        return False
    for s in iter_connected_masks(inst.graph, inst.w + 1, alive):
        if sum((y[v] for v in iter_bits(s)), ZERO) < 1:
            return False
    return True


class LpMemo:
    """Per-instance memo of ``LP(G[U])`` keyed by the vertex set ``U`` (as a bitmask)."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self._values: dict[int, Fraction] = {}
        self._no_ones: dict[int, bool] = {}
        self._lock = threading.Lock()

    def value(self, alive: int) -> Fraction:
        hit = self._values.get(alive)
        if hit is None:
            hit = lp_objective_mask(self.inst, alive)
            with self._lock:
                self._values.setdefault(alive, hit)
        return hit

    def has_no_persistent_ones(self, alive: int) -> bool:
        hit = self._no_ones.get(alive)
        if hit is None:
            hit = persistent_ones_mask(self.inst, alive) == 0
            with self._lock:
                self._no_ones.setdefault(alive, hit)
        return hit


def lp_dump(inst: Instance, restrict_to: Iterable[int] | int | None = None) -> str:
    """Audit record: every cut in the final pools (original ids) and the optimum."""
    alive = _restrict_mask(inst, restrict_to)
    res = lp_value(inst, alive)
    constraints = []
    for comp in _constrained_components(inst, alive):
        key, labels = _component_key(inst.graph, comp, inst.w)
        for row in _solve_component(key).rows:
            constraints.append(sorted(labels[i] for i in row))
    record = {
        "w": inst.w,
        "vertices": sorted(iter_bits(alive)),
        "value": str(res.value),
        "constraint_count": res.constraint_count,
        "constraints": constraints,
        "solution": {str(v): str(y) for v, y in sorted(res.solution.values.items())},
    }
    return json.dumps(record, indent=2)
