"""W-separator semantics: uncovered vertices, feasibility, exact oracles and packings."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .graph import (
    Graph,
    components_mask,
    connected_subset_containing,
    is_connected_mask,
    iter_bits,
    iter_connected_masks_containing,
    mask_of,
    set_of,
)


class BudgetExceeded(RuntimeError):
    """An exact search hit its node budget before it could prove an answer."""


@dataclass(frozen=True)
class Instance:
    graph: Graph
    w: int

    def __post_init__(self):
        if self.w < 1:
            raise ValueError(f"component-size bound W must be >= 1, got {self.w}")

    @property
    def n(self) -> int:
        return self.graph.n


@dataclass(frozen=True)
class SearchPoint:
    """Bit vector over the vertices; bit ``v`` set means ``v`` is selected."""

    mask: int
    n: int

    @classmethod
    def from_string(cls, bits: str) -> SearchPoint:
        if any(c not in "01" for c in bits):
            raise ValueError(f"search point must be a 0/1 string, got {bits!r}")
        return cls(sum(1 << i for i, c in enumerate(bits) if c == "1"), len(bits))

    @classmethod
    def from_set(cls, n: int, vertices: Iterable[int]) -> SearchPoint:
        return cls(mask_of(vertices), n)

    @classmethod
    def zeros(cls, n: int) -> SearchPoint:
        return cls(0, n)

    def __str__(self) -> str:
        return "".join("1" if self.mask >> i & 1 else "0" for i in range(self.n))

    @property
    def ones(self) -> frozenset[int]:
        return set_of(self.mask)

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class Packing:
    parts: tuple[frozenset[int], ...]

    def __len__(self) -> int:
        return len(self.parts)


@dataclass(frozen=True)
class OptResult:
    opt: int | None
    witness: SearchPoint | None
    exceeds_cap: bool = False


def uncovered_mask(inst: Instance, selected: int) -> int:
    g = inst.graph
    out = 0
    for comp in components_mask(g, g.full_mask & ~selected):
        if comp.bit_count() > inst.w:
            out |= comp
    return out


def _check_point(inst: Instance, x: SearchPoint) -> None:
    if x.n != inst.n:
        raise ValueError(f"search point has length {x.n}, graph has {inst.n} vertices")


def uncovered(inst: Instance, x: SearchPoint) -> frozenset[int]:
    _check_point(inst, x)
    return set_of(uncovered_mask(inst, x.mask))


def is_w_separator(inst: Instance, x: SearchPoint) -> bool:
    _check_point(inst, x)
    return uncovered_mask(inst, x.mask) == 0


def _violated_set(inst: Instance, selected: int) -> int:
    """A connected (W+1)-set avoiding ``selected``, or 0 if ``selected`` separates."""
    g = inst.graph
    for comp in components_mask(g, g.full_mask & ~selected):
        if comp.bit_count() > inst.w:
            # start from the highest-degree vertex: tends to give denser branching sets
            start = max(iter_bits(comp), key=lambda v: (g.nbr[v] & comp).bit_count())
            return connected_subset_containing(g, start, inst.w + 1, comp)
    return 0


def _greedy_packing_count(inst: Instance, alive: int) -> int:
    g = inst.graph
    count = 0
    for comp in components_mask(g, alive):
        rest = comp
        while rest.bit_count() > inst.w:
            found = 0
            for v in iter_bits(rest):
                found = connected_subset_containing(g, v, inst.w + 1, rest)
                if found:
                    break
            if not found:
                break
            count += 1
            rest &= ~found
    return count


def brute_force_opt(
    inst: Instance,
    cap: int | None = None,
    node_budget: int = 5_000_000,
    method: str = "branch",
) -> OptResult:
    """Exact minimum W-separator.

    ``method="branch"`` branches over the vertices of a surviving connected
    (W+1)-set; vertices rejected in earlier sibling branches stay forbidden so
    every separator is reached once.  ``method="enumerate"`` tries all subsets
    in order of size and is kept as an independent fallback for small n.
    With ``cap`` set the search stops early and reports ``exceeds_cap`` when
    no separator of size <= cap exists.
    """
    n = inst.n
    if method == "enumerate":
        return _opt_by_enumeration(inst, cap, node_budget)
    if method != "branch":
        raise ValueError(f"unknown method {method!r}")

    limit = n if cap is None else min(cap, n)
    best_size = limit + 1
    best_mask: int | None = None
    nodes = 0

    def search(selected: int, forbidden: int, size: int) -> None:
        nonlocal best_size, best_mask, nodes
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceeded(f"branch-and-bound exceeded {node_budget} nodes (n={n})")
        hit = _violated_set(inst, selected)
        if not hit:
            if size < best_size:
                best_size, best_mask = size, selected
            return
        free = uncovered_mask(inst, selected)
        if size + max(1, _greedy_packing_count(inst, free)) >= best_size:
            return
        banned = forbidden
        for v in iter_bits(hit & ~forbidden):
            search(selected | 1 << v, banned, size + 1)
            banned |= 1 << v
            if size + 1 >= best_size:
                return

    search(0, 0, 0)
    if best_mask is None:
        return OptResult(None, None, exceeds_cap=True)
    return OptResult(best_size, SearchPoint(best_mask, n))


def _opt_by_enumeration(inst: Instance, cap: int | None, node_budget: int) -> OptResult:
    n = inst.n
    limit = n if cap is None else min(cap, n)
    tried = 0
    for k in range(limit + 1):
        for combo in itertools.combinations(range(n), k):
            tried += 1
            if tried > node_budget:
                raise BudgetExceeded(f"subset enumeration exceeded {node_budget} subsets")
            m = mask_of(combo)
            if uncovered_mask(inst, m) == 0:
                return OptResult(k, SearchPoint(m, n))
    return OptResult(None, None, exceeds_cap=True)


def verify_packing(inst: Instance, p: Packing | Sequence[Iterable[int]]) -> bool:
    parts = p.parts if isinstance(p, Packing) else tuple(frozenset(q) for q in p)
    g = inst.graph
    used = 0
    for part in parts:
        if any(not 0 <= v < g.n for v in part):
            return False
        m = mask_of(part)
        if m & used or len(part) < inst.w + 1 or not is_connected_mask(g, m):
            return False
        used |= m
    return True


def max_packing_mask(
    inst: Instance,
    alive: int | None = None,
    node_budget: int = 2_000_000,
    upper_bound: int | None = None,
) -> tuple[int, list[int]]:
    """Maximum (W+1)-packing of ``G[alive]``; returns (size, parts as masks).

    Any maximal packing meets every connected (W+1)-set, so we branch on which
    vertex of one such set is covered and by which part.  Part sets of exactly
    W+1 vertices suffice since larger connected parts contain one.  The search
    stops as soon as it meets ``upper_bound`` (when the caller knows one).
    """
    g = inst.graph
    size = inst.w + 1
    if alive is None:
        alive = g.full_mask
    memo: dict[int, tuple[int, tuple[int, ...]]] = {}
    nodes = 0

    def bound(free: int) -> int:
        return sum(c.bit_count() // size for c in components_mask(g, free))

    def best(free: int) -> tuple[int, tuple[int, ...]]:
        nonlocal nodes
        if free in memo:
            return memo[free]
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceeded(f"packing search exceeded {node_budget} nodes")
        seed = _violated_set(inst, g.full_mask & ~free)
        if not seed:
            memo[free] = (0, ())
            return memo[free]
        top = bound(free)
        result: tuple[int, tuple[int, ...]] = (0, ())
        banned = 0
        for v in iter_bits(seed):
            region = free & ~banned
            for part in iter_connected_masks_containing(g, v, size, region):
                sub_n, sub_parts = best(region & ~part)
                if sub_n + 1 > result[0]:
                    result = (sub_n + 1, (part,) + sub_parts)
                    if result[0] >= top:
                        memo[free] = result
                        return result
                    if free == alive and upper_bound is not None and result[0] >= upper_bound:
                        return result
            banned |= 1 << v
        memo[free] = result
        return result

    count, parts = best(alive)
    return count, list(parts)


def max_packing_brute(
    inst: Instance, node_budget: int = 2_000_000, upper_bound: int | None = None
) -> int:
    return max_packing_mask(inst, node_budget=node_budget, upper_bound=upper_bound)[0]


def max_packing(inst: Instance, node_budget: int = 2_000_000) -> Packing:
    _, parts = max_packing_mask(inst, node_budget=node_budget)
    return Packing(tuple(set_of(p) for p in parts))
