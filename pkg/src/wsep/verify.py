"""Exhaustive cross-checks over small graphs.

Each check walks a family of instances and stops at the first counterexample,
reporting it as an edge list together with a command that reproduces it.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from .emo import StopSpec, population_bound, run
from .graph import (
    Graph,
    components_mask,
    dump_graph,
    enumerate_connected_subgraphs,
    is_connected_mask,
    iter_bits,
    load_graph,
    mask_of,
    neighborhood_mask,
)
from .lp import is_feasible_fractional, lp_objective_mask, lp_superadditivity_check, lp_value, persistent_ones_mask
from .reducible import (
    boosted_flow_value,
    exhaustive_strict_heads,
    find_strictly_reducible_pair,
    is_minimal,
    minimize_pair,
    reducible_by_enumeration,
    verify_reducible_pair,
)
from .separator import Instance, brute_force_opt, max_packing_brute, uncovered_mask

SCOPES = ("graph", "lp", "reducible", "emo", "all")
ATLAS_MAX = 7


# --- instance families ------------------------------------------------------


def atlas_graphs(max_n: int, min_n: int = 1) -> Iterator[Graph]:
    """One graph per isomorphism class on min_n..max_n vertices (max_n <= 7)."""
    if max_n > ATLAS_MAX:
        raise ValueError(f"the graph atlas stops at {ATLAS_MAX} vertices")
    import networkx as nx

    for g in nx.graph_atlas_g():
        n = g.number_of_nodes()
        if min_n <= n <= max_n:
            yield Graph.from_edges(n, list(g.edges()))


def labeled_graphs(max_n: int, min_n: int = 1) -> Iterator[Graph]:
    """Every labeled graph on min_n..max_n vertices."""
    for n in range(min_n, max_n + 1):
        pairs = list(itertools.combinations(range(n), 2))
        for bits in range(1 << len(pairs)):
            yield Graph.from_edges(n, [e for i, e in enumerate(pairs) if bits >> i & 1])


def graph_family(size_limit: int, labeled: bool = False, min_n: int = 1) -> Iterator[Graph]:
    return labeled_graphs(size_limit, min_n) if labeled else atlas_graphs(size_limit, min_n)


def vertex_cover_number(g: Graph) -> int:
    """Minimum vertex cover by subset enumeration, written against the edge list only."""
    edges = list(g.edges())
    for k in range(g.n + 1):
        for cover in itertools.combinations(range(g.n), k):
            chosen = set(cover)
            if all(a in chosen or b in chosen for a, b in edges):
                return k
    return g.n


def _rng_for(g: Graph, w: int, salt: str) -> random.Random:
    return random.Random(f"{salt}:{w}:{g.n}:{sorted(g.edges())}")


# --- reporting ----------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    instances: int = 0
    counterexample: str | None = None
    reproduce: str | None = None

    @property
    def passed(self) -> bool:
        return self.counterexample is None

    def line(self) -> str:
        if self.passed:
            return f"PASS {self.name} ({self.instances} instances)"
        return f"FAIL {self.name}: {self.counterexample}\n     reproduce: {self.reproduce}"


@dataclass
class Report:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def format(self) -> str:
        return "\n".join(c.line() for c in self.checks)


Check = Callable[[Instance], str | None]


def run_check(
    name: str,
    graphs: Iterable[Graph],
    ws: Iterable[int],
    check: Check,
    reproduce: str = "",
) -> CheckResult:
    res = CheckResult(name)
    ws = tuple(ws)
    for g in graphs:
        for w in ws:
            inst = Instance(g, w)
            res.instances += 1
            problem = check(inst)
            if problem is not None:
                res.counterexample = f"n={g.n} W={w} edges={sorted(g.edges())}: {problem}"
                res.reproduce = reproduce
                return res
    return res


# --- individual properties ---------------------------------------------------------


def check_roundtrip(inst: Instance) -> str | None:
    g = inst.graph
    back = load_graph(dump_graph(g))
    if back != g:
        return "dump/load changed the graph"
    parts = components_mask(g, g.full_mask)
    if sum(parts) != g.full_mask or any(not is_connected_mask(g, c) for c in parts):
        return "components do not partition V into connected sets"
    return None


def check_connected_enumeration(inst: Instance) -> str | None:
    g = inst.graph
    for size in range(1, g.n + 1):
        fast = {mask_of(s) for s in enumerate_connected_subgraphs(g, size)}
        slow = {mask_of(c) for c in itertools.combinations(range(g.n), size) if is_connected_mask(g, mask_of(c))}
        if fast != slow:
            return f"connected {size}-sets differ from brute force"
    return None


def check_lp_bounds(inst: Instance) -> str | None:
    """LP solution feasible and optimal-looking; packing <= LP <= OPT."""
    res = lp_value(inst)
    if not is_feasible_fractional(inst, res.solution):
        return "LP solution violates a constraint"
    if sum(res.solution.values.values(), Fraction(0)) != res.value:
        return "LP objective differs from the solution's total"
    opt = brute_force_opt(inst).opt
    if res.value > opt:
        return f"LP {res.value} > OPT {opt}"
    pack = max_packing_brute(inst)
    if pack > res.value:
        return f"packing {pack} > LP {res.value}"
    return None


def check_lp_lower_bound(inst: Instance, samples: int = 100) -> str | None:
    """LP(G) <= |X1| + LP(G[u(X)]) for random search points."""
    rnd = _rng_for(inst.graph, inst.w, "lower")
    whole = lp_objective_mask(inst, inst.graph.full_mask)
    for _ in range(samples):
        x = rnd.getrandbits(inst.n) if inst.n else 0
        u = uncovered_mask(inst, x)
        if whole > x.bit_count() + lp_objective_mask(inst, u):
            return f"lower bound fails for X={x:0{inst.n}b}"
    return None


def check_superadditivity(inst: Instance, samples: int = 20) -> str | None:
    rnd = _rng_for(inst.graph, inst.w, "split")
    for _ in range(samples):
        m = rnd.getrandbits(inst.n) if inst.n else 0
        p1 = [v for v in range(inst.n) if m >> v & 1]
        p2 = [v for v in range(inst.n) if not m >> v & 1]
        if not lp_superadditivity_check(inst, p1, p2):
            return f"superadditivity fails for part {p1}"
    return None


def check_flow_vs_enumeration(inst: Instance) -> str | None:
    """All disjoint (A, B): the flow verifier agrees with direct assignment search."""
    n = inst.n
    for labels in itertools.product(range(3), repeat=n):
        a = [v for v in range(n) if labels[v] == 1]
        b = [v for v in range(n) if labels[v] == 2]
        pair = verify_reducible_pair(inst, a, b)
        flow = (pair is not None, pair is not None and pair.strict)
        brute = reducible_by_enumeration(inst, a, b)
        if flow != brute:
            return f"A={a} B={b}: flow says {flow}, enumeration says {brute}"
    return None


def minimal_strict_pairs(inst: Instance):
    """Every minimal strictly reducible pair, each with the largest crown for its head."""
    strict = exhaustive_strict_heads(inst)
    strict_set = set(strict)
    out = []
    for h in strict:
        if any(sub != h and (sub & h) == sub for sub in strict_set):
            continue
        comps = [c for c in components_mask(inst.graph, inst.graph.full_mask & ~h) if c.bit_count() <= inst.w]
        crown = sum(c for c in comps if neighborhood_mask(inst.graph, c) & h)
        pair = verify_reducible_pair(inst, h, crown)
        out.append(pair)
    return out


def size_neighbourhood_ok(inst: Instance, pair) -> bool:
    heads = sorted(pair.head)
    g = inst.graph
    for r in range(1, len(heads) + 1):
        for sub in itertools.combinations(heads, r):
            sm = mask_of(sub)
            mass = sum(len(c) for c in pair.components if any(g.nbr[v] & sm for v in c))
            if mass < r * (2 * inst.w - 1) + 1:
                return False
    return True


def check_minimal_pairs(inst: Instance) -> str | None:
    """Every head can take the spare unit, and every head subset sees enough crown."""
    pairs = minimal_strict_pairs(inst)
    found = find_strictly_reducible_pair(inst)
    if (found is None) != (not pairs):
        return "finder disagrees with exhaustive search about existence"
    if found is not None:
        small = minimize_pair(inst, found)
        if not is_minimal(inst, small):
            return f"minimize_pair returned a non-minimal head {sorted(small.head)}"
        pairs.append(small)
    ones = persistent_ones_mask(inst, inst.graph.full_mask) if pairs else 0
    quota = 2 * inst.w - 1
    for pair in pairs:
        for a in pair.head:
            if boosted_flow_value(inst, pair, a) != len(pair.head) * quota + 1:
                return f"head {a} of {sorted(pair.head)} cannot take a spare unit"
        if not size_neighbourhood_ok(inst, pair):
            return f"head subset of {sorted(pair.head)} sees too little crown"
        if mask_of(pair.head) & ~ones:
            return f"head {sorted(pair.head)} not all persistent ones"
    return None


def check_crown_safety(inst: Instance) -> str | None:
    pair = find_strictly_reducible_pair(inst)
    if pair is None:
        return None
    opt = brute_force_opt(inst).opt
    rest = inst.graph.full_mask & ~mask_of(pair.head | pair.crown)
    sub, _ = inst.graph.induced(iter_bits(rest))
    sub_opt = brute_force_opt(Instance(sub, inst.w)).opt
    if opt != len(pair.head) + sub_opt:
        return f"OPT {opt} != |A| {len(pair.head)} + OPT(rest) {sub_opt}"
    return None


def check_oracle_equivalence(
    inst: Instance, seeds: int = 5, budget: int = 1_000_000
) -> str | None:
    """semo-alt with f2 reaches OPT under one of the pinned seeds; W=1 matches vertex cover."""
    opt = brute_force_opt(inst).opt
    if inst.w == 1 and opt != vertex_cover_number(inst.graph):
        return f"OPT {opt} differs from vertex cover number"
    for seed in range(seeds):
        trace = run(inst, "f2", "semo-alt", seed, StopSpec(budget, ("optimum",)), opt=opt)
        if trace.hit("optimum") is not None:
            return None
    return f"no seed reached OPT={opt} within {budget} iterations"


def check_archive_laws(inst: Instance, budget: int = 2_000) -> str | None:
    problems: list[str] = []
    for fitness in ("f1", "f2", "f3"):
        bound = population_bound(inst.n, fitness)

        def observe(t, pop, trace):
            if not problems and (len(pop) > bound or not pop.is_pairwise_nondominated()):
                problems.append(f"{fitness} archive broken at iteration {t}")

        run(inst, fitness, "semo-alt", 0, StopSpec(budget), observer=observe)
        if problems:
            return problems[0]
    return None


# --- suites ----------------------------------------------------------------


def verify_suite(scope: str, size_limit: int, labeled: bool = False, ws: Iterable[int] = (1, 2)) -> Report:
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}; expected one of {SCOPES}")
    if size_limit < 1:
        raise ValueError("size_limit must be >= 1")
    ws = tuple(ws)
    scopes = ("graph", "lp", "reducible", "emo") if scope == "all" else (scope,)
    flag = " --labeled" if labeled else ""
    report = Report()

    def add(sc: str, name: str, check: Check, limit: int = size_limit):
        cmd = f"wsep verify --scope {sc} --size-limit {size_limit}{flag} --w {','.join(map(str, ws))}"
        report.checks.append(run_check(name, graph_family(limit, labeled), ws, check, cmd))

    for sc in scopes:
        if sc == "graph":
            add(sc, "graph: dump/load and components", check_roundtrip)
            add(sc, "graph: connected subgraph enumeration", check_connected_enumeration)
        elif sc == "lp":
            add(sc, "lp: packing <= LP <= OPT, solution feasible", check_lp_bounds)
            add(sc, "lp: LP(G) <= |X1| + LP(G[u(X)])", check_lp_lower_bound)
            add(sc, "lp: superadditivity over partitions", check_superadditivity)
        elif sc == "reducible":
            add(sc, "reducible: flow verifier = assignment enumeration", check_flow_vs_enumeration,
                min(size_limit, 6))
            add(sc, "reducible: minimal pair properties", check_minimal_pairs)
            add(sc, "reducible: crown reduction keeps OPT - |A|", check_crown_safety)
        elif sc == "emo":
            add(sc, "emo: semo-alt/f2 reaches OPT", check_oracle_equivalence)
            add(sc, "emo: archive non-dominated and bounded", check_archive_laws)
    return report
