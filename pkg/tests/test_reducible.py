from __future__ import annotations

import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from conftest import complete, disjoint, graph, instances, path, star
from wsep.generators import GeneratorSpec, generate
from wsep.graph import enumerate_connected_subgraphs, iter_bits, mask_of
from wsep.lp import lp_value, persistent_ones
from wsep.reducible import (
    ReduciblePair,
    boosted_flow_value,
    crown_reduce,
    cycle_cancel,
    degree_reduce,
    exhaustive_strict_heads,
    find_strictly_reducible_pair,
    is_minimal,
    kernel_size_check,
    minimize_pair,
    normalize_assignment,
    packing_after_deletion,
    packing_from_pair,
    reducible_by_enumeration,
    reducible_sequence,
    verify_reducible_pair,
)
from wsep.separator import Instance, brute_force_opt, max_packing_brute, verify_packing

K12 = Instance(star(2), 1)
# centers 0 and 3, private leaves 1, 2 and 4, 5
DOUBLE_STAR = Instance(graph(6, [(0, 1), (0, 2), (3, 4), (3, 5)]), 1)


def crown_instances(count: int = 40, max_head: int = 3):
    rnd = np.random.default_rng(5)
    out = []
    while len(out) < count:
        w = int(rnd.integers(1, 4))
        h = int(rnd.integers(1, max_head + 1))
        size = int(rnd.integers(1, w + 1))
        comps = -(-(h * (2 * w - 1) + 1) // size) + int(rnd.integers(0, 2))
        params = {"w": w, "head_size": h, "crown_components": comps, "crown_size": size,
                  "attachment": int(rnd.integers(1, h + 1)), "rest_n": int(rnd.integers(0, 3))}
        try:
            out.append(generate(GeneratorSpec("crown", params, seed=len(out)))[0])
        except ValueError:
            continue
    return out


# --- verification ------------------------------------------------


def test_star_is_strictly_reducible():
    pair = verify_reducible_pair(K12, {0}, {1, 2})
    assert pair.strict and pair.strict_witness == 0
    assert pair.assignment == {(0, 0): 1, (1, 0): 1}
    assert pair.head_mass(0) == 2


def test_connected_crown_too_large():
    assert verify_reducible_pair(Instance(path(3), 1), {0}, {1, 2}) is None
    assert verify_reducible_pair(Instance(complete(3), 1), {0}, {1, 2}) is None


def test_crown_must_be_closed_and_disjoint():
    inst = Instance(path(4), 1)
    assert verify_reducible_pair(inst, {1}, {0, 2}) is None  # N(2) contains 3
    assert verify_reducible_pair(inst, {1}, {1, 0}) is None


def test_non_strict_pair():
    # one head, one leaf: mass 1 = 2W-1 but no spare unit
    pair = verify_reducible_pair(Instance(path(2), 1), {0}, {1})
    assert pair is not None and not pair.strict


def test_certificate_json_roundtrip():
    pair = verify_reducible_pair(K12, {0}, {1, 2})
    back = ReduciblePair.from_json(json.loads(pair.dumps()))
    assert back == pair and back.assignment == pair.assignment


@settings(max_examples=40, deadline=None)
@given(instances(max_n=6), st.data())
def test_flow_agrees_with_enumeration(inst, data):
    labels = data.draw(st.lists(st.integers(0, 2), min_size=inst.n, max_size=inst.n))
    a = [v for v in range(inst.n) if labels[v] == 1]
    b = [v for v in range(inst.n) if labels[v] == 2]
    pair = verify_reducible_pair(inst, a, b)
    assert (pair is not None, pair is not None and pair.strict) == reducible_by_enumeration(inst, a, b)
    if pair is not None:
        for (ci, h), units in pair.assignment.items():
            assert units > 0 and any(inst.graph.nbr[v] >> h & 1 for v in pair.components[ci])
        for ci, c in enumerate(pair.components):
            assert sum(u for (cj, _), u in pair.assignment.items() if cj == ci) <= len(c)
        assert all(pair.head_mass(h) >= 2 * inst.w - 1 for h in pair.head)
        if pair.strict:
            assert pair.head_mass(pair.strict_witness) >= 2 * inst.w


# --- discovery ----------------------------------------------------


def test_find_examples():
    pair = find_strictly_reducible_pair(Instance(star(3), 1))
    assert pair.head == {0} and pair.crown == {1, 2, 3}
    assert find_strictly_reducible_pair(Instance(complete(3), 1)) is None
    two = Instance(disjoint(star(3), star(3)), 1)
    found = find_strictly_reducible_pair(two)
    assert found.head in ({0}, {4}, {0, 4})
    assert verify_reducible_pair(two, found.head, found.crown).strict


@settings(max_examples=60, deadline=None)
@given(instances(max_n=7))
def test_find_is_complete_on_small_graphs(inst):
    found = find_strictly_reducible_pair(inst)
    assert (found is not None) == bool(exhaustive_strict_heads(inst))


def test_minimize_examples():
    pair = verify_reducible_pair(K12, {0}, {1, 2})
    assert minimize_pair(K12, pair) == pair
    two = Instance(disjoint(star(3), star(3)), 1)
    both = verify_reducible_pair(two, {0, 4}, {1, 2, 3, 5, 6, 7})
    small = minimize_pair(two, both)
    assert len(small.head) == 1 and is_minimal(two, small)
    assert not is_minimal(two, both)


def test_greedy_minimization_is_flagged():
    inst = Instance(disjoint(*[star(2)] * 3), 1)
    pair = verify_reducible_pair(inst, {0, 3, 6}, {1, 2, 4, 5, 7, 8})
    small = minimize_pair(inst, pair, exhaustive_limit=1)
    assert small.greedy_minimal and len(small.head) == 1


def test_sequence_examples():
    assert len(reducible_sequence(K12)) == 1
    assert reducible_sequence(Instance(complete(3), 1)) == []
    mixed = Instance(disjoint(star(2), complete(3)), 1)
    seq = reducible_sequence(mixed)
    assert [p.head for p in seq] == [{0}]


@settings(max_examples=40, deadline=None)
@given(instances(max_n=7))
def test_sequence_pairs_disjoint_and_exhausted(inst):
    seq = reducible_sequence(inst)
    used = 0
    for p in seq:
        m = mask_of(p.head)
        assert not m & used
        used |= m
    assert exhaustive_strict_heads(inst, inst.graph.full_mask & ~used) == []


# --- minimal pair properties ------------------------------------------------


def _minimal_pairs(inst):
    out = []
    pair = find_strictly_reducible_pair(inst)
    if pair is not None:
        out.append(minimize_pair(inst, pair))
    return out


@pytest.mark.parametrize("inst", crown_instances(30), ids=lambda i: f"n{i.n}w{i.w}")
def test_minimal_pair_properties(inst):
    quota = 2 * inst.w - 1
    for pair in _minimal_pairs(inst):
        # every head can be the one receiving the spare unit
        for a in pair.head:
            assert boosted_flow_value(inst, pair, a) == len(pair.head) * quota + 1
        # every head subset sees enough crown
        heads = sorted(pair.head)
        for r in range(1, len(heads) + 1):
            for sub in itertools.combinations(heads, r):
                sm = mask_of(sub)
                mass = sum(len(c) for c in pair.components if any(inst.graph.nbr[v] & sm for v in c))
                assert mass >= r * quota + 1
        # heads are persistent ones of the LP
        assert pair.head <= persistent_ones(inst)


def _max_y(inst: Instance, u: int) -> float:
    rows = [sorted(s) for s in enumerate_connected_subgraphs(inst.graph, inst.w + 1)]
    a = np.zeros((len(rows), inst.n))
    for i, s in enumerate(rows):
        a[i, s] = -1
    c = np.zeros(inst.n)
    c[u] = -1
    value = float(lp_value(inst).value)
    res = linprog(c, A_ub=a, b_ub=-np.ones(len(rows)), A_eq=np.ones((1, inst.n)), b_eq=[value],
                  bounds=(0, None), method="highs")
    return -res.fun


@pytest.mark.parametrize("inst", crown_instances(12), ids=lambda i: f"n{i.n}w{i.w}")
def test_crown_vertices_are_zero_in_every_optimum(inst):
    for pair in _minimal_pairs(inst):
        for u in pair.crown:
            assert _max_y(inst, u) < 1e-7


@pytest.mark.parametrize("inst", crown_instances(20, max_head=4), ids=lambda i: f"n{i.n}w{i.w}")
def test_crown_stays_crown_after_head_deletion(inst):
    for pair in _minimal_pairs(inst):
        region = mask_of(pair.head | pair.crown)
        heads = sorted(pair.head)
        for r in range(1, len(heads)):
            for gone in itertools.combinations(heads, r):
                rest = region & ~mask_of(gone)
                sub, labels = inst.graph.induced(iter_bits(rest))
                seq = reducible_sequence(Instance(sub, inst.w))
                found = set().union(*({labels[v] for v in p.head} for p in seq))
                assert found == pair.head - set(gone)


# --- reductions ----------------------------------------------------------


def test_crown_reduce_examples():
    pair = verify_reducible_pair(K12, {0}, {1, 2})
    red = crown_reduce(K12, 1, pair)
    assert red.instance.n == 0 and red.k == 0 and not red.no_instance
    mixed = Instance(disjoint(star(2), complete(3)), 1)
    red = crown_reduce(mixed, 2, verify_reducible_pair(mixed, {0}, {1, 2}))
    assert red.instance.graph == complete(3) and red.k == 1 and red.labels == (3, 4, 5)
    assert crown_reduce(K12, 0, pair).no_instance


def test_crown_reduce_rejects_foreign_pair():
    pair = verify_reducible_pair(K12, {0}, {1, 2})
    with pytest.raises(ValueError):
        crown_reduce(Instance(path(3), 1), 1, pair)


@pytest.mark.parametrize("inst", crown_instances(25), ids=lambda i: f"n{i.n}w{i.w}")
def test_crown_reduction_keeps_opt(inst):
    opt = brute_force_opt(inst).opt
    for pair in reducible_sequence(inst)[:1]:
        red = crown_reduce(inst, opt, pair)
        assert brute_force_opt(red.instance).opt == opt - len(pair.head) == red.k


def test_degree_reduce_examples():
    red = degree_reduce(Instance(star(4), 1), 1)
    assert red.forced == {0} and red.k == 0 and red.instance.graph.edge_count == 0 and red.instance.n == 4
    red = degree_reduce(Instance(path(3), 1), 1)
    assert red.forced == frozenset() and red.k == 1
    red = degree_reduce(Instance(complete(5), 1), 1)
    assert red.no_instance and len(red.forced) == 2


def test_degree_reduce_needs_budget():
    with pytest.raises(ValueError):
        degree_reduce(K12, -1)


def test_kernel_examples():
    assert kernel_size_check(Instance(path(3), 1), 1)
    assert kernel_size_check(Instance(graph(0, []), 2), 0)


@settings(max_examples=60, deadline=None)
@given(instances(max_n=9))
def test_degree_rule_is_safe_and_kernel_bounded(inst):
    opt = brute_force_opt(inst).opt
    red = degree_reduce(inst, opt)
    assert not red.no_instance
    assert brute_force_opt(red.instance, cap=red.k).opt is not None
    assert kernel_size_check(red.instance, red.k)
    if opt > 0:
        worse = degree_reduce(inst, opt - 1)
        assert worse.no_instance or brute_force_opt(worse.instance, cap=worse.k).exceeds_cap


# --- packings -----------------------------------------------------------------


def test_packing_from_star():
    pair = verify_reducible_pair(K12, {0}, {1, 2})
    p = packing_from_pair(K12, pair)
    assert p.parts in (({0, 1},), ({0, 2},), ({0, 1, 2},))


def test_packing_from_double_star():
    pair = verify_reducible_pair(DOUBLE_STAR, {0, 3}, {1, 2, 4, 5})
    p = packing_from_pair(DOUBLE_STAR, pair)
    assert len(p) == 2 and verify_packing(DOUBLE_STAR, p)


def test_single_head_part_holds_everything_needed():
    inst = Instance(star(5), 3)
    pair = verify_reducible_pair(inst, {0}, {1, 2, 3, 4, 5})
    (part,) = packing_from_pair(inst, pair).parts
    assert 0 in part and len(part) >= 2 * inst.w


def test_cycle_cancel_keeps_totals_and_leaves_a_forest():
    # a 4-cycle C0-a1-C1-a2-C0 with uneven weights
    weights = {(0, 1): 2, (1, 1): 1, (1, 2): 2, (0, 2): 1}
    out = cycle_cancel(weights)
    for h in (1, 2):
        assert sum(u for (_, a), u in out.items() if a == h) == 3
    for c in (0, 1):
        assert sum(u for (ci, _), u in out.items() if ci == c) <= 3
    assert out == {(0, 1): 3, (1, 2): 3}  # both weight-1 edges vanish together


@pytest.mark.parametrize("inst", crown_instances(30, max_head=4), ids=lambda i: f"n{i.n}w{i.w}")
def test_cycle_cancel_on_real_assignments(inst):
    for pair in _minimal_pairs(inst):
        g = normalize_assignment(pair, 2 * inst.w - 1)
        out = cycle_cancel(g)
        for h in pair.head:
            assert sum(u for (_, a), u in out.items() if a == h) == 2 * inst.w - 1
        for ci, c in enumerate(pair.components):
            assert sum(u for (cj, _), u in out.items() if cj == ci) <= len(c)
        nodes = {("C", ci) for ci, _ in out} | {("A", a) for _, a in out}
        # forest: edges < nodes within every connected piece; check globally via union-find
        parent = {x: x for x in nodes}

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for ci, a in out:
            ra, rb = find(("C", ci)), find(("A", a))
            assert ra != rb
            parent[ra] = rb


def test_packing_after_deleting_a_star_leaf():
    pair = verify_reducible_pair(K12, {0}, {1, 2})
    p = packing_after_deletion(K12, pair, {1})
    assert p.parts == (frozenset({0, 2}),)


def test_deletion_needs_minimal_pair():
    pair = verify_reducible_pair(DOUBLE_STAR, {0, 3}, {1, 2, 4, 5})
    with pytest.raises(ValueError):
        packing_after_deletion(DOUBLE_STAR, pair, {1})
    single = verify_reducible_pair(DOUBLE_STAR, {0}, {1, 2})
    assert len(packing_after_deletion(DOUBLE_STAR, single, {1})) == 1


def test_deletion_bound_fails_without_minimality():
    # head 0 owns two leaves, head 3 one leaf: strict but not minimal
    inst = Instance(graph(5, [(0, 1), (0, 2), (3, 4)]), 1)
    pair = verify_reducible_pair(inst, {0, 3}, {1, 2, 4})
    assert pair.strict and not is_minimal(inst, pair)
    sub = inst.graph.induced([0, 1, 2, 3])[0]
    assert max_packing_brute(Instance(sub, 1)) == 1 < 2 - 1 + 1


@pytest.mark.parametrize(
    "s", [set(), {0, 1, 2}, {0}, {7}, {1, 0, 2}]
)
def test_deletion_preconditions(s):
    pair = verify_reducible_pair(K12, {0}, {1, 2})
    with pytest.raises(ValueError):
        packing_after_deletion(K12, pair, s)


@pytest.mark.parametrize("inst", crown_instances(25, max_head=4), ids=lambda i: f"n{i.n}w{i.w}")
def test_packing_after_deletion_bound(inst):
    for pair in _minimal_pairs(inst):
        region = sorted(pair.head | pair.crown)
        for r in range(1, len(pair.head) + 1):
            for s in itertools.islice(itertools.combinations(region, r), 40):
                if not set(s) & pair.crown or len(s) == len(region):
                    continue
                p = packing_after_deletion(inst, pair, s)
                assert len(p) >= len(pair.head) - r + 1
                assert verify_packing(inst, p) and not any(set(s) & part for part in p.parts)
                assert all(part <= set(region) for part in p.parts)


def test_pair_json_needs_only_head_and_crown():
    inst = Instance(path(3), 1)
    given = ReduciblePair.from_json({"head": [1], "crown": [0, 2]})
    pair = verify_reducible_pair(inst, given.head, given.crown)
    assert pair is not None and pair.strict
    assert ReduciblePair.from_json(pair.to_json()) == pair
