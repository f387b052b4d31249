from __future__ import annotations

import itertools
import json
import threading
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from conftest import complete, cycle, graph, instances, path, star
from wsep.graph import enumerate_connected_subgraphs
from wsep.lp import (
    LpMemo,
    PersistentOneError,
    avoid_ones_solution,
    clear_caches,
    is_feasible_fractional,
    lp_dump,
    lp_superadditivity_check,
    lp_value,
    persistent_ones,
)
from wsep.separator import Instance, brute_force_opt, uncovered_mask
from wsep.simplex import CoveringLP, UnboundedDual

F = Fraction


def test_simplex_small_covering_lp():
    # min y0 + 2 y1  s.t.  y0 + y1 >= 1,  y1 >= 1/2
    lp = CoveringLP([1, 2])
    lp.add_row({0: 1, 1: 1}, 1)
    lp.add_row({1: 1}, F(1, 2))
    lp.optimize()
    assert lp.multipliers() == [F(1, 2), F(1, 2)]
    assert lp.objective() == F(3, 2)
    # dual optimum matches the primal value
    assert sum(z * r[1] for z, r in zip(lp.dual_values(), lp.rows)) == F(3, 2)


def test_simplex_infeasible_rows():
    lp = CoveringLP([1])
    lp.add_row({0: 0}, 1)
    with pytest.raises(UnboundedDual):
        lp.optimize()


def test_simplex_rejects_negative_cost():
    with pytest.raises(ValueError):
        CoveringLP([1, -1])


@pytest.mark.parametrize(
    "g, w, value",
    [
        (complete(3), 1, F(3, 2)),
        (path(3), 1, F(1)),
        (cycle(4), 1, F(2)),
        (cycle(5), 2, F(5, 3)),
        (complete(4), 2, F(4, 3)),
        (graph(4, []), 1, F(0)),
    ],
)
def test_lp_values(g, w, value):
    res = lp_value(Instance(g, w))
    assert res.value == value
    assert res.solution.objective == value
    assert is_feasible_fractional(Instance(g, w), res.solution)


def test_p3_solution_puts_weight_on_middle():
    assert lp_value(Instance(path(3), 1)).solution.values == {0: 0, 1: 1, 2: 0}


def test_restriction_with_small_components_is_zero():
    assert lp_value(Instance(path(5), 1), {0, 2, 4}).value == 0
    assert lp_value(Instance(path(5), 1), 0b00011).value == 1


def test_restriction_outside_graph_is_an_error():
    with pytest.raises(ValueError):
        lp_value(Instance(path(3), 1), {5})


def _scipy_lp(inst: Instance) -> float:
    rows = [sorted(s) for s in enumerate_connected_subgraphs(inst.graph, inst.w + 1)] if inst.n > inst.w else []
    if not rows:
        return 0.0
    a = np.zeros((len(rows), inst.n))
    for i, s in enumerate(rows):
        a[i, s] = -1
    res = linprog(np.ones(inst.n), A_ub=a, b_ub=-np.ones(len(rows)), bounds=(0, None), method="highs")
    return res.fun


@settings(max_examples=60, deadline=None)
@given(instances(max_n=9))
def test_exact_lp_agrees_with_floating_point_solver(inst):
    res = lp_value(inst)
    assert abs(float(res.value) - _scipy_lp(inst)) < 1e-7
    assert is_feasible_fractional(inst, res.solution)


@settings(max_examples=60, deadline=None)
@given(instances(max_n=8))
def test_lp_below_opt(inst):
    assert lp_value(inst).value <= brute_force_opt(inst).opt


@settings(max_examples=60, deadline=None)
@given(instances(max_n=8), st.data())
def test_lower_bound_and_restriction_consistency(inst, data):
    x = data.draw(st.integers(0, (1 << inst.n) - 1))
    u = uncovered_mask(inst, x)
    on_u = lp_value(inst, u).value
    assert lp_value(inst).value <= x.bit_count() + on_u
    assert on_u == lp_value(inst, inst.graph.full_mask & ~x).value


@pytest.mark.parametrize(
    "g, p1, p2",
    [(path(3), {0, 1}, {2}), (complete(3), {0}, {1, 2}), (graph(3, []), {0}, {1, 2})],
)
def test_superadditivity_examples(g, p1, p2):
    assert lp_superadditivity_check(Instance(g, 1), p1, p2)


def test_superadditivity_needs_a_partition():
    with pytest.raises(ValueError):
        lp_superadditivity_check(Instance(path(3), 1), {0}, {0, 1, 2})


def test_persistent_ones_examples():
    assert persistent_ones(Instance(star(2), 1)) == {0}
    assert persistent_ones(Instance(complete(3), 1)) == frozenset()
    assert persistent_ones(Instance(path(2), 2)) == frozenset()
    assert persistent_ones(Instance(path(3), 1)) == {1}


def test_avoid_ones_examples():
    assert avoid_ones_solution(Instance(complete(3), 1)).values == {0: F(1, 2), 1: F(1, 2), 2: F(1, 2)}
    assert avoid_ones_solution(Instance(graph(3, []), 1)).values == {0: 0, 1: 0, 2: 0}
    c4 = avoid_ones_solution(Instance(cycle(4), 1))
    assert c4.objective == 2 and all(y <= F(1, 2) for y in c4.values.values())


def test_avoid_ones_names_the_offender():
    with pytest.raises(PersistentOneError) as info:
        avoid_ones_solution(Instance(star(2), 1))
    assert info.value.vertex == 0


@settings(max_examples=50, deadline=None)
@given(instances(max_n=8))
def test_avoid_ones_is_optimal_and_below_one(inst):
    if persistent_ones(inst):
        return
    sol = avoid_ones_solution(inst)
    assert sol.objective == lp_value(inst).value
    assert is_feasible_fractional(inst, sol)
    assert all(y < 1 for y in sol.values.values())


@settings(max_examples=50, deadline=None)
@given(instances(max_n=8))
def test_deleting_ones_of_an_optimum_drops_the_value(inst):
    res = lp_value(inst)
    ones = [v for v, y in res.solution.values.items() if y == 1]
    for r in range(1, min(len(ones), 3) + 1):
        for sub in itertools.combinations(ones, r):
            rest = inst.graph.full_mask & ~sum(1 << v for v in sub)
            assert lp_value(inst, rest).value == res.value - r


def test_memo_and_threads():
    clear_caches()
    inst = Instance(cycle(7), 2)
    memo = LpMemo(inst)
    results = []

    def work():
        results.append(memo.value(inst.graph.full_mask))

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results == [F(7, 3)] * 4
    assert memo.has_no_persistent_ones(inst.graph.full_mask)


def test_dump_is_json_with_every_cut():
    record = json.loads(lp_dump(Instance(complete(3), 1)))
    assert record["value"] == "3/2"
    assert sorted(map(tuple, record["constraints"])) == [(0, 1), (0, 2), (1, 2)]
