from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete, cycle, graph, instances, path, star
from wsep.separator import (
    BudgetExceeded,
    Instance,
    Packing,
    SearchPoint,
    brute_force_opt,
    is_w_separator,
    max_packing,
    max_packing_brute,
    uncovered,
    verify_packing,
)
from wsep.verify import vertex_cover_number

P3 = path(3)


def test_instance_rejects_w_below_one():
    with pytest.raises(ValueError):
        Instance(P3, 0)


def test_search_point_text_form():
    x = SearchPoint.from_string("010")
    assert x.ones == {1} and str(x) == "010"
    with pytest.raises(ValueError):
        SearchPoint.from_string("012")


@pytest.mark.parametrize(
    "w, bits, expected",
    [(1, "000", {0, 1, 2}), (1, "010", set()), (2, "000", {0, 1, 2})],
)
def test_uncovered_examples(w, bits, expected):
    assert uncovered(Instance(P3, w), SearchPoint.from_string(bits)) == expected


def test_is_w_separator_examples():
    inst = Instance(P3, 1)
    assert is_w_separator(inst, SearchPoint.from_string("010"))
    assert not is_w_separator(inst, SearchPoint.from_string("100"))
    assert is_w_separator(Instance(complete(5), 1), SearchPoint.from_string("11111"))


def test_length_mismatch_is_an_error():
    with pytest.raises(ValueError):
        uncovered(Instance(P3, 1), SearchPoint.from_string("01"))


@given(instances(max_n=8), st.data())
def test_separator_iff_nothing_uncovered_and_monotone(inst, data):
    mask = data.draw(st.integers(0, (1 << inst.n) - 1))
    x = SearchPoint(mask, inst.n)
    u = uncovered(inst, x)
    assert is_w_separator(inst, x) == (not u)
    v = data.draw(st.integers(0, inst.n - 1))
    bigger = SearchPoint(mask | 1 << v, inst.n)
    assert uncovered(inst, bigger) <= u


@pytest.mark.parametrize(
    "g, w, opt",
    [(path(5), 1, 2), (complete(4), 1, 3), (P3, 2, 1), (cycle(6), 2, 2), (graph(3, []), 1, 0)],
)
def test_brute_force_opt_examples(g, w, opt):
    inst = Instance(g, w)
    res = brute_force_opt(inst)
    assert res.opt == opt
    assert len(res.witness.ones) == opt and is_w_separator(inst, res.witness)
    assert brute_force_opt(inst, method="enumerate").opt == opt


def test_cap_reports_excess():
    res = brute_force_opt(Instance(complete(4), 1), cap=2)
    assert res.exceeds_cap and res.opt is None
    assert brute_force_opt(Instance(complete(4), 1), cap=3).opt == 3


def test_budget_is_explicit():
    with pytest.raises(BudgetExceeded):
        brute_force_opt(Instance(complete(9), 1), node_budget=5)


@settings(max_examples=80)
@given(instances(max_n=8))
def test_branching_matches_enumeration(inst):
    assert brute_force_opt(inst).opt == brute_force_opt(inst, method="enumerate").opt


@settings(max_examples=80)
@given(instances(max_n=8, max_w=1))
def test_w1_is_vertex_cover(inst):
    assert brute_force_opt(inst).opt == vertex_cover_number(inst.graph)


def test_verify_packing_examples():
    assert verify_packing(Instance(star(2), 1), Packing((frozenset({0, 1}),)))
    assert not verify_packing(Instance(P3, 1), [{0, 1}, {1, 2}])
    assert not verify_packing(Instance(P3, 1), [{0, 2}])
    assert not verify_packing(Instance(P3, 2), [{0, 1}])


@pytest.mark.parametrize("g, w, size", [(path(4), 1, 2), (complete(3), 1, 1), (P3, 2, 1), (cycle(9), 2, 3)])
def test_max_packing_examples(g, w, size):
    inst = Instance(g, w)
    assert max_packing_brute(inst) == size
    p = max_packing(inst)
    assert len(p) == size and verify_packing(inst, p)


@settings(max_examples=80)
@given(instances(max_n=8))
def test_packing_lower_bounds_opt(inst):
    assert max_packing_brute(inst) <= brute_force_opt(inst).opt
