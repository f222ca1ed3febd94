import random

import pytest
from hypothesis import given, settings, strategies as st

from ltau.errors import AvailabilityMismatch
from ltau.laws import Setting, _forward
from ltau.trees import (
    UNIT_VAL, BaseElem, BoxedV, DelayNode, FDelay, FOp, FRet, OpNode, PairVal, Ret, TBase,
    canonicalize_delays, delay_node, delay_normal_forms, eta, fcanon, fgrade, from_tree, grade,
    grades, handle_chi, is_canonical_node, mu, strength, tree_eq,
)

CARRIERS = {"R": ["r1", "r2"]}
R = TBase("R")


def op(d, k):
    return OpNode("o", BaseElem("R", "r1"), d, k, R)


def test_eta():
    assert eta(UNIT_VAL) == Ret(UNIT_VAL)
    assert grade(eta(UNIT_VAL)) == 0


def test_mu_left_unit():
    t = op(2, lambda b: Ret(b))
    assert tree_eq(mu(Ret(t)), t, CARRIERS)


def test_mu_over_op_adds_grades():
    inner = DelayNode(3, Ret(UNIT_VAL))
    t = op(2, lambda b: DelayNode(1, Ret(inner)))
    flat = mu(t)
    assert isinstance(flat, OpNode)
    assert grades(flat, CARRIERS) == {2 + 1 + 3}


def test_strength_at_stage_zero():
    box = BoxedV(0, BaseElem("R", "r2"))
    assert strength(box, Ret(UNIT_VAL)) == Ret(PairVal(box.payload, UNIT_VAL))


def test_strength_rejects_unavailable_resource():
    with pytest.raises(AvailabilityMismatch):
        strength(BoxedV(3, UNIT_VAL), DelayNode(2, Ret(UNIT_VAL))).cont


def test_delay_node_not_canonicalised():
    t = delay_node(0, Ret(UNIT_VAL))
    assert isinstance(t, DelayNode) and t.tau == 0 and not is_canonical_node(t)


def test_canonicalize_examples():
    v = Ret(UNIT_VAL)
    assert canonicalize_delays(DelayNode(0, v)) == v
    merged = canonicalize_delays(DelayNode(2, DelayNode(3, v)))
    assert merged.tau == 5 and merged.cont == v


def test_tree_eq_examples():
    v = Ret(UNIT_VAL)
    t = op(1, lambda b: Ret(b))
    assert tree_eq(t, t, CARRIERS)
    a, b = DelayNode(5, v), DelayNode(2, DelayNode(3, v))
    assert not tree_eq(a, b, CARRIERS)
    assert tree_eq(canonicalize_delays(a), canonicalize_delays(b), CARRIERS)
    other = op(1, lambda x: Ret(x) if x.elem == "r1" else Ret(UNIT_VAL))
    assert not tree_eq(t, other, CARRIERS)


def test_chi_on_return():
    inner = DelayNode(1, Ret(UNIT_VAL))
    assert handle_chi({}, Ret(inner)) is inner


def test_chi_passes_delays():
    v = Ret(UNIT_VAL)
    out = handle_chi({}, DelayNode(3, Ret(v)))
    assert isinstance(out, DelayNode) and out.tau == 3 and out.cont == v


def test_fcanon_agrees_with_canonicalize():
    ft = FDelay(2, FDelay(0, FOp("o", BaseElem("A", "a1"), 1, (FDelay(3, FRet(UNIT_VAL)),))))
    assert fcanon(ft) == from_tree(canonicalize_delays(_tree(ft)), {"R": ["r1"]})
    assert fgrade(ft) == 6
    assert fcanon(ft) in delay_normal_forms(ft)


def _tree(ft):
    from ltau.trees import to_tree
    return to_tree(ft, {"o": R}, {"R": ["r1"]})


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_forwarding_handler_is_identity(seed):
    rng = random.Random(seed)
    s = Setting.make(rng, 3, 2)
    t = s.tree(s.ftree(rng.randint(0, 4)))
    clauses = {o: _forward(o, d, s.result_types[o]) for o, d in s.ops.items()}
    handled = handle_chi(clauses, t, 0, leaf=lambda v, _now: Ret(v))
    assert tree_eq(handled, t, s.carriers)


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_canonicalize_idempotent_and_grade_preserving(seed):
    rng = random.Random(seed)
    s = Setting.make(rng, 4, 3)
    g = rng.randint(0, 6)
    t = s.tree(s.ftree(g))
    once = canonicalize_delays(t)
    assert tree_eq(canonicalize_delays(once), once, s.carriers)
    assert grades(once, s.carriers) == {g}
