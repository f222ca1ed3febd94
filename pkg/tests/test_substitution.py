import random

from hypothesis import given, settings, strategies as st

from ltau.generate import TermGen, random_renaming, random_subst_instance
from ltau.grades import Grade
from ltau.parser import parse_program, parse_value
from ltau.renaming import apply_renaming, lift
from ltau.substitution import subst
from ltau.syntax import UNIT, Mod, Return, TBox, Unbox, VarBind, alpha_eq
from ltau.typecheck import elaborate, infer_comp


def test_return_payload():
    w = parse_value("box@1 ()")
    assert subst(parse_program("return x"), w, "x") == Return(w)


def test_unbox_reaching_past_variable_drops():
    # x sits only 1 time unit back, so the unbox@3 cuts it out of V's context
    ctx = (VarBind("b", TBox(Grade.of(3), UNIT)), Mod(Grade.of(3)), VarBind("x", UNIT), Mod(Grade.of(1)))
    m = parse_program("unbox@3 b as y in return x")
    log = []
    out = subst(m, parse_value("()"), "x", typed=elaborate(m, None, ctx), log=log)
    assert isinstance(out, Unbox) and out.value == m.value
    assert out.body == parse_program("return ()")
    assert [c.kept for c in log] == [False]
    assert infer_comp(ctx[:2] + ctx[3:], out, None) == infer_comp(ctx, m, None)


def test_unbox_now_keeps():
    ctx = (VarBind("x", TBox(Grade.of(0), UNIT)),)
    m = parse_program("unbox@0 x as y in return y")
    w = parse_value("box@0 ()")
    log = []
    out = subst(m, w, "x", typed=elaborate(m, None, ctx), log=log)
    assert alpha_eq(out, parse_program("unbox@0 box@0 () as y in return y"))
    assert [c.kept for c in log] == [True]


def test_avoids_capture():
    m = parse_program("let y = return () in return x")
    out = subst(m, parse_value("y"), "x")
    assert out.name != "y" and out.body == Return(parse_value("y"))


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_substitution_preserves_typing(seed, gsig):
    inst = random_subst_instance(random.Random(seed), gen=TermGen(random.Random(seed), gsig))
    want = infer_comp(inst.ctx, inst.term, gsig)
    out = subst(inst.term, inst.w, inst.x, typed=elaborate(inst.term, gsig, inst.ctx))
    assert infer_comp(inst.outer + inst.inner, out, gsig) == want


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_substitution_commutes_with_renaming(seed, gsig):
    rng = random.Random(seed)
    gen = TermGen(rng, gsig)
    inst = random_subst_instance(rng, gen=gen)
    rho = random_renaming(rng, inst.outer, 2, gen)
    typed = elaborate(inst.term, gsig, inst.ctx)
    left = subst(inst.term, inst.w, inst.x, typed=typed)
    left = apply_renaming(lift(rho, inst.inner), left)
    moved = lift(rho, (VarBind(inst.x, inst.xty),) + inst.inner)
    t2 = apply_renaming(moved, inst.term)
    right = subst(t2, apply_renaming(rho, inst.w), inst.x, typed=elaborate(t2, gsig, moved.target))
    assert alpha_eq(left, right)
