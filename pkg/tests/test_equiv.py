import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from ltau.equiv import check_equiv, normalize
from ltau.errors import TypeMismatch
from ltau.generate import TermGen
from ltau.parser import parse_program
from ltau.grades import Grade
from ltau.syntax import UNIT, CompType, TFun, VarBind, alpha_eq
from ltau.typecheck import infer_comp


def norm(text, sig=None):
    stats = Counter()
    return normalize(parse_program(text, sig), sig, stats=stats), stats


def same(a, text, sig=None):
    return alpha_eq(a, parse_program(text, sig))


def test_beta_let():
    n, stats = norm("let x = return box@1 () in return (x, x)")
    assert same(n, "return (box@1 (), box@1 ())") and stats["beta-let"] == 1


def test_beta_unbox():
    n, stats = norm("unbox@2 box@2 () as x in return x")
    assert same(n, "return ()") and stats["beta-unbox"] == 1


def test_handle_op_instantiates_clause(hsig):
    n, stats = norm("handle (perform wait door1 as y in return y) "
                    "with { wait x k -> delay 2; unbox@2 k as f in f door2 "
                    "| tick x k -> delay 1; unbox@1 k as f in f x } to r in return r", hsig)
    assert same(n, "delay 2 (return door2)", hsig)
    assert stats["beta-handle-op"] == 1 and stats["beta-handle-return"] == 1


def test_normal_forms_keep_stuck_terms():
    m = parse_program("let f = return (fun (x : unit) -> return x) in return f")
    assert alpha_eq(normalize(m, None), parse_program("return (fun (x : unit) -> return x)"))


def test_self_is_equal():
    m = parse_program("delay 1; return ()")
    assert str(check_equiv(m, m, None)) == "Equal"


def test_delay_merge_equal():
    assert check_equiv(parse_program("delay 2 (delay 3 (return ()))"),
                       parse_program("delay 5 (return ())"), None).equal


def test_fun_eta_unknown():
    ctx = (VarBind("f", TFun(UNIT, CompType(UNIT, Grade.of(0)))),)
    expanded = parse_program("return (fun (y : unit) -> f y)")
    assert str(check_equiv(parse_program("return f"), expanded, None, ctx)) == "Unknown"


def test_type_mismatch():
    with pytest.raises(TypeMismatch):
        check_equiv(parse_program("return ()"), parse_program("delay 1 (return ())"), None)


def test_eta_let_and_unit():
    ctx = (VarBind("u", UNIT),)
    v = check_equiv(parse_program("return u"), parse_program("return ()"), None, ctx)
    assert v.equal and v.via == ("eta-unit",)


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_normalize_preserves_type_and_is_idempotent(seed, gsig):
    m = TermGen(random.Random(seed), gsig).closed()
    n = normalize(m, gsig)
    assert infer_comp((), n, gsig) == infer_comp((), m, gsig)
    assert alpha_eq(normalize(n, gsig), n)
    assert check_equiv(m, n, gsig).equal
