import random

import pytest
from hypothesis import given, settings, strategies as st

from ltau.errors import ParseError, SignatureError
from ltau.generate import TermGen
from ltau.grades import Grade
from ltau.parser import parse_program, parse_signature
from ltau.syntax import (
    UNIT, Box, Delay, Fun, Let, Op, Return, TProd, Unbox, Unit, Var, alpha_eq, binders, pretty,
)


def test_smallest_program():
    assert parse_program("return ()") == Return(Unit())


def test_delay_maps_to_constructor():
    assert parse_program("delay 2 (return ())") == Delay(Grade.of(2), Return(Unit()))


def test_production_line_shape(factory, corpus_dir):
    m = parse_program((corpus_dir / "production_line.ltau").read_text(), factory)
    # let (b, l, r) = paint ... desugars to a let over the operation, then matches
    assert isinstance(m, Let) and isinstance(m.bound, Op) and m.bound.op == "paint"
    text = pretty(m)
    assert "delay 4" in text and text.count("unbox@4") == 3 and "assemble" in text


def test_alpha_eq_binder_renaming():
    a = Fun("x", UNIT, Return(Var("x")))
    b = Fun("y", UNIT, Return(Var("y")))
    assert alpha_eq(a, b)


def test_alpha_eq_free_variables_rigid():
    assert not alpha_eq(Return(Var("x")), Return(Var("y")))


def test_alpha_eq_grades_significant():
    assert not alpha_eq(Box(Grade.of(3), Unit()), Box(Grade.of(2), Unit()))


def test_binders_made_distinct():
    m = parse_program("let x = return () in let x = return x in return x")
    names = list(binders(m))
    assert len(names) == len(set(names))


def test_unknown_operation(factory):
    with pytest.raises(ParseError, match="unknown operation"):
        parse_program("perform launch () as x in return x", factory)


def test_grammar_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_program("return (")
    assert e.value.span is not None


def test_lexical_error():
    with pytest.raises(ParseError):
        parse_program("return $")


def test_unbox_and_box_syntax():
    m = parse_program("unbox@0 box@0 () as y in return y")
    assert isinstance(m, Unbox) and m.grade == Grade.of(0)


def test_signature_rejects_duplicate_op():
    with pytest.raises(SignatureError):
        parse_signature("operation a : unit ~> unit ! 1\noperation a : unit ~> unit ! 2\n")


def test_signature_rejects_partial_constant():
    with pytest.raises(SignatureError):
        parse_signature("base B = {b0, b1}\nconst f : (B) -> B = {b0 -> b1}\n")


def test_signature_product_param(factory):
    assert isinstance(factory.ops["paint"].param, TProd)
    assert factory.ops["assemble"].duration == Grade.of(3)


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_parse_pretty_roundtrip(seed, gsig):
    gen = TermGen(random.Random(seed), gsig)
    m = gen.closed(depth=4)
    assert alpha_eq(parse_program(pretty(m), gsig), m)
