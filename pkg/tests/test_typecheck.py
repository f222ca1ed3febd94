import random

import pytest

from ltau.errors import GradeMismatch, MissingClause, TemporalViolation, TypeMismatch
from ltau.generate import TermGen
from ltau.grades import RHO, Grade
from ltau.parser import parse_program, parse_signature, parse_value
from ltau.renaming import weaken_by
from ltau.syntax import UNIT, CompType, Mod, TBase, TBox, TFun, VarBind
from ltau.typecheck import check_handler, elaborate, infer_comp, infer_value


def ct(ty, g):
    return CompType(ty, Grade.of(g))


def test_value_examples():
    assert infer_value((), parse_value("box@2 ()"), None) == TBox(Grade.of(2), UNIT)
    assert infer_value((), parse_value("()"), None) == UNIT
    f = parse_value("fun (x : unit) -> return x")
    assert infer_value((), f, None) == TFun(UNIT, ct(UNIT, 0))


def test_return_is_instant():
    assert infer_comp((), parse_program("return ()"), None) == ct(UNIT, 0)


def test_perform_adds_duration(part_sig):
    m = parse_program("perform paint p1 as x in return ()", part_sig)
    assert infer_comp((), m, part_sig) == ct(UNIT, 2)


def test_continuation_sees_boxed_result(part_sig):
    m = parse_program("perform paint p1 as x in return x", part_sig)
    assert infer_comp((), m, part_sig) == ct(TBox(Grade.of(4), TBase("Part")), 2)


def test_box_checked_at_unbox_site():
    m = parse_program("delay 4 (unbox@4 (box@4 ()) as y in return y)")
    assert infer_comp((), m, None) == ct(UNIT, 4)


def test_unbox_too_early():
    m = parse_program("let b = return box@3 () in delay 2 (unbox@3 b as y in return y)")
    with pytest.raises(TemporalViolation) as e:
        infer_comp((), m, None)
    assert e.value.rule == "Unbox"
    assert "needed 3, have 2" in e.value.message


def test_production_line(factory, corpus_dir):
    m = parse_program((corpus_dir / "production_line.ltau").read_text(), factory)
    assert infer_comp((), m, factory) == ct(UNIT, 2 + 4 + 3)
    bad = parse_program((corpus_dir / "production_line_no_delay.ltau").read_text(), factory)
    with pytest.raises(TemporalViolation):
        infer_comp((), bad, factory)


def test_wait_then_resume_clause(hsig, corpus_dir):
    m = parse_program((corpus_dir / "wait_then_resume.ltau").read_text(), hsig)
    clauses = check_handler((), m, TBase("Door"), hsig)
    assert clauses["wait"] == CompType(TBase("Door"), RHO + 2)
    assert clauses["tick"] == CompType(TBase("Door"), RHO + 1)


def test_clause_that_never_resumes(hsig, corpus_dir):
    m = parse_program((corpus_dir / "grade_mismatch.ltau").read_text(), hsig)
    with pytest.raises(GradeMismatch):
        infer_comp((), m, hsig)


def test_instant_operation_resumes_immediately():
    sig = parse_signature("operation ping : unit ~> unit ! 0\n")
    m = parse_program("handle perform ping () as y in return y "
                      "with { ping x k -> unbox@0 k as f in f x } to r in return r", sig)
    assert infer_comp((), m, sig) == ct(UNIT, 0)


def test_handler_needs_every_clause(hsig):
    m = parse_program("handle return door1 with { wait x k -> delay 2; unbox@2 k as f in f x } "
                      "to r in return r", hsig)
    with pytest.raises(MissingClause):
        infer_comp((), m, hsig)


def test_argument_type_checked(hsig):
    with pytest.raises(TypeMismatch):
        infer_comp((), parse_program("perform wait () as d in return d", hsig), hsig)


def test_elaborate_records_contexts():
    m = parse_program("let x = delay 1 (return ()) in return ()")
    typed = elaborate(m, None)
    assert typed.info(m).type == ct(UNIT, 1)
    inner = typed.info(m.body)
    assert inner.ctx == (Mod(Grade.of(1)), VarBind(m.name, UNIT))
    assert inner.rule == "Return"


def test_elaborate_root():
    m = parse_program("return ()")
    info = elaborate(m, None).info(m)
    assert (info.ctx, info.type) == ((), ct(UNIT, 0))


def test_elaborate_raises_same_error():
    m = parse_program("delay 1 (unbox@2 box@2 () as y in return y)")
    with pytest.raises(TemporalViolation) as a:
        infer_comp((), m, None)
    with pytest.raises(TemporalViolation) as b:
        elaborate(m, None)
    assert str(a.value) == str(b.value)


def test_deterministic_and_weakenable(gsig):
    rng = random.Random(3)
    gen = TermGen(rng, gsig)
    for _ in range(100):
        m = gen.closed()
        ty = infer_comp((), m, gsig)
        assert infer_comp((), m, gsig) == ty
        extra = gen.context(prefix="w")
        assert weaken_by((), extra).target == extra
        assert infer_comp(extra, m, gsig) == ty
