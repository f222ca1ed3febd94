import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from ltau.corpus import corpus_manifest, program, signature
from ltau.equiv import normalize
from ltau.errors import MonitorViolation
from ltau.evaluation import ClosedRequired, evaluate, monitor_all_paths, run
from ltau.generate import TermGen
from ltau.parser import parse_program
from ltau.substitution import subst
from ltau.trees import UNIT_VAL, DelayNode, OpNode, Ret, canonicalize_delays, grades, tree_eq
from ltau.typecheck import infer_comp


def times(result):
    return [(e.kind, e.time) for e in result.trace]


def test_return():
    r = run(parse_program("return ()"), None)
    assert r.tree == Ret(UNIT_VAL)
    assert times(r) == [("return", 0)]


def test_delays_collapse_in_tree_not_trace():
    r = run(parse_program("delay 2 (delay 3 (return ()))"), None)
    assert isinstance(r.tree, DelayNode) and r.tree.tau == 5 and r.tree.cont == Ret(UNIT_VAL)
    assert times(r) == [("delay", 0), ("delay", 2), ("return", 5)]


def test_trace_jsonl_header():
    lines = run(parse_program("delay 1 (return ())"), None).trace_jsonl().splitlines()
    assert json.loads(lines[0]) == {"schema": "ltau-trace", "version": 1}
    assert json.loads(lines[-1]) == {"event": "return", "value": "()", "time": 1}


def test_production_line_run():
    sig = signature("factory.sig")
    r = run(program("production_line.ltau", "factory.sig"), sig)
    assert isinstance(r.tree, OpNode) and r.tree.op == "paint"
    after = r.tree.cont(_paint_result(r))
    assert isinstance(after, DelayNode) and after.tau == 4
    assert isinstance(after.cont, OpNode) and after.cont.op == "assemble"
    unboxes = [e for e in r.trace if e.kind == "unbox"]
    assert len(unboxes) == 3
    assert all(e.time == 6 and e.data["available_at"] == 6 for e in unboxes)
    assert r.grade == 9


def _paint_result(r):
    from ltau.trees import results
    return results(r.tree, signature("factory.sig"), 2)[0]


def test_unsafe_run_trips_monitor():
    m = program("production_line_no_delay.ltau", "factory.sig")
    with pytest.raises(MonitorViolation) as e:
        run(m, signature("factory.sig"), check=False)
    assert (e.value.time, e.value.required) == (2, 6)


def test_open_program_rejected():
    with pytest.raises(ClosedRequired):
        run(parse_program("return x"), None)


def test_handling_return_substitutes(hsig):
    m = parse_program("handle return door2 with { wait x k -> delay 2; unbox@2 k as f in f x "
                      "| tick x k -> delay 1; unbox@1 k as f in f x } to r in return (r, r)", hsig)
    n = subst(parse_program("return (r, r)", hsig), parse_program("return door2", hsig).value, "r")
    assert tree_eq(run(m, hsig).tree, run(n, hsig).tree, hsig)


FORWARD = ("with { wait x k -> perform wait x as y in unbox@2 k as f in f y "
           "| tick x k -> perform tick x as y in unbox@1 k as f in f y } to r in return r")
WAIT = ("with { wait x k -> delay 2; unbox@2 k as f in f x "
        "| tick x k -> delay 1; unbox@1 k as f in f x } to r in return r")


def test_forwarding_handler_reproduces_tree(hsig):
    body = "perform wait door1 as d in perform tick () as u in return d"
    handled = run(parse_program(f"handle ({body}) {FORWARD}", hsig), hsig)
    plain = run(parse_program(body, hsig), hsig)
    assert tree_eq(handled.tree, plain.tree, hsig)


def test_wait_then_resume_replaces_operation_by_its_duration(hsig):
    body = "perform wait door1 as d in perform tick () as u in return d"
    handled = run(parse_program(f"handle ({body}) {WAIT}", hsig), hsig)
    waited = run(parse_program("delay 2; delay 1; return door1", hsig), hsig)
    assert tree_eq(handled.tree, waited.tree, hsig)
    assert handled.grade == waited.grade == 3


def test_delays_pass_through_handler(hsig):
    r = run(parse_program(f"handle (delay 3; return door1) {WAIT}", hsig), hsig)
    assert isinstance(r.tree, DelayNode) and r.tree.tau == 3
    assert [e.kind for e in r.trace] == ["delay", "return"]


def test_grade_fidelity_on_corpus():
    for e in corpus_manifest():
        if e.kind != "check" or "type" not in e.expect:
            continue
        sig = signature(e.sig)
        m = program(e.program, e.sig)
        want = int(infer_comp((), m, sig).grade)
        assert grades(evaluate(m, sig), sig) == {want}, e.name
        assert run(m, sig).grade == want


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_generated_programs(seed, gsig):
    m = TermGen(random.Random(seed), gsig).closed()
    want = int(infer_comp((), m, gsig).grade)
    tree = evaluate(m, gsig)
    assert grades(tree, gsig) == {want}
    assert monitor_all_paths(m, gsig) >= 1
    n = normalize(m, gsig)
    assert tree_eq(canonicalize_delays(tree), canonicalize_delays(evaluate(n, gsig)), gsig)
