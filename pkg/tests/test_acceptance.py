"""Acceptance criteria, one test each; a pass/fail line per criterion is printed at the end."""

import random
import time

from ltau.corpus import (
    CORPUS_DIR, coverage, monitor_sweep, program, run_corpus, semantically_equal, signature,
)
from ltau.errors import MonitorViolation, TemporalViolation
from ltau.evaluation import monitor_all_paths, run
from ltau.generate import TermGen, gen_signature, random_renaming, random_subst_instance
from ltau.laws import QUOTIENT, SUITES, run_laws
from ltau.renaming import apply_renaming
from ltau.substitution import subst
from ltau.typecheck import elaborate, infer_comp
from oracles.grade_arithmetic import production_line

ORACLE = production_line(CORPUS_DIR / "factory.sig", CORPUS_DIR / "production_line.ltau")
def test_1_rule_coverage(record):
    t0 = time.perf_counter()
    results = run_corpus()
    table = coverage(results)
    elapsed = time.perf_counter() - t0
    failing = [r.entry.name for r in results if not r.ok]
    ok = table.complete and not failing and len(table.rows) == 6 + 8 + 15 and elapsed < 10
    record(1, ok, f"coverage {len(table.rows) - len(table.missing())}/{len(table.rows)} rows, "
                  f"{len(results) - len(failing)}/{len(results)} entries pass, {elapsed:.2f}s (< 10s)")


def test_2_renaming_preservation(record):
    sig = gen_signature()
    pairs = failures = 0
    for i in range(500):
        rng = random.Random(f"rename:{i}")
        gen = TermGen(rng, sig)
        ctx = gen.context()
        m = gen.comp(ctx, gen.ground(0), rng.randint(0, 3), 3)
        rho = random_renaming(rng, ctx, rng.randint(1, 4), gen)
        want = infer_comp(ctx, m, sig)
        try:
            ok = infer_comp(rho.target, apply_renaming(rho, m), sig) == want
        except Exception:
            ok = False
        pairs += 1
        failures += not ok
    record(2, pairs >= 500 and failures == 0, f"{pairs} term/renaming pairs, {failures} failures")


def test_3_substitution_preservation(record):
    sig = gen_signature()
    n = drops = failures = 0
    i = 0
    while (n < 500 or drops < 50) and i < 20000:
        rng = random.Random(f"subst:{i}")
        i += 1
        inst = random_subst_instance(rng, gen=TermGen(rng, sig))
        want = infer_comp(inst.ctx, inst.term, sig)
        log = []
        out = subst(inst.term, inst.w, inst.x, typed=elaborate(inst.term, sig, inst.ctx), log=log)
        try:
            ok = infer_comp(inst.outer + inst.inner, out, sig) == want
        except Exception:
            ok = False
        n += 1
        failures += not ok
        drops += any(not c.kept for c in log)
    record(3, n >= 500 and drops >= 50 and failures == 0,
           f"{n} instances, {drops} with an unbox drop case, {failures} failures")


def test_4_tree_laws(record):
    t0 = time.perf_counter()
    rep = run_laws(seed=0, depth=4, carriers=3, count=200, suites=list(SUITES))
    elapsed = time.perf_counter() - t0
    want = {law for laws in SUITES.values() for law in laws}
    got = {r.law for r in rep.results}
    low = [r.law for r in rep.results if r.passed < 200]
    ok = rep.ok and got == want and len(want) == 14 and not low and elapsed < 60
    record(4, ok, f"{len(got)} laws x 200 instances (depth 4, carriers <= 3), "
                  f"violated: {rep.violated() or 'none'}, {elapsed:.1f}s (< 60s)")


def test_5_delay_quotient(record):
    rep = run_laws(seed=0, depth=4, carriers=3, count=1000, suites=["quotient"])
    low = [r.law for r in rep.results if r.passed < 1000]
    ok = rep.ok and {r.law for r in rep.results} == set(QUOTIENT) and not low
    record(5, ok, f"{len(rep.results)} quotient checks x 1000 trees, violated: {rep.violated() or 'none'}")


def test_6_equational_soundness(record):
    equal = disagreements = 0
    for r in run_corpus():
        if r.entry.kind != "equiv" or r.verdict != "Equal":
            continue
        equal += 1
        (a, sig), (b, _) = r.programs
        disagreements += not semantically_equal(a, b, sig)
    record(6, equal > 0 and disagreements == 0,
           f"{equal} Equal corpus pairs, {disagreements} run-tree disagreements")


def test_7_monitor_silence_and_witness(record):
    sig = gen_signature()
    violations = 0
    try:
        corpus_leaves = monitor_sweep(run_corpus())
    except MonitorViolation:
        violations, corpus_leaves = violations + 1, 0
    generated = 0
    for i in range(500):
        m = TermGen(random.Random(f"monitor:{i}"), sig).closed()
        infer_comp((), m, sig)
        try:
            monitor_all_paths(m, sig)
        except MonitorViolation:
            violations += 1
        generated += 1
    raised = []
    try:
        run(program("production_line_no_delay.ltau", "factory.sig"), signature("factory.sig"), check=False)
    except MonitorViolation as e:
        raised.append(e)
    witness = [(e.time, e.required) for e in raised]
    want = [(ORACLE["tau_paint"], ORACLE["tau_paint"] + ORACLE["tau_dry"])]
    ok = violations == 0 and generated >= 500 and witness == want
    record(7, ok, f"0 violations expected, got {violations} over corpus ({corpus_leaves} paths) "
                  f"and {generated} generated programs; unsafe run: {witness} (want {want})")


def test_8_production_line(record):
    sig = signature("factory.sig")
    m = program("production_line.ltau", "factory.sig")
    ty = infer_comp((), m, sig)
    starts = [e.time for e in run(m, sig).trace if e.kind == "op" and e.data["name"] == "assemble"]
    try:
        infer_comp((), program("production_line_no_delay.ltau", "factory.sig"), sig)
        rule = None
    except TemporalViolation as e:
        rule = e.rule
    ok = (str(ty) == f"unit ! {ORACLE['grade']}" and starts == [ORACLE["assemble_start"]]
          and rule == "Unbox")
    record(8, ok, f"type {ty}, assemble starts at {starts}, no-delay variant rejected by {rule}")
