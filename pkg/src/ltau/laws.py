"""Randomised law suites for the tree model: graded monad, strength, algebraicity,
handling morphisms, and the delay quotient.

Every instance is built from a seeded RNG, so a report is reproducible from
``(seed, depth, carriers, count)``.  A ``Model`` bundles the operations under
test; mutants replace one of them with a subtly wrong version so the harness
can show that it notices.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .errors import AvailabilityMismatch
from .syntax import TBase
from .trees import (
    BaseElem, BoxedV, DelayNode, FDelay, FOp, FRet, FunVal, OpNode, PairVal, Ret, canonicalize_delays,
    delay_expansions, delay_normal_forms, delay_rewrites, fcanon, fgrade, from_tree, grades,
    is_canonical_node, results, to_tree, tree_eq,
)

# ---------------------------------------------------------------------------
# Models


class Model:
    """The operations whose laws are checked."""

    name = "reference"

    def __init__(self, carriers: dict) -> None:
        self.carriers = carriers

    def bind(self, t, f: Callable, start: int):
        match t:
            case Ret(v):
                return f(v, start)
            case OpNode(op, a, d, k, rt):
                end = start + d
                return OpNode(op, a, d, lambda b: self.bind(k(b), f, end), rt)
            case DelayNode():
                end = start + t.tau
                return DelayNode(t.tau, thunk=lambda: self.bind(t.cont, f, end))
        raise TypeError(t)

    def eta(self, v):
        return Ret(v)

    def mu(self, t, start: int):
        return self.bind(t, lambda inner, _now: inner, start)

    def fmap(self, f: Callable, t, start: int):
        return self.bind(t, lambda v, now: Ret(f(v, now)), start)

    def pair(self, a, b):
        return PairVal(a, b)

    def strength(self, box: BoxedV, t, start: int):
        def leaf(v, now):
            if box.available_at > now:
                raise AvailabilityMismatch(f"resource available at {box.available_at}, leaf at {now}")
            return Ret(self.pair(box.payload, v))

        return self.bind(t, leaf, start)

    def kbox(self, end: int, start: int, resume: Callable):
        return BoxedV(end, FunVal(resume))

    def chi(self, clauses: dict, t, start: int):
        match t:
            case Ret(v):
                return v
            case DelayNode():
                end = start + t.tau
                return DelayNode(t.tau, thunk=lambda: self.chi(clauses, t.cont, end))
            case OpNode(op, a, d, k, _):
                end = start + d
                kb = self.kbox(end, start, lambda b, _now: self.chi(clauses, k(b), end))
                return clauses[op](a, kb, start)
        raise TypeError(t)


class MuFirstBranch(Model):
    """Flattening forgets the operation result and always resumes with the first one."""

    name = "mu-first-branch"

    def bind(self, t, f, start):
        if isinstance(t, OpNode):
            end = start + t.duration
            first = results(t, self.carriers, end)[0]
            return OpNode(t.op, t.arg, t.duration, lambda _b: self.bind(t.cont(first), f, end),
                          t.result_type)
        return super().bind(t, f, start)


class MuDropDelay(Model):
    """Flattening loses delays of the outer tree."""

    name = "mu-drop-delay"

    def bind(self, t, f, start):
        if isinstance(t, DelayNode):
            return self.bind(t.cont, f, start + t.tau)
        return super().bind(t, f, start)


class StrengthSwap(Model):
    """Strength pairs the components the wrong way round."""

    name = "strength-swap"

    def pair(self, a, b):
        return PairVal(b, a)


class ChiDropDelay(Model):
    """Handling forgets delays."""

    name = "chi-drop-delay"

    def chi(self, clauses, t, start):
        if isinstance(t, DelayNode):
            return self.chi(clauses, t.cont, start + t.tau)
        return super().chi(clauses, t, start)


class ChiEarlyBox(Model):
    """Handling hands clauses a continuation that claims to be available immediately."""

    name = "chi-early-box"

    def kbox(self, end, start, resume):
        return BoxedV(start, FunVal(resume))


MUTANTS: dict[str, type[Model]] = {
    m.name: m for m in (MuFirstBranch, MuDropDelay, StrengthSwap, ChiDropDelay, ChiEarlyBox)
}

# ---------------------------------------------------------------------------
# Random instances


@dataclass
class Setting:
    """Operations, carriers and a tree generator for one instance."""

    rng: random.Random
    depth: int
    ops: dict[str, int]  # name -> duration
    carriers: dict[str, list[str]]
    result_types: dict[str, object] = field(default_factory=dict)

    @classmethod
    def make(cls, rng: random.Random, depth: int, max_carrier: int) -> Setting:
        k = rng.randint(1, max_carrier)
        carriers = {
            "R": [f"r{i}" for i in range(1, k + 1)],
            "A": ["a1", "a2"],
            "V": [f"v{i}" for i in range(1, max_carrier + 1)],
        }
        ops = {"o1": rng.randint(0, 2), "o2": rng.randint(1, 2)}
        return cls(rng, depth, ops, carriers, {op: TBase("R") for op in ops})

    def elem(self, base: str) -> BaseElem:
        return BaseElem(base, self.rng.choice(self.carriers[base]))

    def ftree(self, grade: int, depth: int | None = None, leaf: Callable | None = None):
        """A finite tree taking exactly ``grade`` time on every path."""
        r = self.rng
        depth = self.depth if depth is None else depth
        leaf = leaf or (lambda: self.elem("V"))
        # a leaf still needs one delay node to use up the grade, hence depth <= 1
        if depth <= 1 or r.random() < 0.2:
            return FDelay(grade, FRet(leaf())) if grade else FRet(leaf())
        fitting = [op for op, d in self.ops.items() if d <= grade]
        if fitting and r.random() < 0.6:
            op = r.choice(fitting)
            d = self.ops[op]
            n = len(self.carriers["R"])
            return FOp(op, self.elem("A"), d,
                       tuple(self.ftree(grade - d, depth - 1, leaf) for _ in range(n)))
        tau = r.randint(0, grade)
        return FDelay(tau, self.ftree(grade - tau, depth - 1, leaf))

    def tree(self, ft, leaf: Callable | None = None):
        return to_tree(ft, self.result_types, self.carriers, leaf)

    def nested(self, g1: int, g2: int, depth: int | None = None):
        """A finite tree of grade ``g1`` whose leaves are finite trees of grade ``g2``."""
        depth = self.depth if depth is None else depth
        half = max(depth // 2, 1)
        return self.ftree(g1, half, leaf=lambda: self.ftree(g2, half))

    def clauses(self, model: Model) -> dict[str, Callable]:
        """Random clause semantics: forward the operation, or wait and resume."""
        out = {}
        for op, d in self.ops.items():
            rt = self.result_types[op]
            fixed = BaseElem("R", self.rng.choice(self.carriers["R"]))
            if self.rng.random() < 0.5:
                out[op] = _forward(op, d, rt)
            else:
                out[op] = _wait(fixed)
        return out


def _resume(kbox: BoxedV, b, now: int):
    if kbox.available_at > now:
        raise AvailabilityMismatch(f"continuation available at {kbox.available_at}, resumed at {now}")
    return kbox.payload(b, now)


def _forward(op, d, rt):
    def clause(a, kbox, now):
        return OpNode(op, a, d, lambda b: _resume(kbox, b, now + d), rt)

    return clause


def _wait(fixed):
    def clause(a, kbox, now):
        # waits exactly until the continuation becomes available
        wait = max(kbox.available_at - now, 0)
        return DelayNode(wait, thunk=lambda: _resume(kbox, fixed, now + wait))

    return clause


# ---------------------------------------------------------------------------
# Laws.  Each returns (lhs, rhs, start); the harness compares with tree_eq.


def _grades(rng: random.Random, n: int) -> list[int]:
    return [rng.randint(0, 3) for _ in range(n)]


def law_left_unit(s: Setting, m: Model):
    g, = _grades(s.rng, 1)
    start = s.rng.randint(0, 3)
    t = s.tree(s.ftree(g))
    return m.mu(m.eta(t), start), t, start


def law_right_unit(s: Setting, m: Model):
    g, = _grades(s.rng, 1)
    start = s.rng.randint(0, 3)
    t = s.tree(s.ftree(g))
    return m.mu(m.fmap(lambda v, _n: m.eta(v), t, start), start), t, start


def law_assoc(s: Setting, m: Model):
    g1, g2, g3 = _grades(s.rng, 3)
    start = s.rng.randint(0, 3)
    third = max(s.depth // 3, 1)
    fttt = s.ftree(g1, third, leaf=lambda: s.ftree(g2, third, leaf=lambda: s.ftree(g3, third)))

    def realise():
        return s.tree(fttt, leaf=lambda ftt: s.tree(ftt, leaf=s.tree))

    lhs = m.mu(m.mu(realise(), start), start)
    rhs = m.mu(m.fmap(lambda tt, now: m.mu(tt, now), realise(), start), start)
    return lhs, rhs, start


def law_str_unit(s: Setting, m: Model):
    start = s.rng.randint(0, 3)
    a, b = s.elem("V"), s.elem("V")
    return m.strength(BoxedV(start, a), m.eta(b), start), m.eta(PairVal(a, b)), start


def law_str_snd(s: Setting, m: Model):
    g, = _grades(s.rng, 1)
    start = s.rng.randint(0, 3)
    t = s.tree(s.ftree(g))
    box = BoxedV(start + g, s.elem("V"))
    return m.fmap(lambda p, _n: p.right, m.strength(box, t, start), start), t, start


def law_str_mu(s: Setting, m: Model):
    g1, g2 = _grades(s.rng, 2)
    start = s.rng.randint(0, 3)
    ftt = s.nested(g1, g2)
    a = s.elem("V")
    box = BoxedV(start + g1 + g2, a)
    lhs = m.strength(box, m.mu(s.tree(ftt, leaf=s.tree), start), start)
    # delta re-stamps the resource relative to the middle of the two phases
    outer_box = BoxedV(start + g1, box)
    paired = m.strength(outer_box, s.tree(ftt, leaf=s.tree), start)
    rhs = m.mu(m.fmap(lambda p, now: m.strength(p.left, p.right, now), paired, start), start)
    return lhs, rhs, start


def law_str_assoc(s: Setting, m: Model):
    g, = _grades(s.rng, 1)
    start = s.rng.randint(0, 3)
    t = s.tree(s.ftree(g))
    a, b = s.elem("V"), s.elem("V")
    joined = BoxedV(start + g, PairVal(a, b))
    lhs = m.fmap(lambda p, _n: PairVal(p.left.left, PairVal(p.left.right, p.right)),
                 m.strength(joined, t, start), start)
    rhs = m.strength(BoxedV(start + g, a), m.strength(BoxedV(start + g, b), t, start), start)
    return lhs, rhs, start


def _op_parts(s: Setting, g: int):
    op = s.rng.choice(list(s.ops))
    d = s.ops[op]
    return op, d, s.elem("A")


def law_op_mu(s: Setting, m: Model):
    g1, g2 = _grades(s.rng, 2)
    start = s.rng.randint(0, 3)
    op, d, a = _op_parts(s, g1)
    branches = [s.nested(g1, g2) for _ in s.carriers["R"]]
    lits = s.carriers["R"]

    def k(b):
        return s.tree(branches[lits.index(b.elem)], leaf=s.tree)

    lhs = m.mu(OpNode(op, a, d, k, s.result_types[op]), start)
    rhs = OpNode(op, a, d, lambda b: m.mu(k(b), start + d), s.result_types[op])
    return lhs, rhs, start


def law_delay_mu(s: Setting, m: Model):
    g1, g2 = _grades(s.rng, 2)
    start = s.rng.randint(0, 3)
    tau = s.rng.randint(0, 3)
    ftt = s.nested(g1, g2)
    lhs = m.mu(DelayNode(tau, s.tree(ftt, leaf=s.tree)), start)
    rhs = DelayNode(tau, m.mu(s.tree(ftt, leaf=s.tree), start + tau))
    return lhs, rhs, start


def law_op_str(s: Setting, m: Model):
    g, = _grades(s.rng, 1)
    start = s.rng.randint(0, 3)
    op, d, a = _op_parts(s, g)
    branches = [s.ftree(g) for _ in s.carriers["R"]]
    lits = s.carriers["R"]
    box = BoxedV(start + d + g, s.elem("V"))

    def k(b):
        return s.tree(branches[lits.index(b.elem)])

    lhs = m.strength(box, OpNode(op, a, d, k, s.result_types[op]), start)
    rhs = OpNode(op, a, d, lambda b: m.strength(box, k(b), start + d), s.result_types[op])
    return lhs, rhs, start


def law_delay_str(s: Setting, m: Model):
    g, = _grades(s.rng, 1)
    start = s.rng.randint(0, 3)
    tau = s.rng.randint(0, 3)
    ft = s.ftree(g)
    box = BoxedV(start + tau + g, s.elem("V"))
    lhs = m.strength(box, DelayNode(tau, s.tree(ft)), start)
    rhs = DelayNode(tau, m.strength(box, s.tree(ft), start + tau))
    return lhs, rhs, start


def law_chi_eta(s: Setting, m: Model):
    g, = _grades(s.rng, 1)
    start = s.rng.randint(0, 3)
    ft = s.ftree(g)
    return m.chi(s.clauses(m), m.eta(s.tree(ft)), start), s.tree(ft), start


def law_chi_delay(s: Setting, m: Model):
    g1, g2 = _grades(s.rng, 2)
    start = s.rng.randint(0, 3)
    tau = s.rng.randint(0, 3)
    cl = s.clauses(m)
    ftt = s.nested(g1, g2)
    lhs = m.chi(cl, DelayNode(tau, s.tree(ftt, leaf=s.tree)), start)
    rhs = DelayNode(tau, m.chi(cl, s.tree(ftt, leaf=s.tree), start + tau))
    return lhs, rhs, start


def law_chi_op(s: Setting, m: Model):
    g1, g2 = _grades(s.rng, 2)
    start = s.rng.randint(0, 3)
    cl = s.clauses(m)
    op, d, a = _op_parts(s, g1)
    lits = s.carriers["R"]
    branches = [s.nested(g1, g2) for _ in lits]

    def k(b):
        return s.tree(branches[lits.index(b.elem)], leaf=s.tree)

    lhs = m.chi(cl, OpNode(op, a, d, k, s.result_types[op]), start)
    end = start + d
    resume = FunVal(lambda b, _now: m.chi(cl, k(b), end))
    rhs = cl[op](a, BoxedV(end, resume), start)
    return lhs, rhs, start


SUITES: dict[str, dict[str, Callable]] = {
    "monad": {"left-unit": law_left_unit, "right-unit": law_right_unit, "assoc": law_assoc},
    "strength": {"str-unit": law_str_unit, "str-snd": law_str_snd, "str-mu": law_str_mu,
                 "str-assoc": law_str_assoc},
    "algebraicity": {"op-mu": law_op_mu, "delay-mu": law_delay_mu, "op-str": law_op_str,
                     "delay-str": law_delay_str},
    "handling": {"chi-eta": law_chi_eta, "chi-delay": law_chi_delay, "chi-op": law_chi_op},
}

# ---------------------------------------------------------------------------
# Delay quotient checks (on finite trees, against brute-force rewriting)


def quotient_idempotent(s: Setting, _m: Model):
    ft = delay_expansions(s.ftree(s.rng.randint(0, 4)), s.rng, 3)
    once = canonicalize_delays(s.tree(ft))
    twice = canonicalize_delays(once)
    ok = tree_eq(once, twice, s.carriers) and _all_canonical(once, s.carriers)
    return ok, f"tree {ft}"


def quotient_grade(s: Setting, _m: Model):
    ft = delay_expansions(s.ftree(s.rng.randint(0, 4)), s.rng, 3)
    t = s.tree(ft)
    ok = grades(canonicalize_delays(t), s.carriers) == grades(t, s.carriers) == {fgrade(ft)}
    return ok, f"tree {ft}"


def quotient_oracle(s: Setting, _m: Model):
    ft = delay_expansions(s.ftree(s.rng.randint(0, 4)), s.rng, 2)
    normal = delay_normal_forms(ft)
    got = from_tree(canonicalize_delays(s.tree(ft)), s.carriers)
    ok = normal == {got} and got == fcanon(ft)
    return ok, f"tree {ft}: oracle {normal}, got {got}"


def quotient_pairs(s: Setting, _m: Model):
    ft = delay_expansions(s.ftree(s.rng.randint(0, 4)), s.rng, 3)
    mine = from_tree(canonicalize_delays(s.tree(ft)), s.carriers)
    for other in delay_rewrites(ft):
        theirs = from_tree(canonicalize_delays(s.tree(other)), s.carriers)
        if theirs != mine:
            return False, f"{ft} and {other} canonicalise differently"
    return True, ""


def _all_canonical(t, carriers) -> bool:
    stack = [(t, 0)]
    while stack:
        node, now = stack.pop()
        if not is_canonical_node(node):
            return False
        match node:
            case DelayNode():
                stack.append((node.cont, now + node.tau))
            case OpNode():
                end = now + node.duration
                stack.extend((node.cont(r), end) for r in results(node, carriers, end))
    return True


QUOTIENT: dict[str, Callable] = {
    "canon-idempotent": quotient_idempotent,
    "canon-grade": quotient_grade,
    "canon-oracle": quotient_oracle,
    "canon-rewrite-pairs": quotient_pairs,
}

# ---------------------------------------------------------------------------
# Harness


@dataclass
class LawResult:
    suite: str
    law: str
    passed: int = 0
    failed: int = 0
    first_failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.failed == 0


@dataclass
class LawReport:
    seed: int
    depth: int
    carriers: int
    count: int
    mutant: str | None
    results: list[LawResult]
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def violated(self) -> list[str]:
        return [r.law for r in self.results if not r.ok]

    def lines(self) -> list[str]:
        out = [f"seed={self.seed} depth={self.depth} carriers={self.carriers} count={self.count}"
               + (f" mutant={self.mutant}" if self.mutant else "")]
        out += [f"warning: {w}" for w in self.warnings]
        for r in self.results:
            status = "ok" if r.ok else "FAIL"
            line = f"{r.suite:<13} {r.law:<20} {status:<4} {r.passed}/{r.passed + r.failed}"
            if r.first_failure:
                line += f"  first failure: {r.first_failure}"
            out.append(line)
        verdict = "all laws hold" if self.ok else "violated: " + ", ".join(self.violated())
        out.append(verdict)
        return out


def _instance_rng(seed: int, law: str, i: int) -> random.Random:
    return random.Random(f"{seed}:{law}:{i}")


def run_laws(seed: int = 0, depth: int = 4, carriers: int = 3, count: int = 200,
             mutant: str | None = None, suites: list[str] | None = None) -> LawReport:
    """Run every law ``count`` times; failures name the law and the first bad instance."""
    if mutant is not None and mutant not in MUTANTS:
        raise ValueError(f"unknown mutant {mutant}; choose from {', '.join(MUTANTS)}")
    model_cls = MUTANTS[mutant] if mutant else Model
    report = LawReport(seed, depth, carriers, count, mutant, [])
    if depth <= 0 or count <= 0:
        report.warnings.append("no instances generated (depth or count is 0); the pass is vacuous")
    wanted = suites or [*SUITES, "quotient"]
    for suite in wanted:
        laws = QUOTIENT if suite == "quotient" else SUITES[suite]
        for law, fn in laws.items():
            res = LawResult(suite, law)
            n = count if depth > 0 else 0
            for i in range(n):
                rng = _instance_rng(seed, law, i)
                st = Setting.make(rng, depth, max(carriers, 1))
                model = model_cls(st.carriers)
                try:
                    if suite == "quotient":
                        ok, why = fn(st, model)
                    else:
                        lhs, rhs, start = fn(st, model)
                        ok, why = tree_eq(lhs, rhs, st.carriers, start), f"instance {i}"
                except (AvailabilityMismatch, AttributeError, TypeError) as e:
                    ok, why = False, f"instance {i}: {type(e).__name__}: {e}"
                if ok:
                    res.passed += 1
                else:
                    res.failed += 1
                    if res.first_failure is None:
                        res.first_failure = why if why.startswith("instance") else f"instance {i}: {why}"
            report.results.append(res)
    return report


__all__ = [
    "Model", "MUTANTS", "SUITES", "QUOTIENT", "Setting", "LawResult", "LawReport", "run_laws",
]
