"""Big-step evaluation of closed computations into computation trees.

Evaluation runs against a virtual clock.  Operations are uninterpreted: they
become tree nodes, and ``run`` walks one path through the tree, answering
each operation from an oracle and recording a trace.  Every unbox is checked
by a runtime monitor that compares the clock with the resource's
availability time, which was stamped when the box was created.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

from .errors import CheckError, MonitorViolation, OutOfFuel, Stuck
from .grades import Grade, GradeError
from .syntax import (
    App, Box, Clause, Const, Delay, Fun, Handle, Let, Match, Op, Pair, Return, Signature, Unbox,
    Unit, Var, free_vars,
)
from .trees import (
    UNIT_VAL, BaseElem, BoxedV, DelayNode, FunVal, OpNode, PairVal, Ret, absolutize,
    canonicalize_delays, carrier_of, force_all, fmap_at, handle_chi, literal_of, mu, strength,
    value_json,
)
from .typecheck import infer_comp

TRACE_SCHEMA = {"schema": "ltau-trace", "version": 1}
DEFAULT_FUEL = 1_000_000


class ClosedRequired(CheckError):
    rule = "run"


@dataclass(frozen=True)
class Event:
    kind: str  # "op" | "delay" | "unbox" | "return"
    time: int
    data: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {"event": self.kind, **self.data, "time": self.time}


@dataclass
class RunResult:
    tree: object
    trace: list[Event]
    grade: int

    def trace_jsonl(self) -> str:
        lines = [json.dumps(TRACE_SCHEMA)]
        lines += [json.dumps(e.to_json()) for e in self.trace]
        return "\n".join(lines) + "\n"


def _time(g) -> int:
    try:
        return int(g)
    except GradeError:
        raise Stuck(f"symbolic grade {g} reached at run time") from None


class Evaluator:
    def __init__(self, sig: Signature, fuel: int = DEFAULT_FUEL) -> None:
        self.sig = sig
        self.fuel = fuel
        self.recording = False
        self.events: list[Event] = []

    def _tick(self) -> None:
        self.fuel -= 1
        if self.fuel < 0:
            raise OutOfFuel("evaluation step limit reached")

    def record(self, kind: str, time: int, **data) -> None:
        if self.recording:
            self.events.append(Event(kind, time, data))

    # values -----------------------------------------------------------

    def value(self, v, env: dict, now: int):
        match v:
            case Var(x):
                if x not in env:
                    raise Stuck(f"unbound variable {x} at run time")
                return env[x]
            case Const(f, args):
                base = self.sig.element_base(f)
                if base is not None:
                    return BaseElem(base, f)
                c = self.sig.consts.get(f)
                if c is None:
                    raise Stuck(f"unknown constant {f}")
                key = tuple(literal_of(self.value(a, env, now)) for a in args)
                if key not in c.table:
                    raise Stuck(f"{f} is undefined on {key}")
                return absolutize(c.result, c.table[key], now)
            case Unit():
                return UNIT_VAL
            case Pair(l, r):
                return PairVal(self.value(l, env, now), self.value(r, env, now))
            case Fun(x, _, body):
                return FunVal(lambda arg, t: self.comp(body, {**env, x: arg}, t))
            case Box(g, w):
                at = now + _time(g)
                return BoxedV(at, self.value(w, env, at))
        raise Stuck(f"not a value: {v!r}")

    # computations -----------------------------------------------------

    def comp(self, m, env: dict, now: int):
        self._tick()
        match m:
            case Return(v):
                return Ret(self.value(v, env, now))
            case Let(x, a, b):
                first = self.comp(a, env, now)
                paired = strength(BoxedV(now, env), first, now)
                return mu(fmap_at(paired, lambda p, t: self.comp(b, {**p.left, x: p.right}, t), now),
                          now)
            case App(f, a):
                fv = self.value(f, env, now)
                if not isinstance(fv, FunVal):
                    raise Stuck(f"applying a non-function {fv}")
                return fv(self.value(a, env, now), now)
            case Match(v, x, y, body):
                pv = self.value(v, env, now)
                if not isinstance(pv, PairVal):
                    raise Stuck(f"matching a non-pair {pv}")
                return self.comp(body, {**env, x: pv.left, y: pv.right}, now)
            case Op(op, v, x, body):
                s = self.sig.ops.get(op)
                if s is None:
                    raise Stuck(f"unknown operation {op}")
                arg = self.value(v, env, now)
                end = now + _time(s.duration)
                return OpNode(op, arg, end - now,
                              lambda b: self.comp(body, {**env, x: b}, end), s.result)
            case Delay(g, body):
                end = now + _time(g)
                return DelayNode(end - now, thunk=lambda: self.comp(body, env, end))
            case Handle(a, clauses, x, body):
                inner = self.comp(a, env, now)
                sem = {c.op: self._clause(c, env) for c in clauses}
                return handle_chi(sem, inner, now,
                                  leaf=lambda v, t: self.comp(body, {**env, x: v}, t))
            case Unbox(g, v, x, body):
                tau = _time(g)
                res = self.value(v, env, max(now - tau, 0))
                if not isinstance(res, BoxedV):
                    raise Stuck(f"unboxing a non-resource {res}")
                if res.available_at > now:
                    raise MonitorViolation(now, res.available_at, res.rid)
                self.record("unbox", now, resource=res.rid, available_at=res.available_at)
                return self.comp(body, {**env, x: res.payload}, now)
        raise Stuck(f"not a computation: {m!r}")

    def _clause(self, c: Clause, env: dict) -> Callable:
        def run_clause(arg, kbox, now):
            return self.comp(c.body, {**env, c.arg: arg, c.cont: kbox}, now)

        return run_clause


# ---------------------------------------------------------------------------
# Drivers


def first_result(op: str, arg, result_type, now: int, sig: Signature):
    """Default operation oracle.

    Echoes the argument when it also fits the result carrier (``paint``
    hands back the parts it painted), else the first carrier element.
    """
    lits = carrier_of(result_type, sig)
    try:
        lit = literal_of(arg)
    except Exception:
        lit = None
    return absolutize(result_type, lit if lit in lits else lits[0], now)


def evaluate(m, sig: Signature, fuel: int = DEFAULT_FUEL, start: int = 0):
    """The (raw, non-canonical) tree of a closed computation."""
    return Evaluator(sig, fuel).comp(m, {}, start)


def run(m, sig: Signature, *, check: bool = True, oracle: Callable | None = None,
        fuel: int = DEFAULT_FUEL) -> RunResult:
    """Evaluate ``m`` and drive one path, recording a trace.

    With ``check`` the program is type checked first; otherwise the monitor is
    the only line of defence and may raise ``MonitorViolation``.
    """
    if free_vars(m):
        raise ClosedRequired(f"closed computation required (free: {', '.join(sorted(free_vars(m)))})")
    if check:
        infer_comp((), m, sig)
    oracle = oracle or (lambda op, arg, rt, now: first_result(op, arg, rt, now, sig))
    ev = Evaluator(sig, fuel)
    ev.recording = True
    try:
        raw = ev.comp(m, {}, 0)
        node, now = raw, 0
        while True:
            if isinstance(node, Ret):
                ev.record("return", now, value=value_json(node.value))
                break
            if isinstance(node, DelayNode):
                ev.record("delay", now, tau=node.tau)
                now += node.tau
                node = node.cont
            elif isinstance(node, OpNode):
                end = now + node.duration
                res = oracle(node.op, node.arg, node.result_type, end)
                ev.record("op", now, name=node.op, arg=value_json(node.arg),
                          duration=node.duration, result=value_json(res))
                node = node.cont(res)
                now = end
            else:
                raise Stuck(f"not a tree: {node!r}")
    finally:
        ev.recording = False
    return RunResult(canonicalize_delays(raw), ev.events, now)


def run_handled(m, clauses: tuple[Clause, ...], name: str, body, sig: Signature, **kw) -> RunResult:
    """Run ``handle m with clauses to name in body``."""
    return run(Handle(m, tuple(clauses), name, body), sig, **kw)


def monitor_all_paths(m, sig: Signature, fuel: int = DEFAULT_FUEL) -> int:
    """Evaluate every path of ``m`` (all operation results); returns the number of leaves.

    Raises ``MonitorViolation`` if any path unboxes a resource too early.
    """
    ev = Evaluator(sig, fuel)
    return force_all(ev.comp(m, {}, 0), sig)


__all__ = [
    "Evaluator", "Event", "RunResult", "ClosedRequired", "TRACE_SCHEMA", "evaluate", "run",
    "run_handled", "monitor_all_paths", "first_result", "Grade",
]
