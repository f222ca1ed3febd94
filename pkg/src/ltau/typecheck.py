"""Syntax-directed type-and-effect checker.

Every rule is implemented exactly; grade equality is componentwise and there
is no sub-effecting.  Handler clauses are checked once with the rigid grade
variable ``rho`` standing for the continuation's duration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .context import ctx_is_concrete, ctx_minus, ctx_time, var_lookup
from .errors import (
    ArityMismatch, GradeMismatch, MissingClause, NotAFunction, NotAPair, NotBoxed,
    SymbolicUnderflow, TemporalViolation, TypeMismatch, UnboundVariable, UnknownConstant,
    UnknownOperation,
)
from .grades import RHO, ZERO, Grade
from .syntax import (
    UNIT, App, Box, CompType, Const, Context, Delay, Fun, Handle, Let, Match, Mod, Op, Pair,
    Return, Signature, TBase, TBox, TFun, TProd, Unbox, Unit, Var, VarBind, type_is_concrete,
)

VALUE_RULES = ("Var", "Const", "Unit", "Pair", "Fun", "Box")
COMP_RULES = ("Return", "Let", "Apply", "Match", "Op", "Delay", "Handle", "Unbox")


@dataclass(frozen=True)
class NodeInfo:
    ctx: Context
    type: object  # ValueType for values, CompType for computations
    rule: str


@dataclass
class Typed:
    """A computation together with the judgement recorded at each of its nodes."""

    term: object
    ctx: Context
    type: CompType
    nodes: dict[int, NodeInfo] = field(default_factory=dict)
    rules: set[str] = field(default_factory=set)

    def info(self, node) -> NodeInfo:
        return self.nodes[id(node)]


class Checker:
    def __init__(self, sig: Signature, record: bool = False) -> None:
        self.sig = sig
        self.record = record
        self.nodes: dict[int, NodeInfo] = {}
        self.rules: set[str] = set()

    def _note(self, node, ctx, ty, rule):
        self.rules.add(rule)
        if self.record:
            self.nodes.setdefault(id(node), NodeInfo(ctx, ty, rule))
        return ty

    # values -----------------------------------------------------------

    def value(self, ctx: Context, v):
        match v:
            case Var(x):
                try:
                    ty, _ = var_lookup(ctx, x)
                except UnboundVariable as e:
                    e.span = v.span
                    raise
                return self._note(v, ctx, ty, "Var")
            case Const(f, args):
                return self._note(v, ctx, self._const(ctx, v, f, args), "Const")
            case Unit():
                return self._note(v, ctx, UNIT, "Unit")
            case Pair(l, r):
                return self._note(v, ctx, TProd(self.value(ctx, l), self.value(ctx, r)), "Pair")
            case Fun(x, ty, body):
                cod = self.comp(ctx + (VarBind(x, ty),), body)
                return self._note(v, ctx, TFun(ty, cod), "Fun")
            case Box(g, w):
                inner = self.value(ctx + (Mod(g),), w)
                return self._note(v, ctx, TBox(g, inner), "Box")
        raise TypeError(f"not a value: {v!r}")

    def _const(self, ctx, v, f, args):
        base = self.sig.element_base(f)
        if base is not None:
            if args:
                raise ArityMismatch(f"{f} is a carrier element and takes no arguments",
                                    span=v.span, expected=0, actual=len(args))
            return TBase(base)
        c = self.sig.consts.get(f)
        if c is None:
            raise UnknownConstant(f"unknown constant {f}", span=v.span)
        if len(args) != len(c.params):
            raise ArityMismatch(f"{f} expects {len(c.params)} arguments, got {len(args)}",
                                span=v.span, expected=len(c.params), actual=len(args))
        for a, p in zip(args, c.params):
            got = self.value(ctx, a)
            if got != p:
                raise TypeMismatch(f"argument of {f} has type {got}, expected {p}",
                                   rule="Const", span=v.span, expected=p, actual=got)
        return c.result

    # computations -----------------------------------------------------

    def comp(self, ctx: Context, m) -> CompType:
        match m:
            case Return(v):
                ty = CompType(self.value(ctx, v), ZERO)
                return self._note(m, ctx, ty, "Return")
            case Let(x, a, b):
                first = self.comp(ctx, a)
                rest = self.comp(ctx + (Mod(first.grade), VarBind(x, first.ret)), b)
                return self._note(m, ctx, CompType(rest.ret, first.grade + rest.grade), "Let")
            case App(f, a):
                fty = self.value(ctx, f)
                if not isinstance(fty, TFun):
                    raise NotAFunction(f"applying a value of type {fty}", span=m.span, actual=fty)
                aty = self.value(ctx, a)
                if aty != fty.dom:
                    raise TypeMismatch(f"argument has type {aty}, expected {fty.dom}", rule="Apply",
                                       span=m.span, expected=fty.dom, actual=aty)
                return self._note(m, ctx, fty.cod, "Apply")
            case Match(v, x, y, body):
                vty = self.value(ctx, v)
                if not isinstance(vty, TProd):
                    raise NotAPair(f"matching on a value of type {vty}", span=m.span, actual=vty)
                res = self.comp(ctx + (VarBind(x, vty.left), VarBind(y, vty.right)), body)
                return self._note(m, ctx, res, "Match")
            case Op(op, v, x, body):
                s = self.sig.ops.get(op)
                if s is None:
                    raise UnknownOperation(f"unknown operation {op}", span=m.span)
                aty = self.value(ctx, v)
                if aty != s.param:
                    raise TypeMismatch(f"argument of {op} has type {aty}, expected {s.param}",
                                       rule="Op", span=m.span, expected=s.param, actual=aty)
                rest = self.comp(ctx + (Mod(s.duration), VarBind(x, s.result)), body)
                return self._note(m, ctx, CompType(rest.ret, s.duration + rest.grade), "Op")
            case Delay(g, body):
                rest = self.comp(ctx + (Mod(g),), body)
                return self._note(m, ctx, CompType(rest.ret, g + rest.grade), "Delay")
            case Handle():
                return self._note(m, ctx, self._handle(ctx, m), "Handle")
            case Unbox(g, v, x, body):
                have = ctx_time(ctx)
                if not g <= have:
                    raise TemporalViolation(f"needed {g}, have {have}", span=m.span,
                                            expected=g, actual=have)
                earlier = ctx_minus(ctx, g)
                vty = self.value(earlier, v)
                if not isinstance(vty, TBox):
                    raise NotBoxed(f"unboxing a value of type {vty}", span=m.span, actual=vty)
                if vty.grade != g:
                    raise TypeMismatch(f"unbox@{g} applied to a value of type {vty}", rule="Unbox",
                                       span=m.span, expected=TBox(g, vty.body), actual=vty)
                res = self.comp(ctx + (VarBind(x, vty.body),), body)
                return self._note(m, ctx, res, "Unbox")
        raise TypeError(f"not a computation: {m!r}")

    def _handle(self, ctx: Context, m: Handle) -> CompType:
        first = self.comp(ctx, m.comp)
        rest = self.comp(ctx + (Mod(first.grade), VarBind(m.name, first.ret)), m.body)
        self.check_handler(ctx, m, rest.ret)
        return CompType(rest.ret, first.grade + rest.grade)

    def check_handler(self, ctx: Context, m: Handle, result) -> dict[str, CompType]:
        """Check every clause once with ``rho`` rigid; grades must equal ``tau_op + rho``."""
        for op in self.sig.ops:
            if m.clause(op) is None:
                raise MissingClause(f"handler has no clause for {op}", span=m.span, expected=op)
        for c in m.clauses:
            if c.op not in self.sig.ops:
                raise UnknownOperation(f"clause for unknown operation {c.op}", span=c.span)
        if not (ctx_is_concrete(ctx) and type_is_concrete(result)):
            raise SymbolicUnderflow("a handler whose context or result mentions rho cannot "
                                    "quantify over a fresh continuation grade",
                                    rule="Handle", span=m.span)
        out = {}
        for c in m.clauses:
            s = self.sig.ops[c.op]
            kty = TBox(s.duration, TFun(s.result, CompType(result, RHO)))
            cctx = ctx + (VarBind(c.arg, s.param), VarBind(c.cont, kty))
            got = self.comp(cctx, c.body)
            want = CompType(result, s.duration + RHO)
            if got.ret != result:
                raise TypeMismatch(f"clause for {c.op} returns {got.ret}, expected {result}",
                                   rule="Handle", span=c.span, expected=result, actual=got.ret)
            if got.grade != want.grade:
                raise GradeMismatch(f"clause for {c.op} has grade {got.grade}, expected {want.grade}",
                                    span=c.span, expected=want.grade, actual=got.grade)
            out[c.op] = got
        return out


def infer_value(ctx: Context, v, sig: Signature):
    return Checker(sig).value(tuple(ctx), v)


def infer_comp(ctx: Context, m, sig: Signature) -> CompType:
    return Checker(sig).comp(tuple(ctx), m)


def check_handler(ctx: Context, m: Handle, result, sig: Signature) -> dict[str, CompType]:
    return Checker(sig).check_handler(tuple(ctx), m, result)


def elaborate(m, sig: Signature, ctx: Context = ()) -> Typed:
    """Type ``m`` and record the judgement (context, type, rule) at every node."""
    ch = Checker(sig, record=True)
    ty = ch.comp(tuple(ctx), m)
    return Typed(m, tuple(ctx), ty, ch.nodes, ch.rules)


def rules_used(m, sig: Signature, ctx: Context = ()) -> set[str]:
    ch = Checker(sig)
    ch.comp(tuple(ctx), m)
    return ch.rules


__all__ = [
    "Checker", "NodeInfo", "Typed", "infer_value", "infer_comp", "check_handler", "elaborate",
    "rules_used", "VALUE_RULES", "COMP_RULES", "Grade",
]
