"""Directed normaliser for the equational theory, and a sound equivalence check.

Oriented rules (tags used in statistics and the coverage table):

    beta-fun, beta-match, beta-let, assoc-let, alg-op, alg-delay,
    beta-handle-return, beta-handle-op, beta-handle-delay, beta-unbox,
    delay-zero, delay-merge

The eta equations are never used for rewriting.  ``check_equiv`` applies two
of them (unit and let) as a final matching step only.

Termination: every step either shrinks the subject of a handler (handle-op
and handle-delay move the handler below one operation or delay of its
subject), or, for a fixed handler structure, decreases the let-nesting on the
bound side (assoc-let, alg-op, alg-delay), or removes a redex outright while
substituting values, which cannot create new redexes above the current node
in this terminating (simply typed, non-recursive) fragment.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

from .context import ctx_minus
from .errors import TypeMismatch
from .grades import ZERO, Grade
from .syntax import (
    UNIT, App, Box, CompType, Const, Delay, Fun, Handle, Let, Match, Mod, Op, Pair, Return,
    Signature, TUnit, Unbox, Unit, Var, VarBind, alpha_eq, fresh, instantiate_term, refresh,
    rename_free,
)
from .substitution import subst
from .typecheck import infer_comp, infer_value

BETA_TAGS = (
    "beta-fun", "beta-match", "beta-let", "assoc-let", "alg-op", "alg-delay",
    "beta-handle-return", "beta-handle-op", "beta-handle-delay", "beta-unbox",
)
ETA_TAGS = ("eta-unit", "eta-fun", "eta-match", "eta-let", "eta-unbox")
EQUATION_TAGS = (
    "eta-unit", "eta-fun", "beta-fun", "beta-match", "eta-match", "beta-let", "assoc-let",
    "eta-let", "alg-op", "alg-delay", "beta-handle-return", "beta-handle-op",
    "beta-handle-delay", "beta-unbox", "eta-unbox",
)
DELAY_TAGS = ("delay-zero", "delay-merge")


class Normalizer:
    def __init__(self, sig: Signature, stats: Counter | None = None) -> None:
        self.sig = sig
        self.stats = stats if stats is not None else Counter()

    def fire(self, tag: str) -> None:
        self.stats[tag] += 1

    # values -----------------------------------------------------------

    def value(self, v, ctx):
        match v:
            case Var() | Unit():
                return v
            case Const(_, args):
                return replace(v, args=tuple(self.value(a, ctx) for a in args))
            case Pair(l, r):
                return replace(v, left=self.value(l, ctx), right=self.value(r, ctx))
            case Fun(x, ty, body):
                return replace(v, body=self.comp(body, ctx + (VarBind(x, ty),)))
            case Box(g, w):
                return replace(v, value=self.value(w, ctx + (Mod(g),)))
        raise TypeError(f"not a value: {v!r}")

    # computations -----------------------------------------------------

    def delay(self, g: Grade, body):
        """Build ``delay g body`` for a normal ``body``, applying the delay laws."""
        if g == ZERO:
            self.fire("delay-zero")
            return body
        if isinstance(body, Delay):
            self.fire("delay-merge")
            return Delay(g + body.grade, body.body)
        return Delay(g, body)

    def comp(self, m, ctx):
        match m:
            case Return(v):
                return replace(m, value=self.value(v, ctx))
            case Let(x, a, b):
                return self.let(m, x, self.comp(a, ctx), b, ctx)
            case App(f, a):
                f2, a2 = self.value(f, ctx), self.value(a, ctx)
                if isinstance(f2, Fun):
                    self.fire("beta-fun")
                    return self.comp(subst(f2.body, a2, f2.param), ctx)
                return replace(m, fn=f2, arg=a2)
            case Match(v, x, y, body):
                v2 = self.value(v, ctx)
                if isinstance(v2, Pair):
                    self.fire("beta-match")
                    return self.comp(subst(subst(body, v2.left, x), v2.right, y), ctx)
                pty = infer_value(ctx, v2, self.sig)
                inner = ctx + (VarBind(x, pty.left), VarBind(y, pty.right))
                return replace(m, scrutinee=v2, body=self.comp(body, inner))
            case Op(op, v, x, body):
                s = self.sig.ops[op]
                inner = ctx + (Mod(s.duration), VarBind(x, s.result))
                return replace(m, arg=self.value(v, ctx), body=self.comp(body, inner))
            case Delay(g, body):
                return self.delay(g, self.comp(body, ctx + (Mod(g),)))
            case Handle(a, clauses, x, body):
                return self.handle(m, self.comp(a, ctx), ctx)
            case Unbox(g, v, x, body):
                v2 = self.value(v, ctx_minus(ctx, g))
                if isinstance(v2, Box) and v2.grade == g:
                    self.fire("beta-unbox")
                    return self.comp(subst(body, v2.value, x), ctx)
                bty = infer_value(ctx_minus(ctx, g), v2, self.sig)
                return replace(m, value=v2, body=self.comp(body, ctx + (VarBind(x, bty.body),)))
        raise TypeError(f"not a computation: {m!r}")

    def let(self, m, x, a, b, ctx):
        """``let x = a in b`` where ``a`` is already normal."""
        match a:
            case Return(v):
                self.fire("beta-let")
                return self.comp(subst(b, v, x), ctx)
            case Let(y, a1, a2):
                self.fire("assoc-let")
                return self.let(a, y, a1, Let(x, a2, b), ctx)
            case Op(op, v, y, cont):
                self.fire("alg-op")
                s = self.sig.ops[op]
                inner = ctx + (Mod(s.duration), VarBind(y, s.result))
                return replace(a, body=self.let(m, x, cont, b, inner))
            case Delay(g, cont):
                self.fire("alg-delay")
                return self.delay(g, self.let(m, x, cont, b, ctx + (Mod(g),)))
        ty = infer_comp(ctx, a, self.sig)
        body = self.comp(b, ctx + (Mod(ty.grade), VarBind(x, ty.ret)))
        return Let(x, a, body, span=getattr(m, "span", None))

    def handle(self, m: Handle, a, ctx):
        """``handle a with H to x in N`` where ``a`` is already normal."""
        match a:
            case Return(v):
                self.fire("beta-handle-return")
                return self.comp(subst(m.body, v, m.name), ctx)
            case Op(op, v, y, cont):
                self.fire("beta-handle-op")
                s = self.sig.ops[op]
                clause = m.clause(op)
                rest = Handle(cont, m.clauses, m.name, m.body)
                inner = ctx + (Mod(s.duration), VarBind(y, s.result))
                rho = infer_comp(inner, rest, self.sig).grade
                k = Box(s.duration, Fun(y, s.result, rest))
                # fresh parameter names so the argument cannot be captured by the continuation
                p, kk = fresh(clause.arg), fresh(clause.cont)
                body = rename_free(clause.body, {clause.arg: p, clause.cont: kk})
                body = refresh(instantiate_term(body, rho))
                body = subst(subst(body, v, p), k, kk)
                return self.comp(body, ctx)
            case Delay(g, cont):
                self.fire("beta-handle-delay")
                rest = Handle(cont, m.clauses, m.name, m.body)
                return self.delay(g, self.handle(rest, cont, ctx + (Mod(g),)))
        ty = infer_comp(ctx, a, self.sig)
        body = self.comp(m.body, ctx + (Mod(ty.grade), VarBind(m.name, ty.ret)))
        return replace(m, comp=a, body=body)


def normalize(m, sig: Signature, ctx=(), stats: Counter | None = None):
    """Normal form of ``m`` under the oriented equations (``m`` must be well typed)."""
    return Normalizer(sig, stats).comp(m, tuple(ctx))


# ---------------------------------------------------------------------------
# Equivalence


@dataclass(frozen=True)
class Verdict:
    equal: bool
    via: tuple[str, ...] = ()

    def __str__(self) -> str:
        return "Equal" if self.equal else "Unknown"


EQUAL = Verdict(True)
UNKNOWN = Verdict(False)


def check_equiv(m, n, sig: Signature, ctx=(), stats: Counter | None = None) -> Verdict:
    """``Equal`` if both sides meet after normalisation (and eta matching), else ``Unknown``."""
    ctx = tuple(ctx)
    tm, tn = infer_comp(ctx, m, sig), infer_comp(ctx, n, sig)
    if tm != tn:
        raise TypeMismatch(f"sides have types {tm} and {tn}", rule="equiv", expected=tm, actual=tn)
    nm, nn = normalize(m, sig, ctx, stats), normalize(n, sig, ctx, stats)
    if alpha_eq(nm, nn):
        return EQUAL
    used: list[str] = []
    em = _EtaMatcher(sig, used).comp(nm, ctx)
    en = _EtaMatcher(sig, used).comp(nn, ctx)
    if alpha_eq(em, en):
        tags = tuple(sorted(set(used)))
        if stats is not None:
            for t in tags:
                stats[t] += 1
        return Verdict(True, tags)
    return UNKNOWN


class _EtaMatcher:
    """Contract let-eta redexes and replace unit-typed variables by ``()``."""

    def __init__(self, sig: Signature, used: list[str]) -> None:
        self.sig = sig
        self.used = used

    def value(self, v, ctx):
        match v:
            case Var():
                if isinstance(infer_value(ctx, v, self.sig), TUnit):
                    self.used.append("eta-unit")
                    return Unit(span=v.span)
                return v
            case Unit():
                return v
            case Const(_, args):
                return replace(v, args=tuple(self.value(a, ctx) for a in args))
            case Pair(l, r):
                return replace(v, left=self.value(l, ctx), right=self.value(r, ctx))
            case Fun(x, ty, body):
                return replace(v, body=self.comp(body, ctx + (VarBind(x, ty),)))
            case Box(g, w):
                return replace(v, value=self.value(w, ctx + (Mod(g),)))
        raise TypeError(v)

    def comp(self, m, ctx):
        match m:
            case Return(v):
                return replace(m, value=self.value(v, ctx))
            case Let(x, a, Return(Var(y))) if x == y:
                self.used.append("eta-let")
                return self.comp(a, ctx)
            case Let(x, a, b):
                ty = infer_comp(ctx, a, self.sig)
                return replace(m, bound=self.comp(a, ctx),
                               body=self.comp(b, ctx + (Mod(ty.grade), VarBind(x, ty.ret))))
            case App(f, a):
                return replace(m, fn=self.value(f, ctx), arg=self.value(a, ctx))
            case Match(v, x, y, body):
                pty = infer_value(ctx, v, self.sig)
                return replace(m, scrutinee=self.value(v, ctx),
                               body=self.comp(body, ctx + (VarBind(x, pty.left), VarBind(y, pty.right))))
            case Op(op, v, x, body):
                s = self.sig.ops[op]
                return replace(m, arg=self.value(v, ctx),
                               body=self.comp(body, ctx + (Mod(s.duration), VarBind(x, s.result))))
            case Delay(g, body):
                return replace(m, body=self.comp(body, ctx + (Mod(g),)))
            case Handle(a, clauses, x, body):
                ty = infer_comp(ctx, a, self.sig)
                return replace(m, comp=self.comp(a, ctx),
                               body=self.comp(body, ctx + (Mod(ty.grade), VarBind(x, ty.ret))))
            case Unbox(g, v, x, body):
                early = ctx_minus(ctx, g)
                bty = infer_value(early, v, self.sig)
                return replace(m, value=self.value(v, early),
                               body=self.comp(body, ctx + (VarBind(x, bty.body),)))
        raise TypeError(m)


__all__ = [
    "normalize", "check_equiv", "Verdict", "EQUAL", "UNKNOWN", "Normalizer", "BETA_TAGS",
    "ETA_TAGS", "EQUATION_TAGS", "DELAY_TAGS", "CompType", "UNIT",
]
