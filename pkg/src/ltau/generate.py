"""Seeded generators for contexts, well-typed terms, renamings and substitution instances.

Terms are built type-directed, so every output is well typed by construction;
callers still re-check them, which is the point of the property suites.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .context import ctx_minus, ctx_time
from .errors import SideConditionViolated
from .grades import Grade
from .parser import parse_signature
from .renaming import Id, Renaming, compose, derived_structural
from .syntax import (
    UNIT, App, Box, Clause, CompType, Const, Delay, Fun, Handle, Let, Match, Mod, Op, Pair,
    Return, Signature, TBase, TBox, TFun, TProd, TUnit, Unbox, Unit, Var, VarBind,
)

GEN_SIGNATURE = """\
base Door = {door1, door2}
base Bit = {b0, b1}
const flip : (Bit) -> Bit = {b0 -> b1, b1 -> b0}
const pick : (Bit, Door) -> Door = {(b0, door1) -> door1, (b0, door2) -> door2, (b1, door1) -> door2, (b1, door2) -> door1}
operation tick : unit ~> unit ! 1
operation wait : Door ~> Door ! 2
operation probe : Bit ~> Bit * Door ! 0
"""


def gen_signature() -> Signature:
    return parse_signature(GEN_SIGNATURE)


DOOR, BIT = TBase("Door"), TBase("Bit")
GROUND = (UNIT, DOOR, BIT)


class TermGen:
    """Random well-typed terms over a fixed signature."""

    def __init__(self, rng: random.Random, sig: Signature | None = None, max_grade: int = 4,
                 handlers: bool = True) -> None:
        self.rng = rng
        self.sig = sig or gen_signature()
        self.max_grade = max_grade
        self.handlers = handlers
        self._n = 0

    def name(self, stem: str = "v") -> str:
        self._n += 1
        return f"{stem}{self._n}"

    # types ------------------------------------------------------------

    def ground(self, depth: int = 1):
        r = self.rng
        if depth > 0 and r.random() < 0.2:
            return TProd(self.ground(depth - 1), self.ground(depth - 1))
        return r.choice(GROUND)

    def vtype(self, depth: int = 1):
        r = self.rng.random()
        if depth > 0 and r < 0.15:
            return TBox(Grade.of(self.rng.randint(0, 3)), self.vtype(depth - 1))
        if depth > 0 and r < 0.25:
            return TFun(self.ground(0), CompType(self.ground(0), Grade.of(self.rng.randint(0, 2))))
        return self.ground(depth)

    def context(self, length: int | None = None, prefix: str = "g"):
        r = self.rng
        n = r.randint(0, 5) if length is None else length
        out = []
        for _ in range(n):
            if r.random() < 0.4:
                out.append(Mod(Grade.of(r.randint(0, 3))))
            else:
                out.append(VarBind(self.name(prefix), self.vtype()))
        return tuple(out)

    # values -----------------------------------------------------------

    def value(self, ctx, ty, depth: int):
        r = self.rng
        names = [e.name for e in ctx if isinstance(e, VarBind) and e.type == ty]
        if names and r.random() < 0.6:
            return Var(r.choice(names))
        match ty:
            case TUnit():
                return Unit()
            case TBase(b):
                if depth > 0 and r.random() < 0.3:
                    if b == "Bit":
                        return Const("flip", (self.value(ctx, BIT, depth - 1),))
                    return Const("pick", (self.value(ctx, BIT, depth - 1), self.value(ctx, DOOR, depth - 1)))
                return Const(r.choice(self.sig.bases[b]))
            case TProd(a, b):
                return Pair(self.value(ctx, a, depth - 1), self.value(ctx, b, depth - 1))
            case TBox(g, a):
                return Box(g, self.value(ctx + (Mod(g),), a, depth - 1))
            case TFun(a, cod):
                x = self.name("x")
                return Fun(x, a, self.comp(ctx + (VarBind(x, a),), cod.ret, int(cod.grade), depth - 1))
        raise TypeError(ty)

    # computations -----------------------------------------------------

    def comp(self, ctx, ty, grade: int, depth: int):
        """A computation of type ``ty ! grade`` in ``ctx``."""
        r = self.rng
        if depth <= 0:
            leaf = Return(self.value(ctx, ty, 0))
            return Delay(Grade.of(grade), leaf) if grade else leaf
        choices = ["return", "delay", "let", "op", "app", "match", "unbox"]
        if self.handlers:
            choices.append("handle")
        for _ in range(20):
            kind = r.choice(choices)
            m = getattr(self, "_" + kind)(ctx, ty, grade, depth)
            if m is not None:
                return m
        return self._delay(ctx, ty, grade, depth)

    def _return(self, ctx, ty, grade, depth):
        if grade:
            return None
        return Return(self.value(ctx, ty, depth))

    def _delay(self, ctx, ty, grade, depth):
        k = self.rng.randint(0, grade)
        g = Grade.of(k)
        return Delay(g, self.comp(ctx + (Mod(g),), ty, grade - k, depth - 1))

    def _let(self, ctx, ty, grade, depth):
        a = self.rng.randint(0, grade)
        aty = self.vtype()
        x = self.name("x")
        first = self.comp(ctx, aty, a, depth - 1)
        rest = self.comp(ctx + (Mod(Grade.of(a)), VarBind(x, aty)), ty, grade - a, depth - 1)
        return Let(x, first, rest)

    def _op(self, ctx, ty, grade, depth):
        ops = [s for s in self.sig.ops.values() if int(s.duration) <= grade]
        if not ops:
            return None
        s = self.rng.choice(ops)
        y = self.name("y")
        body = self.comp(ctx + (Mod(s.duration), VarBind(y, s.result)), ty, grade - int(s.duration),
                         depth - 1)
        return Op(s.name, self.value(ctx, s.param, depth - 1), y, body)

    def _app(self, ctx, ty, grade, depth):
        want = CompType(ty, Grade.of(grade))
        fns = [e for e in ctx if isinstance(e, VarBind) and isinstance(e.type, TFun)
               and e.type.cod == want]
        if fns and self.rng.random() < 0.6:
            f = self.rng.choice(fns)
            return App(Var(f.name), self.value(ctx, f.type.dom, depth - 1))
        if not isinstance(ty, (TUnit, TBase, TProd)):
            return None
        dom = self.ground(0)
        fn = self.value(ctx, TFun(dom, want), depth)
        return App(fn, self.value(ctx, dom, depth - 1))

    def _match(self, ctx, ty, grade, depth):
        pairs = [e for e in ctx if isinstance(e, VarBind) and isinstance(e.type, TProd)]
        if pairs and self.rng.random() < 0.7:
            p = self.rng.choice(pairs)
            v, pty = Var(p.name), p.type
        else:
            pty = TProd(self.ground(0), self.ground(0))
            v = self.value(ctx, pty, depth - 1)
        x, y = self.name("x"), self.name("y")
        inner = ctx + (VarBind(x, pty.left), VarBind(y, pty.right))
        return Match(v, x, y, self.comp(inner, ty, grade, depth - 1))

    def _unbox(self, ctx, ty, grade, depth):
        r = self.rng
        have = int(ctx_time(ctx))
        tau = r.randint(0, have)
        g = Grade.of(tau)
        early = ctx_minus(ctx, g)
        boxed = [e for e in early if isinstance(e, VarBind) and isinstance(e.type, TBox)
                 and e.type.grade == g]
        if boxed and r.random() < 0.7:
            b = r.choice(boxed)
            v, inner_ty = Var(b.name), b.type.body
        else:
            inner_ty = self.vtype(0)
            v = Box(g, self.value(early + (Mod(g),), inner_ty, depth - 1))
        x = self.name("x")
        return Unbox(g, v, x, self.comp(ctx + (VarBind(x, inner_ty),), ty, grade, depth - 1))

    def _handle(self, ctx, ty, grade, depth):
        if not isinstance(ty, (TUnit, TBase, TProd)):
            return None
        a = self.rng.randint(0, grade)
        aty = self.ground(0)
        x = self.name("x")
        first = self.comp(ctx, aty, a, depth - 1)
        rest = self.comp(ctx + (Mod(Grade.of(a)), VarBind(x, aty)), ty, grade - a, depth - 1)
        return Handle(first, self.clauses(ctx, ty), x, rest)

    def clauses(self, ctx, result):
        """One clause per operation: forward it, or wait and resume with a made-up result."""
        out = []
        for s in self.sig.ops.values():
            p, k, f, y = self.name("p"), self.name("k"), self.name("f"), self.name("y")
            cctx = ctx + (VarBind(p, s.param),)
            resume = Unbox(s.duration, Var(k), f, App(Var(f), Var(y)))
            if self.rng.random() < 0.5:
                body = Op(s.name, Var(p), y, resume)
            else:
                later = cctx + (Mod(s.duration),)
                res = self.value(later, s.result, 1)
                body = Delay(s.duration, Unbox(s.duration, Var(k), f, App(Var(f), res)))
            out.append(Clause(s.name, p, k, body))
        return tuple(out)

    def closed(self, depth: int = 4):
        """A closed program with a random type and grade."""
        ty = self.ground()
        return self.comp((), ty, self.rng.randint(0, self.max_grade), depth)


# ---------------------------------------------------------------------------
# Renamings and substitution instances


def random_renaming(rng: random.Random, ctx, steps: int = 3, gen: TermGen | None = None) -> Renaming:
    """Compose ``steps`` random structural rules starting from ``ctx``."""
    gen = gen or TermGen(rng)
    rho: Renaming = Id(tuple(ctx))
    for _ in range(steps):
        cur = rho.target
        for _attempt in range(10):
            kind = rng.choice(("weaken-ctx", "exchange-vars", "exchange-var-mod", "contract",
                               "split-mod", "join-mod", "grow-mod", "drop-zero-mod", "add-zero-mod"))
            at = rng.randint(0, len(cur))
            params: dict = {}
            if kind == "weaken-ctx":
                params["extra"] = gen.context(rng.randint(1, 2), prefix="w")
            elif kind == "contract":
                # the variable at ``at`` is redirected to an earlier one of the same type
                if at < len(cur) and isinstance(cur[at], VarBind):
                    same = [e.name for e in cur[:at] if isinstance(e, VarBind) and e.type == cur[at].type]
                    if not same:
                        continue
                    params["onto"] = rng.choice(same)
            elif kind == "split-mod":
                if at < len(cur) and isinstance(cur[at], Mod):
                    params["first"] = rng.randint(0, int(cur[at].grade))
            elif kind == "grow-mod":
                if at < len(cur) and isinstance(cur[at], Mod):
                    params["to"] = int(cur[at].grade) + rng.randint(0, 3)
            try:
                step = derived_structural(kind, cur, at, **params)
            except (SideConditionViolated, KeyError):
                continue
            rho = compose(rho, step)
            break
    return rho


@dataclass(frozen=True)
class SubstInstance:
    """``t`` typed in ``outer, x:X, inner``; ``w : X`` typed in ``outer``."""

    outer: tuple
    x: str
    xty: object
    inner: tuple
    w: object
    term: object

    @property
    def ctx(self):
        return self.outer + (VarBind(self.x, self.xty),) + self.inner


def random_subst_instance(rng: random.Random, depth: int = 3, gen: TermGen | None = None) -> SubstInstance:
    gen = gen or TermGen(rng)
    outer = gen.context(rng.randint(0, 3))
    xty = gen.vtype()
    x = gen.name("s")
    w = gen.value(outer, xty, 2)
    # modalities on the left of x let unboxes reach past it, which is where drops happen
    inner = gen.context(rng.randint(0, 3), prefix="h")
    if rng.random() < 0.6:
        outer = outer + (Mod(Grade.of(rng.randint(1, 4))),)
        w = gen.value(outer, xty, 2)
    ctx = outer + (VarBind(x, xty),) + inner
    term = gen.comp(ctx, gen.ground(0), rng.randint(0, 3), depth)
    return SubstInstance(outer, x, xty, inner, w, term)


__all__ = [
    "GEN_SIGNATURE", "gen_signature", "TermGen", "random_renaming", "SubstInstance",
    "random_subst_instance",
]
