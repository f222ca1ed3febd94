"""Capture-avoiding substitution ``t[w/x]``.

Under ``unbox@tau V as y in N`` the boxed value ``V`` lives in the context cut
back by ``tau``.  When a typing derivation for ``t`` is supplied, ``x`` is
substituted into ``V`` only if it survives that cut, i.e. only if at least
``tau`` worth of modalities sit to the right of ``x`` at the unbox.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .context import var_lookup
from .errors import UnboundVariable
from .syntax import (
    App, Box, Const, Delay, Fun, Handle, Let, Match, Op, Pair, Return, Unbox, Unit, Var, fresh,
    free_vars, refresh, rename_free,
)
from .typecheck import Typed


@dataclass(frozen=True)
class UnboxCase:
    """One unbox met during substitution: did ``x`` survive the cut?"""

    grade: object
    elapsed: object
    kept: bool


def subst(t, w, x: str, typed: Typed | None = None, log: list | None = None):
    """Replace free occurrences of ``x`` in ``t`` by ``w``."""
    return _Subst(w, x, typed, log).go(t)


def subst_many(t, pairs: dict[str, object]):
    """Sequential substitution; the values' free variables must avoid the keys."""
    for x, w in pairs.items():
        t = subst(t, w, x)
    return t


class _Subst:
    def __init__(self, w, x, typed, log):
        self.w = w
        self.x = x
        self.typed = typed
        self.log = log
        self.fv_w = free_vars(w)

    def copy(self):
        return refresh(self.w)

    def binder(self, name: str, body):
        """Rename ``name`` in ``body`` if it would capture a free variable of ``w``."""
        if name in self.fv_w:
            new = fresh(name)
            return new, rename_free(body, {name: new})
        return name, body

    def go(self, t):
        x = self.x
        match t:
            case Var(y):
                return self.copy() if y == x else t
            case Const(_, args):
                return replace(t, args=tuple(self.go(a) for a in args))
            case Unit():
                return t
            case Pair(l, r):
                return replace(t, left=self.go(l), right=self.go(r))
            case Fun(y, _, body):
                if y == x:
                    return t
                y, body = self.binder(y, body)
                return replace(t, param=y, body=self.go(body))
            case Box(_, v):
                return replace(t, value=self.go(v))
            case Return(v):
                return replace(t, value=self.go(v))
            case Let(y, a, b):
                a2 = self.go(a)
                if y == x:
                    return replace(t, bound=a2)
                y, b = self.binder(y, b)
                return replace(t, name=y, bound=a2, body=self.go(b))
            case App(f, a):
                return replace(t, fn=self.go(f), arg=self.go(a))
            case Match(v, y, z, body):
                v2 = self.go(v)
                if x in (y, z):
                    return replace(t, scrutinee=v2)
                y, body = self.binder(y, body)
                z, body = self.binder(z, body)
                return replace(t, scrutinee=v2, left=y, right=z, body=self.go(body))
            case Op(_, v, y, body):
                v2 = self.go(v)
                if y == x:
                    return replace(t, arg=v2)
                y, body = self.binder(y, body)
                return replace(t, arg=v2, name=y, body=self.go(body))
            case Delay(_, body):
                return replace(t, body=self.go(body))
            case Handle(a, clauses, y, body):
                cs = []
                for c in clauses:
                    if x in (c.arg, c.cont):
                        cs.append(c)
                        continue
                    p, cb = self.binder(c.arg, c.body)
                    k, cb = self.binder(c.cont, cb)
                    cs.append(replace(c, arg=p, cont=k, body=self.go(cb)))
                a2 = self.go(a)
                if y == x:
                    return replace(t, comp=a2, clauses=tuple(cs))
                y, body = self.binder(y, body)
                return replace(t, comp=a2, clauses=tuple(cs), name=y, body=self.go(body))
            case Unbox(g, v, y, body):
                v2 = self.go(v) if self.survives(t) else v
                if y == x:
                    return replace(t, value=v2)
                y, body = self.binder(y, body)
                return replace(t, value=v2, name=y, body=self.go(body))
        raise TypeError(f"not a term: {t!r}")

    def survives(self, node: Unbox) -> bool:
        if self.typed is None or id(node) not in self.typed.nodes:
            return self.x in free_vars(node.value)
        ctx = self.typed.nodes[id(node)].ctx
        try:
            _, elapsed = var_lookup(ctx, self.x)
        except UnboundVariable:
            return False
        kept = node.grade <= elapsed
        if self.log is not None:
            self.log.append(UnboxCase(node.grade, elapsed, kept))
        return kept


__all__ = ["subst", "subst_many", "UnboxCase"]
