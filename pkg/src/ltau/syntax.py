"""Abstract syntax of the calculus: types, terms, handlers, contexts, signatures.

Everything here is an immutable dataclass.  Term nodes carry an optional
source ``span`` that takes no part in equality.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Union

from .grades import ZERO, Grade

# ---------------------------------------------------------------------------
# Source positions


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class TBase:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class TUnit:
    def __str__(self) -> str:
        return "unit"


@dataclass(frozen=True)
class TProd:
    left: ValueType
    right: ValueType

    def __str__(self) -> str:
        left = f"({self.left})" if isinstance(self.left, (TProd, TFun)) else str(self.left)
        right = f"({self.right})" if isinstance(self.right, TFun) else str(self.right)
        return f"{left} * {right}"


@dataclass(frozen=True)
class TFun:
    dom: ValueType
    cod: CompType

    def __str__(self) -> str:
        dom = str(self.dom) if not isinstance(self.dom, TFun) else f"({self.dom})"
        return f"{dom} -> {self.cod}"


@dataclass(frozen=True)
class TBox:
    grade: Grade
    body: ValueType

    def __str__(self) -> str:
        body = f"({self.body})" if isinstance(self.body, (TProd, TFun)) else str(self.body)
        return f"[{self.grade}] {body}"


@dataclass(frozen=True)
class CompType:
    ret: ValueType
    grade: Grade

    def __str__(self) -> str:
        ret = f"({self.ret})" if isinstance(self.ret, TFun) else str(self.ret)
        return f"{ret} ! {self.grade}"


ValueType = Union[TBase, TUnit, TProd, TFun, TBox]


def is_ground(ty: ValueType) -> bool:
    """Ground types: base, unit, products and concrete boxes of ground types."""
    match ty:
        case TBase() | TUnit():
            return True
        case TProd(l, r):
            return is_ground(l) and is_ground(r)
        case TBox(g, body):
            return g.is_concrete and is_ground(body)
    return False


def type_is_concrete(ty: ValueType | CompType) -> bool:
    match ty:
        case TBase() | TUnit():
            return True
        case TProd(l, r):
            return type_is_concrete(l) and type_is_concrete(r)
        case TBox(g, body):
            return g.is_concrete and type_is_concrete(body)
        case TFun(d, c):
            return type_is_concrete(d) and type_is_concrete(c)
        case CompType(r, g):
            return g.is_concrete and type_is_concrete(r)
    raise TypeError(ty)


def instantiate_type(ty, rho: Grade):
    """Replace the rigid grade variable by ``rho`` throughout a type."""
    match ty:
        case TBase() | TUnit():
            return ty
        case TProd(l, r):
            return TProd(instantiate_type(l, rho), instantiate_type(r, rho))
        case TBox(g, body):
            return TBox(g.instantiate(rho), instantiate_type(body, rho))
        case TFun(d, c):
            return TFun(instantiate_type(d, rho), instantiate_type(c, rho))
        case CompType(r, g):
            return CompType(instantiate_type(r, rho), g.instantiate(rho))
    raise TypeError(ty)


UNIT = TUnit()

# ---------------------------------------------------------------------------
# Terms

_SPAN = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Var:
    name: str
    span: Span | None = _SPAN


@dataclass(frozen=True)
class Const:
    name: str
    args: tuple[Value, ...] = ()
    span: Span | None = _SPAN


@dataclass(frozen=True)
class Unit:
    span: Span | None = _SPAN


@dataclass(frozen=True)
class Pair:
    left: Value
    right: Value
    span: Span | None = _SPAN


@dataclass(frozen=True)
class Fun:
    param: str
    param_type: ValueType
    body: Computation
    span: Span | None = _SPAN


@dataclass(frozen=True)
class Box:
    grade: Grade
    value: Value
    span: Span | None = _SPAN


Value = Union[Var, Const, Unit, Pair, Fun, Box]


@dataclass(frozen=True)
class Return:
    value: Value
    span: Span | None = _SPAN


@dataclass(frozen=True)
class Let:
    name: str
    bound: Computation
    body: Computation
    span: Span | None = _SPAN


@dataclass(frozen=True)
class App:
    fn: Value
    arg: Value
    span: Span | None = _SPAN


@dataclass(frozen=True)
class Match:
    scrutinee: Value
    left: str
    right: str
    body: Computation
    span: Span | None = _SPAN


@dataclass(frozen=True)
class Op:
    op: str
    arg: Value
    name: str
    body: Computation
    span: Span | None = _SPAN


@dataclass(frozen=True)
class Delay:
    grade: Grade
    body: Computation
    span: Span | None = _SPAN


@dataclass(frozen=True)
class Clause:
    op: str
    arg: str
    cont: str
    body: Computation
    span: Span | None = _SPAN


@dataclass(frozen=True)
class Handle:
    comp: Computation
    clauses: tuple[Clause, ...]
    name: str
    body: Computation
    span: Span | None = _SPAN

    def clause(self, op: str) -> Clause | None:
        for c in self.clauses:
            if c.op == op:
                return c
        return None


@dataclass(frozen=True)
class Unbox:
    grade: Grade
    value: Value
    name: str
    body: Computation
    span: Span | None = _SPAN


Computation = Union[Return, Let, App, Match, Op, Delay, Handle, Unbox]
Term = Union[Value, Computation]

VALUE_NODES = (Var, Const, Unit, Pair, Fun, Box)
COMP_NODES = (Return, Let, App, Match, Op, Delay, Handle, Unbox)


def is_value(t) -> bool:
    return isinstance(t, VALUE_NODES)


# ---------------------------------------------------------------------------
# Contexts


@dataclass(frozen=True)
class VarBind:
    name: str
    type: ValueType

    def __str__(self) -> str:
        return f"{self.name} : {self.type}"


@dataclass(frozen=True)
class Mod:
    grade: Grade

    def __str__(self) -> str:
        return f"<{self.grade}>"


Entry = Union[VarBind, Mod]
Context = tuple  # tuple[Entry, ...]; the empty context is ()


def ctx_str(ctx: Context) -> str:
    return "·" if not ctx else "·, " + ", ".join(map(str, ctx))


def ctx_names(ctx: Context) -> list[str]:
    return [e.name for e in ctx if isinstance(e, VarBind)]


def extend(ctx: Context, *entries: Entry) -> Context:
    return tuple(ctx) + entries


def well_formed(ctx: Context) -> bool:
    names = ctx_names(ctx)
    return len(names) == len(set(names))


# ---------------------------------------------------------------------------
# Signatures


@dataclass(frozen=True)
class OpSig:
    name: str
    param: ValueType
    result: ValueType
    duration: Grade


@dataclass(frozen=True)
class ConstSig:
    name: str
    params: tuple[ValueType, ...]
    result: ValueType
    # maps argument tuples (of carrier literals) to a result literal
    table: Mapping[tuple, object] | None = None


@dataclass
class Signature:
    bases: dict[str, tuple[str, ...]] = field(default_factory=dict)
    consts: dict[str, ConstSig] = field(default_factory=dict)
    ops: dict[str, OpSig] = field(default_factory=dict)

    def element_base(self, name: str) -> str | None:
        for base, elems in self.bases.items():
            if name in elems:
                return base
        return None

    def is_constant(self, name: str) -> bool:
        return name in self.consts or self.element_base(name) is not None

    def carrier(self, ty: ValueType) -> list:
        """Enumerate the literal inhabitants of a ground type.

        Literals are carrier element names, ``()``, and 2-tuples for pairs.
        Boxes are transparent: the carrier of ``[t] A`` is that of ``A``.
        """
        match ty:
            case TBase(name):
                if name not in self.bases:
                    raise KeyError(f"unknown base type {name}")
                return list(self.bases[name])
            case TUnit():
                return [()]
            case TProd(l, r):
                return [(a, b) for a in self.carrier(l) for b in self.carrier(r)]
            case TBox(_, body):
                return self.carrier(body)
        raise ValueError(f"type {ty} has no finite carrier")


# ---------------------------------------------------------------------------
# Fresh names and binders

_counter = itertools.count(1)
_SUFFIX = re.compile(r"^(.*)\.(\d+)$")


def base_name(name: str) -> str:
    m = _SUFFIX.match(name)
    return m.group(1) if m else name


def fresh(name: str = "x") -> str:
    return f"{base_name(name)}.{next(_counter)}"


def reserve(name: str) -> None:
    """Advance the fresh-name supply past an explicitly written ``x.N`` name."""
    global _counter
    m = _SUFFIX.match(name)
    if m:
        current = next(_counter)
        _counter = itertools.count(max(current, int(m.group(2)) + 1))


def free_vars(t) -> set[str]:
    match t:
        case Var(x):
            return {x}
        case Const(_, args):
            return set().union(*(free_vars(a) for a in args)) if args else set()
        case Unit():
            return set()
        case Pair(l, r):
            return free_vars(l) | free_vars(r)
        case Fun(x, _, body):
            return free_vars(body) - {x}
        case Box(_, v):
            return free_vars(v)
        case Return(v):
            return free_vars(v)
        case Let(x, m, n):
            return free_vars(m) | (free_vars(n) - {x})
        case App(f, a):
            return free_vars(f) | free_vars(a)
        case Match(v, x, y, n):
            return free_vars(v) | (free_vars(n) - {x, y})
        case Op(_, v, x, m):
            return free_vars(v) | (free_vars(m) - {x})
        case Delay(_, m):
            return free_vars(m)
        case Handle(m, clauses, x, n):
            out = free_vars(m) | (free_vars(n) - {x})
            for c in clauses:
                out |= free_vars(c.body) - {c.arg, c.cont}
            return out
        case Unbox(_, v, x, n):
            return free_vars(v) | (free_vars(n) - {x})
    raise TypeError(f"not a term: {t!r}")


def binders(t) -> Iterator[str]:
    match t:
        case Var() | Unit():
            return
        case Const(_, args):
            for a in args:
                yield from binders(a)
        case Pair(l, r):
            yield from binders(l)
            yield from binders(r)
        case Fun(x, _, body):
            yield x
            yield from binders(body)
        case Box(_, v) | Return(v):
            yield from binders(v)
        case Let(x, m, n):
            yield x
            yield from binders(m)
            yield from binders(n)
        case App(f, a):
            yield from binders(f)
            yield from binders(a)
        case Match(v, x, y, n):
            yield x
            yield y
            yield from binders(v)
            yield from binders(n)
        case Op(_, v, x, m) | Unbox(_, v, x, m):
            yield x
            yield from binders(v)
            yield from binders(m)
        case Delay(_, m):
            yield from binders(m)
        case Handle(m, clauses, x, n):
            yield x
            yield from binders(m)
            yield from binders(n)
            for c in clauses:
                yield c.arg
                yield c.cont
                yield from binders(c.body)


def rename_free(t, mapping: Mapping[str, str]):
    """Rename free variables; binders are assumed distinct from the mapping's range."""
    if not mapping:
        return t
    return _rename(t, dict(mapping))


def _rename(t, m: dict[str, str]):
    def under(names: Iterable[str]) -> dict[str, str]:
        names = set(names)
        if not names & m.keys():
            return m
        return {k: v for k, v in m.items() if k not in names}

    match t:
        case Var(x):
            return replace(t, name=m.get(x, x))
        case Const(_, args):
            return replace(t, args=tuple(_rename(a, m) for a in args))
        case Unit():
            return t
        case Pair(l, r):
            return replace(t, left=_rename(l, m), right=_rename(r, m))
        case Fun(x, _, body):
            return replace(t, body=_rename(body, under([x])))
        case Box(_, v):
            return replace(t, value=_rename(v, m))
        case Return(v):
            return replace(t, value=_rename(v, m))
        case Let(x, a, b):
            return replace(t, bound=_rename(a, m), body=_rename(b, under([x])))
        case App(f, a):
            return replace(t, fn=_rename(f, m), arg=_rename(a, m))
        case Match(v, x, y, n):
            return replace(t, scrutinee=_rename(v, m), body=_rename(n, under([x, y])))
        case Op(_, v, x, b):
            return replace(t, arg=_rename(v, m), body=_rename(b, under([x])))
        case Delay(_, b):
            return replace(t, body=_rename(b, m))
        case Handle(a, clauses, x, n):
            cs = tuple(replace(c, body=_rename(c.body, under([c.arg, c.cont]))) for c in clauses)
            return replace(t, comp=_rename(a, m), clauses=cs, body=_rename(n, under([x])))
        case Unbox(_, v, x, n):
            return replace(t, value=_rename(v, m), body=_rename(n, under([x])))
    raise TypeError(f"not a term: {t!r}")


def refresh(t):
    """Alpha-rename every binder in ``t`` to a globally fresh name."""
    return _refresh(t, {})


def _refresh(t, env: dict[str, str]):
    def bind(*names: str) -> tuple[dict[str, str], list[str]]:
        new = [fresh(n) for n in names]
        return {**env, **dict(zip(names, new))}, new

    match t:
        case Var(x):
            return replace(t, name=env.get(x, x))
        case Const(_, args):
            return replace(t, args=tuple(_refresh(a, env) for a in args))
        case Unit():
            return t
        case Pair(l, r):
            return replace(t, left=_refresh(l, env), right=_refresh(r, env))
        case Fun(x, _, body):
            e, (x2,) = bind(x)
            return replace(t, param=x2, body=_refresh(body, e))
        case Box(_, v) | Return(v):
            return replace(t, value=_refresh(v, env))
        case Let(x, a, b):
            e, (x2,) = bind(x)
            return replace(t, name=x2, bound=_refresh(a, env), body=_refresh(b, e))
        case App(f, a):
            return replace(t, fn=_refresh(f, env), arg=_refresh(a, env))
        case Match(v, x, y, n):
            e, (x2, y2) = bind(x, y)
            return replace(t, scrutinee=_refresh(v, env), left=x2, right=y2, body=_refresh(n, e))
        case Op(_, v, x, b):
            e, (x2,) = bind(x)
            return replace(t, arg=_refresh(v, env), name=x2, body=_refresh(b, e))
        case Delay(_, b):
            return replace(t, body=_refresh(b, env))
        case Handle(a, clauses, x, n):
            cs = []
            for c in clauses:
                e, (a2, k2) = bind(c.arg, c.cont)
                cs.append(replace(c, arg=a2, cont=k2, body=_refresh(c.body, e)))
            e, (x2,) = bind(x)
            return replace(t, comp=_refresh(a, env), clauses=tuple(cs), name=x2, body=_refresh(n, e))
        case Unbox(_, v, x, n):
            e, (x2,) = bind(x)
            return replace(t, value=_refresh(v, env), name=x2, body=_refresh(n, e))
    raise TypeError(f"not a term: {t!r}")


def instantiate_term(t, rho: Grade):
    """Replace the rigid grade variable in all type annotations of ``t``."""
    match t:
        case Var() | Unit():
            return t
        case Const(_, args):
            return replace(t, args=tuple(instantiate_term(a, rho) for a in args))
        case Pair(l, r):
            return replace(t, left=instantiate_term(l, rho), right=instantiate_term(r, rho))
        case Fun(_, ty, body):
            return replace(t, param_type=instantiate_type(ty, rho), body=instantiate_term(body, rho))
        case Box(g, v):
            return replace(t, grade=g.instantiate(rho), value=instantiate_term(v, rho))
        case Return(v):
            return replace(t, value=instantiate_term(v, rho))
        case Let(_, a, b):
            return replace(t, bound=instantiate_term(a, rho), body=instantiate_term(b, rho))
        case App(f, a):
            return replace(t, fn=instantiate_term(f, rho), arg=instantiate_term(a, rho))
        case Match(v, _, _, n):
            return replace(t, scrutinee=instantiate_term(v, rho), body=instantiate_term(n, rho))
        case Op(_, v, _, b):
            return replace(t, arg=instantiate_term(v, rho), body=instantiate_term(b, rho))
        case Delay(g, b):
            return replace(t, grade=g.instantiate(rho), body=instantiate_term(b, rho))
        case Handle(a, clauses, _, n):
            # nested clauses bind their own rigid variable; leave them alone
            return replace(t, comp=instantiate_term(a, rho), body=instantiate_term(n, rho))
        case Unbox(g, v, _, n):
            return replace(t, grade=g.instantiate(rho), value=instantiate_term(v, rho),
                           body=instantiate_term(n, rho))
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Alpha-equivalence


def alpha_eq(t1, t2) -> bool:
    """Equality up to consistent renaming of bound variables."""
    return _alpha(t1, t2, {}, {})


def _alpha(a, b, l: dict[str, str], r: dict[str, str]) -> bool:
    def bind(xs: Iterable[str], ys: Iterable[str]):
        l2, r2 = dict(l), dict(r)
        for x, y in zip(xs, ys):
            marker = f"#{len(l2)}:{x}"
            l2[x] = marker
            r2[y] = marker
        return l2, r2

    if type(a) is not type(b):
        return False
    match a:
        case Var(x):
            return l.get(x, x) == r.get(b.name, b.name) and (x in l) == (b.name in r)
        case Const(f, args):
            return f == b.name and len(args) == len(b.args) and all(
                _alpha(p, q, l, r) for p, q in zip(args, b.args))
        case Unit():
            return True
        case Pair(x, y):
            return _alpha(x, b.left, l, r) and _alpha(y, b.right, l, r)
        case Fun(x, ty, body):
            if ty != b.param_type:
                return False
            l2, r2 = bind([x], [b.param])
            return _alpha(body, b.body, l2, r2)
        case Box(g, v):
            return g == b.grade and _alpha(v, b.value, l, r)
        case Return(v):
            return _alpha(v, b.value, l, r)
        case Let(x, m, n):
            l2, r2 = bind([x], [b.name])
            return _alpha(m, b.bound, l, r) and _alpha(n, b.body, l2, r2)
        case App(f, v):
            return _alpha(f, b.fn, l, r) and _alpha(v, b.arg, l, r)
        case Match(v, x, y, n):
            l2, r2 = bind([x, y], [b.left, b.right])
            return _alpha(v, b.scrutinee, l, r) and _alpha(n, b.body, l2, r2)
        case Op(op, v, x, m):
            l2, r2 = bind([x], [b.name])
            return op == b.op and _alpha(v, b.arg, l, r) and _alpha(m, b.body, l2, r2)
        case Delay(g, m):
            return g == b.grade and _alpha(m, b.body, l, r)
        case Handle(m, clauses, x, n):
            if not _alpha(m, b.comp, l, r):
                return False
            if sorted(c.op for c in clauses) != sorted(c.op for c in b.clauses):
                return False
            for c in clauses:
                d = b.clause(c.op)
                l2, r2 = bind([c.arg, c.cont], [d.arg, d.cont])
                if not _alpha(c.body, d.body, l2, r2):
                    return False
            l2, r2 = bind([x], [b.name])
            return _alpha(n, b.body, l2, r2)
        case Unbox(g, v, x, n):
            l2, r2 = bind([x], [b.name])
            return g == b.grade and _alpha(v, b.value, l, r) and _alpha(n, b.body, l2, r2)
    raise TypeError(f"not a term: {a!r}")


# ---------------------------------------------------------------------------
# Pretty-printing (output re-parses to an alpha-equivalent term)


def pretty(t, indent: int = 0) -> str:
    return _val(t) if is_value(t) else _pp(t, indent)


def _val(v) -> str:
    match v:
        case Var(x):
            return x
        case Const(f, ()):
            return f
        case Const(f, args):
            return f"{f}(" + ", ".join(_val(a) for a in args) + ")"
        case Unit():
            return "()"
        case Pair(a, b):
            return f"({_val(a)}, {_val(b)})"
        case Fun(x, ty, body):
            return f"(fun ({x} : {ty}) -> {_pp(body, 0)})"
        case Box(g, w):
            return f"box@{g} {_val(w)}"
    raise TypeError(f"not a value: {v!r}")


def _atom(v) -> str:
    s = _val(v)
    return f"({s})" if isinstance(v, Box) else s


def _pp(m, ind: int) -> str:
    pad = "\n" + "  " * ind
    match m:
        case Return(v):
            return f"return {_atom(v)}"
        case Let(x, a, b):
            return f"let {x} = {_pp_nested(a, ind + 1)} in{pad}{_pp(b, ind)}"
        case App(f, a):
            return f"{_atom(f)} {_atom(a)}"
        case Match(v, x, y, n):
            return f"match {_atom(v)} with ({x}, {y}) ->{pad}  {_pp(n, ind + 1)}"
        case Op(op, v, x, b):
            return f"perform {op} {_atom(v)} as {x} in{pad}{_pp(b, ind)}"
        case Delay(g, b):
            return f"delay {g} ({_pp(b, ind + 1)})"
        case Handle(a, clauses, x, n):
            inner = "  " * (ind + 1)
            cs = f"\n{inner}| ".join(
                f"{c.op} {c.arg} {c.cont} -> {_pp(c.body, ind + 2)}" for c in clauses)
            return (f"handle {_pp_nested(a, ind + 1)} with {{\n{inner}{cs}\n"
                    f"{'  ' * ind}}} to {x} in{pad}{_pp(n, ind)}")
        case Unbox(g, v, x, n):
            return f"unbox@{g} {_atom(v)} as {x} in{pad}{_pp(n, ind)}"
    raise TypeError(f"not a computation: {m!r}")


def _pp_nested(m, ind: int) -> str:
    s = _pp(m, ind)
    return s if isinstance(m, (Return, App)) else f"({s})"


def comp_children(m) -> list:
    """Immediate sub-terms of a computation (values and computations)."""
    match m:
        case Return(v):
            return [v]
        case Let(_, a, b):
            return [a, b]
        case App(f, a):
            return [f, a]
        case Match(v, _, _, n):
            return [v, n]
        case Op(_, v, _, b):
            return [v, b]
        case Delay(_, b):
            return [b]
        case Handle(a, clauses, _, n):
            return [a, *(c.body for c in clauses), n]
        case Unbox(_, v, _, n):
            return [v, n]
    return []


ZERO_GRADE = ZERO
