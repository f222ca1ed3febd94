"""Computation trees: the free graded monad with return, operation and delay nodes.

Trees are built against an absolute virtual clock.  A resource of type
``[t] A`` created at time ``c`` is a ``BoxedV`` available at ``c + t``.
Operation continuations receive result values already placed on the clock
(boxes inside a result are stamped relative to the operation's end time).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import AvailabilityMismatch, CarrierNotFinite, CarrierViolation
from .grades import Grade
from .syntax import Signature, TBase, TBox, TFun, TProd, TUnit

# ---------------------------------------------------------------------------
# Semantic values

_rids = itertools.count(1)


@dataclass(frozen=True)
class BaseElem:
    base: str
    elem: str

    def __str__(self) -> str:
        return self.elem


@dataclass(frozen=True)
class UnitVal:
    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True)
class PairVal:
    left: object
    right: object

    def __str__(self) -> str:
        return f"({self.left}, {self.right})"


@dataclass(frozen=True, eq=False)
class FunVal:
    """A closure ``(argument, call time) -> tree``; equal only to itself."""

    fn: Callable

    def __call__(self, arg, now: int):
        return self.fn(arg, now)

    def __str__(self) -> str:
        return "<fun>"


@dataclass(frozen=True)
class BoxedV:
    available_at: int
    payload: object
    rid: int = field(default_factory=lambda: next(_rids), compare=False)

    def __post_init__(self):
        if self.available_at < 0:
            raise ValueError("availability time must be non-negative")

    def __str__(self) -> str:
        return f"box@{self.available_at}({self.payload})"


UNIT_VAL = UnitVal()


def value_json(v):
    match v:
        case BaseElem(_, e):
            return e
        case UnitVal():
            return "()"
        case PairVal(l, r):
            return [value_json(l), value_json(r)]
        case BoxedV(at, p):
            return {"available_at": at, "value": value_json(p)}
        case FunVal():
            return "<fun>"
    return repr(v)


# ---------------------------------------------------------------------------
# Trees


@dataclass(frozen=True)
class Ret:
    value: object


@dataclass(frozen=True, eq=False)
class OpNode:
    op: str
    arg: object
    duration: int
    cont: Callable  # result value (on the clock) -> tree
    result_type: object = None


class DelayNode:
    """``delay tau`` followed by a (possibly lazily built, memoised) tree."""

    __slots__ = ("tau", "_cont", "_thunk")

    def __init__(self, tau: int, cont=None, *, thunk: Callable | None = None) -> None:
        if (cont is None) == (thunk is None):
            raise ValueError("give exactly one of cont and thunk")
        self.tau = tau
        self._cont = cont
        self._thunk = thunk

    @property
    def cont(self):
        if self._thunk is not None:
            self._cont = self._thunk()
            self._thunk = None
        return self._cont

    @property
    def forced(self) -> bool:
        return self._thunk is None

    def __repr__(self) -> str:
        inner = repr(self._cont) if self._thunk is None else "<lazy>"
        return f"DelayNode({self.tau}, {inner})"


def _int(g) -> int:
    return int(g) if isinstance(g, Grade) else g


def eta(v) -> Ret:
    return Ret(v)


def op_node(op: str, arg, duration, cont: Callable, result_type=None,
            sig: Signature | None = None) -> OpNode:
    if sig is not None:
        s = sig.ops.get(op)
        if s is None:
            raise CarrierViolation(f"unknown operation {op}")
        if literal_of(arg) not in sig.carrier(s.param):
            raise CarrierViolation(f"{op} applied to {arg}, outside its parameter carrier")
        result_type = s.result
        duration = s.duration
    return OpNode(op, arg, _int(duration), cont, result_type)


def delay_node(tau, cont) -> DelayNode:
    """Build a delay node without any canonicalisation."""
    if callable(cont) and not isinstance(cont, (Ret, OpNode, DelayNode)):
        return DelayNode(_int(tau), thunk=cont)
    return DelayNode(_int(tau), cont)


def bind(t, f: Callable, start: int = 0):
    """Graft ``f(value, time)`` at every leaf; ``time`` is the leaf's clock reading."""
    match t:
        case Ret(v):
            return f(v, start)
        case OpNode(op, a, d, k, rt):
            end = start + d
            return OpNode(op, a, d, lambda b: bind(k(b), f, end), rt)
        case DelayNode():
            end = start + t.tau
            return DelayNode(t.tau, thunk=lambda: bind(t.cont, f, end))
    raise TypeError(f"not a tree: {t!r}")


def mu(t, start: int = 0):
    """Flatten a tree whose leaves hold trees."""
    return bind(t, lambda inner, _now: inner, start)


def fmap(f: Callable, t):
    return bind(t, lambda v, _now: Ret(f(v)))


def fmap_at(t, f: Callable, start: int = 0):
    """Map with access to the clock: ``f(value, time)`` gives the new leaf value."""
    return bind(t, lambda v, now: Ret(f(v, now)), start)


def strength(box: BoxedV, t, start: int = 0):
    """Pair a future resource with every leaf value; it must be available there."""
    def leaf(v, now):
        if box.available_at > now:
            raise AvailabilityMismatch(
                f"resource available at {box.available_at} but leaf reached at {now}")
        return Ret(PairVal(box.payload, v))

    return bind(t, leaf, start)


def handle_chi(clauses: Mapping[str, Callable], t, start: int = 0, leaf: Callable | None = None):
    """Fold a tree of trees with operation clauses.

    ``clauses[op](arg, kbox, now)`` receives the continuation boxed until the
    operation's end time; calling its payload at time ``s`` resumes handling.
    Delays pass through.  Leaves are the inner trees, or ``leaf(value, now)``.
    """
    match t:
        case Ret(v):
            return leaf(v, start) if leaf is not None else v
        case DelayNode():
            end = start + t.tau
            return DelayNode(t.tau, thunk=lambda: handle_chi(clauses, t.cont, end, leaf))
        case OpNode(op, a, d, k, _):
            end = start + d
            resume = FunVal(lambda b, _now: handle_chi(clauses, k(b), end, leaf))
            return clauses[op](a, BoxedV(end, resume), start)
    raise TypeError(f"not a tree: {t!r}")


def canonicalize_delays(t):
    """Remove zero delays and merge consecutive delays; lazy under operations."""
    match t:
        case Ret():
            return t
        case OpNode(op, a, d, k, rt):
            return OpNode(op, a, d, lambda b: canonicalize_delays(k(b)), rt)
        case DelayNode():
            total = 0
            cur = t
            while isinstance(cur, DelayNode):
                total += cur.tau
                cur = cur.cont
            inner = canonicalize_delays(cur)
            return inner if total == 0 else DelayNode(total, inner)
    raise TypeError(f"not a tree: {t!r}")


def is_canonical_node(t) -> bool:
    """The root obeys the canonical-form invariants (no zero or doubled delay)."""
    if isinstance(t, DelayNode):
        return t.tau > 0 and not isinstance(t.cont, DelayNode)
    return True


# ---------------------------------------------------------------------------
# Carriers and comparison


def literal_of(v):
    """The carrier literal of a semantic value (boxes are transparent)."""
    match v:
        case BaseElem(_, e):
            return e
        case UnitVal():
            return ()
        case PairVal(l, r):
            return (literal_of(l), literal_of(r))
        case BoxedV(_, p):
            return literal_of(p)
    raise CarrierNotFinite(f"{v} has no carrier literal")


def absolutize(ty, lit, now: int):
    """The semantic value of carrier literal ``lit`` of ground type ``ty`` at time ``now``."""
    match ty:
        case TBase(b):
            return BaseElem(b, lit)
        case TUnit():
            return UNIT_VAL
        case TProd(l, r):
            return PairVal(absolutize(l, lit[0], now), absolutize(r, lit[1], now))
        case TBox(g, body):
            at = now + int(g)
            return BoxedV(at, absolutize(body, lit, at))
    raise CarrierNotFinite(f"type {ty} has no finite carrier")


def carrier_of(ty, carriers) -> list:
    if isinstance(carriers, Signature):
        try:
            return carriers.carrier(ty)
        except (KeyError, ValueError) as e:
            raise CarrierNotFinite(str(e)) from None
    match ty:
        case TBase(b):
            if b not in carriers:
                raise CarrierNotFinite(f"no carrier for base type {b}")
            return list(carriers[b])
        case TUnit():
            return [()]
        case TProd(l, r):
            return [(a, b) for a in carrier_of(l, carriers) for b in carrier_of(r, carriers)]
        case TBox(_, body):
            return carrier_of(body, carriers)
        case TFun():
            raise CarrierNotFinite(f"function type {ty} has no finite carrier")
    raise CarrierNotFinite(f"no carrier for {ty}")


def results(node: OpNode, carriers, now: int) -> list:
    """All possible results of an operation node, placed on the clock at ``now``."""
    if node.result_type is None:
        raise CarrierNotFinite(f"operation {node.op} has no declared result type")
    return [absolutize(node.result_type, lit, now) for lit in carrier_of(node.result_type, carriers)]


def tree_eq(t1, t2, carriers, start: int = 0, value_eq: Callable | None = None) -> bool:
    """Structural equality, comparing continuations on every carrier element."""
    veq = value_eq or (lambda a, b: a == b)
    stack = [(t1, t2, start)]
    while stack:
        a, b, now = stack.pop()
        if isinstance(a, Ret) and isinstance(b, Ret):
            if not veq(a.value, b.value):
                return False
        elif isinstance(a, DelayNode) and isinstance(b, DelayNode):
            if a.tau != b.tau:
                return False
            stack.append((a.cont, b.cont, now + a.tau))
        elif isinstance(a, OpNode) and isinstance(b, OpNode):
            if (a.op, a.duration) != (b.op, b.duration) or a.arg != b.arg:
                return False
            if a.result_type != b.result_type:
                return False
            end = now + a.duration
            for r in results(a, carriers, end):
                stack.append((a.cont(r), b.cont(r), end))
        else:
            return False
    return True


def grade(t, carriers=None, start: int = 0) -> int:
    """Total time along one path (all paths agree for well-graded trees)."""
    total = 0
    while True:
        match t:
            case Ret():
                return total
            case DelayNode():
                total += t.tau
                t = t.cont
            case OpNode():
                total += t.duration
                if carriers is None:
                    raise CarrierNotFinite("grade of an operation node needs carriers")
                t = t.cont(results(t, carriers, start + total)[0])
            case _:
                raise TypeError(f"not a tree: {t!r}")


def grades(t, carriers, start: int = 0) -> set[int]:
    """Time along every path."""
    out: set[int] = set()
    stack = [(t, 0)]
    while stack:
        node, acc = stack.pop()
        match node:
            case Ret():
                out.add(acc)
            case DelayNode():
                stack.append((node.cont, acc + node.tau))
            case OpNode():
                end = acc + node.duration
                for r in results(node, carriers, start + end):
                    stack.append((node.cont(r), end))
    return out


def force_all(t, carriers, start: int = 0, visit: Callable | None = None) -> int:
    """Expand every path (e.g. to surface runtime errors); returns the leaf count."""
    leaves = 0
    stack = [(t, start)]
    while stack:
        node, now = stack.pop()
        if visit is not None:
            visit(node, now)
        match node:
            case Ret():
                leaves += 1
            case DelayNode():
                stack.append((node.cont, now + node.tau))
            case OpNode():
                end = now + node.duration
                for r in results(node, carriers, end):
                    stack.append((node.cont(r), end))
    return leaves


def dump_tree(t, carriers, start: int = 0):
    """Carrier-expanded JSON-ready form of a finite tree."""
    match t:
        case Ret(v):
            return {"ret": value_json(v)}
        case DelayNode():
            return {"delay": t.tau, "then": dump_tree(t.cont, carriers, start + t.tau)}
        case OpNode(op, a, d, k, _):
            end = start + d
            branches = [[value_json(r), dump_tree(k(r), carriers, end)]
                        for r in results(t, carriers, end)]
            return {"op": op, "arg": value_json(a), "duration": d, "branches": branches}
    raise TypeError(f"not a tree: {t!r}")


# ---------------------------------------------------------------------------
# Finite first-order trees (for generation and brute-force oracles)


@dataclass(frozen=True)
class FRet:
    value: object


@dataclass(frozen=True)
class FOp:
    op: str
    arg: object
    duration: int
    branches: tuple  # one subtree per result, in carrier order


@dataclass(frozen=True)
class FDelay:
    tau: int
    body: object


FTree = FRet | FOp | FDelay


def to_tree(ft, result_types: Mapping[str, object], carriers, leaf: Callable | None = None):
    """Realise a finite tree; ``leaf`` converts leaf payloads (e.g. nested finite trees)."""
    match ft:
        case FRet(v):
            return Ret(leaf(v) if leaf else v)
        case FDelay(tau, body):
            return DelayNode(tau, thunk=lambda: to_tree(body, result_types, carriers, leaf))
        case FOp(op, a, d, branches):
            rt = result_types[op]
            lits = carrier_of(rt, carriers)

            def cont(b, branches=branches, lits=lits):
                return to_tree(branches[lits.index(literal_of(b))], result_types, carriers, leaf)

            return OpNode(op, a, d, cont, rt)
    raise TypeError(f"not a finite tree: {ft!r}")


def from_tree(t, carriers, start: int = 0):
    """Read a (finite) tree back into first-order form, forcing every branch."""
    match t:
        case Ret(v):
            return FRet(v)
        case DelayNode():
            return FDelay(t.tau, from_tree(t.cont, carriers, start + t.tau))
        case OpNode(op, a, d, k, _):
            end = start + d
            return FOp(op, a, d, tuple(from_tree(k(r), carriers, end)
                                       for r in results(t, carriers, end)))
    raise TypeError(f"not a tree: {t!r}")


def fgrade(ft) -> int:
    match ft:
        case FRet():
            return 0
        case FDelay(tau, body):
            return tau + fgrade(body)
        case FOp(_, _, d, branches):
            return d + fgrade(branches[0])
    raise TypeError(ft)


def fdepth(ft) -> int:
    match ft:
        case FRet():
            return 0
        case FDelay(_, body):
            return 1 + fdepth(body)
        case FOp(_, _, _, branches):
            return 1 + max(fdepth(b) for b in branches)
    raise TypeError(ft)


def fcanon(ft):
    """Reference canonicalisation on finite trees."""
    match ft:
        case FRet():
            return ft
        case FOp(op, a, d, bs):
            return FOp(op, a, d, tuple(fcanon(b) for b in bs))
        case FDelay(tau, body):
            inner = fcanon(body)
            if isinstance(inner, FDelay):
                tau, inner = tau + inner.tau, inner.body
            return inner if tau == 0 else FDelay(tau, inner)
    raise TypeError(ft)


def delay_rewrites(ft):
    """Every tree reachable by one oriented delay-equation step, anywhere in ``ft``."""
    match ft:
        case FRet():
            return
        case FDelay(tau, body):
            if tau == 0:
                yield body
            if isinstance(body, FDelay):
                yield FDelay(tau + body.tau, body.body)
            for b in delay_rewrites(body):
                yield FDelay(tau, b)
        case FOp(op, a, d, bs):
            for i, b in enumerate(bs):
                for b2 in delay_rewrites(b):
                    yield FOp(op, a, d, bs[:i] + (b2,) + bs[i + 1:])


def delay_normal_forms(ft) -> set:
    """All irreducible trees reachable by exhaustive oriented rewriting.

    Rewrites in different operation branches commute, and a delay spine
    (a maximal run of delays) cannot interact with the node below it, so the
    search is run per spine and per branch and the results are combined.
    """
    match ft:
        case FRet():
            return {ft}
        case FOp(op, a, d, bs):
            combos = itertools.product(*(delay_normal_forms(b) for b in bs))
            return {FOp(op, a, d, c) for c in combos}
    taus = []
    while isinstance(ft, FDelay):
        taus.append(ft.tau)
        ft = ft.body
    out = set()
    for spine in _spine_normal_forms(tuple(taus)):
        for below in delay_normal_forms(ft):
            for tau in reversed(spine):
                below = FDelay(tau, below)
            out.add(below)
    return out


def _spine_normal_forms(taus: tuple) -> set:
    """Exhaustive search over a run of delays: drop a zero, or merge two neighbours."""
    seen = {taus}
    frontier = [taus]
    normal = set()
    while frontier:
        cur = frontier.pop()
        nxt = [cur[:i] + cur[i + 1:] for i, t in enumerate(cur) if t == 0]
        nxt += [cur[:i] + (cur[i] + cur[i + 1],) + cur[i + 2:] for i in range(len(cur) - 1)]
        if not nxt:
            normal.add(cur)
        for n in nxt:
            if n not in seen:
                seen.add(n)
                frontier.append(n)
    return normal


def delay_expansions(ft, rng, steps: int = 3):
    """Apply random reverse delay-equation steps (insert zero delays, split delays)."""
    for _ in range(steps):
        ft = _expand_once(ft, rng)
    return ft


def _expand_once(ft, rng):
    if rng.random() < 0.3:
        if isinstance(ft, FDelay) and ft.tau >= 2 and rng.random() < 0.5:
            a = rng.randint(1, ft.tau - 1)
            return FDelay(a, FDelay(ft.tau - a, ft.body))
        return FDelay(0, ft)
    match ft:
        case FRet():
            return FDelay(0, ft)
        case FDelay(tau, body):
            return FDelay(tau, _expand_once(body, rng))
        case FOp(op, a, d, bs):
            i = rng.randrange(len(bs))
            return FOp(op, a, d, bs[:i] + (_expand_once(bs[i], rng),) + bs[i + 1:])
    raise TypeError(ft)
