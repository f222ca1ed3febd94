"""Renamings between temporal contexts, kept as derivation trees.

A renaming ``rho : G ~> G'`` turns a judgement typed in ``G`` into one typed
in ``G'``.  Each constructor validates its own side conditions on
construction, so every value of these classes is admissible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .context import ctx_minus, ctx_time, var_lookup, well_formed
from .errors import SideConditionViolated, UnboundVariable
from .grades import ZERO, Grade
from .syntax import Context, Mod, VarBind, ctx_names, ctx_str, fresh, free_vars, refresh, rename_free


def _wf(ctx: Context, what: str) -> None:
    if not well_formed(ctx):
        raise SideConditionViolated(f"{what}: context {ctx_str(ctx)} repeats a variable")


def _fresh_for(name: str, ctx: Context, what: str) -> None:
    if name in ctx_names(ctx):
        raise SideConditionViolated(f"{what}: {name} is not fresh for {ctx_str(ctx)}")


class Renaming:
    source: Context
    target: Context


@dataclass(frozen=True)
class Id(Renaming):
    ctx: Context

    def __post_init__(self):
        _wf(self.ctx, "id")

    @property
    def source(self):
        return self.ctx

    @property
    def target(self):
        return self.ctx


@dataclass(frozen=True)
class Comp(Renaming):
    """``outer ∘ inner``."""

    outer: Renaming
    inner: Renaming

    def __post_init__(self):
        if self.inner.target != self.outer.source:
            raise SideConditionViolated(
                f"composition: {ctx_str(self.inner.target)} is not {ctx_str(self.outer.source)}")

    @property
    def source(self):
        return self.inner.source

    @property
    def target(self):
        return self.outer.target


@dataclass(frozen=True)
class Wk(Renaming):
    ctx: Context
    name: str
    type: object

    def __post_init__(self):
        _wf(self.ctx, "wk")
        _fresh_for(self.name, self.ctx, "wk")

    @property
    def source(self):
        return self.ctx

    @property
    def target(self):
        return self.ctx + (VarBind(self.name, self.type),)


@dataclass(frozen=True)
class VarR(Renaming):
    """``(G, y:X) ~> G`` sending ``y`` to an existing ``x:X`` of ``G``."""

    ctx: Context
    name: str
    onto: str

    def __post_init__(self):
        _wf(self.ctx, "var")
        _fresh_for(self.name, self.ctx, "var")
        try:
            var_lookup(self.ctx, self.onto)
        except UnboundVariable:
            raise SideConditionViolated(f"var: {self.onto} is not in {ctx_str(self.ctx)}") from None

    @property
    def type(self):
        return var_lookup(self.ctx, self.onto)[0]

    @property
    def source(self):
        return self.ctx + (VarBind(self.name, self.type),)

    @property
    def target(self):
        return self.ctx


@dataclass(frozen=True)
class Eta(Renaming):
    """``(G, <0>) ~> G``."""

    ctx: Context

    @property
    def source(self):
        return self.ctx + (Mod(ZERO),)

    @property
    def target(self):
        return self.ctx


@dataclass(frozen=True)
class EtaInv(Renaming):
    """``G ~> (G, <0>)``."""

    ctx: Context

    @property
    def source(self):
        return self.ctx

    @property
    def target(self):
        return self.ctx + (Mod(ZERO),)


@dataclass(frozen=True)
class Mu(Renaming):
    """``(G, <a+b>) ~> (G, <a>, <b>)``."""

    ctx: Context
    a: Grade
    b: Grade

    @property
    def source(self):
        return self.ctx + (Mod(self.a + self.b),)

    @property
    def target(self):
        return self.ctx + (Mod(self.a), Mod(self.b))


@dataclass(frozen=True)
class MuInv(Renaming):
    """``(G, <a>, <b>) ~> (G, <a+b>)``."""

    ctx: Context
    a: Grade
    b: Grade

    @property
    def source(self):
        return self.ctx + (Mod(self.a), Mod(self.b))

    @property
    def target(self):
        return self.ctx + (Mod(self.a + self.b),)


@dataclass(frozen=True)
class Mon(Renaming):
    """``(G, <a>) ~> (G, <b>)`` for ``a <= b``."""

    ctx: Context
    a: Grade
    b: Grade

    def __post_init__(self):
        if not self.a <= self.b:
            raise SideConditionViolated(f"mon: {self.a} <= {self.b} does not hold")

    @property
    def source(self):
        return self.ctx + (Mod(self.a),)

    @property
    def target(self):
        return self.ctx + (Mod(self.b),)


@dataclass(frozen=True)
class CongVar(Renaming):
    """Extend both sides by a variable.

    ``target_name`` lets the variable take a different (fresh) name on the
    target side; names are only labels, so this is still congruence.
    """

    inner: Renaming
    name: str
    type: object
    target_name: str | None = field(default=None)

    def __post_init__(self):
        _fresh_for(self.name, self.inner.source, "cong-var")
        _fresh_for(self.tname, self.inner.target, "cong-var")

    @property
    def tname(self) -> str:
        return self.target_name or self.name

    @property
    def source(self):
        return self.inner.source + (VarBind(self.name, self.type),)

    @property
    def target(self):
        return self.inner.target + (VarBind(self.tname, self.type),)


@dataclass(frozen=True)
class CongMod(Renaming):
    inner: Renaming
    grade: Grade

    @property
    def source(self):
        return self.inner.source + (Mod(self.grade),)

    @property
    def target(self):
        return self.inner.target + (Mod(self.grade),)


# ---------------------------------------------------------------------------
# Action on variables and terms


def resolve(rho: Renaming, x: str) -> str:
    """The target variable that ``rho`` sends the source variable ``x`` to."""
    match rho:
        case Id() | Wk() | Eta() | EtaInv() | Mu() | MuInv() | Mon():
            return x
        case Comp(outer, inner):
            return resolve(outer, resolve(inner, x))
        case VarR(_, name, onto):
            return onto if x == name else x
        case CongVar(inner, name, _, _):
            return rho.tname if x == name else resolve(inner, x)
        case CongMod(inner, _):
            return resolve(inner, x)
    raise TypeError(f"not a renaming: {rho!r}")


def variable_map(rho: Renaming) -> dict[str, str]:
    return {x: resolve(rho, x) for x in ctx_names(rho.source)}


def apply_renaming(rho: Renaming, t):
    """Rename the free variables of ``t`` (typed in ``rho.source``) into ``rho.target``."""
    mapping = {}
    names = set(ctx_names(rho.source))
    targets = set(ctx_names(rho.target))
    for x in free_vars(t):
        if x not in names:
            raise AssertionError(f"free variable {x} is not in the source context")
        y = resolve(rho, x)
        if y not in targets:
            raise AssertionError(f"renaming sends {x} outside its target context")
        if y != x:
            mapping[x] = y
    # refreshing first keeps binders in t apart from names in the target context
    return rename_free(refresh(t), mapping)


def normal_form(rho: Renaming) -> tuple:
    """Source and target with ``<0>`` erased, plus the variable map."""
    def strip(ctx):
        return tuple(e for e in ctx if not (isinstance(e, Mod) and e.grade == ZERO))

    return strip(rho.source), strip(rho.target), tuple(sorted(variable_map(rho).items()))


def is_identity(rho: Renaming) -> bool:
    src, tgt, vmap = normal_form(rho)
    return src == tgt and all(a == b for a, b in vmap)


def size(rho: Renaming) -> int:
    match rho:
        case Comp(o, i):
            return 1 + size(o) + size(i)
        case CongVar(inner=inner) | CongMod(inner=inner):
            return 1 + size(inner)
    return 1


# ---------------------------------------------------------------------------
# Builders for the basic properties of the relation


def compose(*rhos: Renaming) -> Renaming:
    """``compose(r1, r2, r3) = r3 ∘ r2 ∘ r1`` (applied left to right)."""
    out = rhos[0]
    for r in rhos[1:]:
        out = Comp(r, out)
    return out


def add_mod(ctx: Context, g: Grade) -> Renaming:
    """``G ~> (G, <g>)``."""
    g = Grade.of(g)
    if g == ZERO:
        return EtaInv(ctx)
    return Comp(Mon(ctx, ZERO, g), EtaInv(ctx))


def weaken_by(ctx: Context, extra: Context) -> Renaming:
    """``G ~> (G, G'')``."""
    rho: Renaming = Id(ctx)
    cur = ctx
    for e in extra:
        step = Wk(cur, e.name, e.type) if isinstance(e, VarBind) else add_mod(cur, e.grade)
        rho = Comp(step, rho)
        cur = step.target
    return rho


def lift(rho: Renaming, suffix: Context) -> Renaming:
    """``(G, S) ~> (G', S)`` from ``G ~> G'`` by congruence."""
    for e in suffix:
        rho = CongVar(rho, e.name, e.type) if isinstance(e, VarBind) else CongMod(rho, e.grade)
    return rho


def minus_weaken(ctx: Context, sigma: Grade | int) -> Renaming:
    """``(G ⊖ sigma) ~> G``."""
    sigma = Grade.of(sigma)
    if sigma == ZERO or not ctx:
        return Id(ctx)
    *rest, last = ctx
    rest = tuple(rest)
    if isinstance(last, VarBind):
        return Comp(Wk(rest, last.name, last.type), minus_weaken(rest, sigma))
    g = last.grade
    if sigma <= g:
        return Mon(rest, g.monus(sigma), g)
    return Comp(add_mod(rest, g), minus_weaken(rest, sigma.monus(g)))


def minus_mono(ctx: Context, t1: Grade | int, t2: Grade | int) -> Renaming:
    """``(G ⊖ t2) ~> (G ⊖ t1)`` for ``t1 <= t2``."""
    t1, t2 = Grade.of(t1), Grade.of(t2)
    if not t1 <= t2:
        raise SideConditionViolated(f"minus-mono: {t1} <= {t2} does not hold")
    return minus_weaken(ctx_minus(ctx, t1), t2.monus(t1))


def minus_then_mod(ctx: Context, tau: Grade | int) -> Renaming:
    """``((G ⊖ tau), <tau>) ~> G`` whenever ``tau <= time G``."""
    tau = Grade.of(tau)
    if not tau <= ctx_time(ctx):
        raise SideConditionViolated(f"{tau} exceeds the time {ctx_time(ctx)} of the context")
    if tau == ZERO:
        return Eta(ctx)
    *rest, last = ctx
    rest = tuple(rest)
    if isinstance(last, VarBind):
        return Comp(Wk(rest, last.name, last.type), minus_then_mod(rest, tau))
    g = last.grade
    if tau <= g:
        return MuInv(rest, g.monus(tau), tau)
    d = tau.monus(g)
    return Comp(CongMod(minus_then_mod(rest, d), g), Mu(ctx_minus(rest, d), d, g))


def mod_then_minus(ctx: Context, tau: Grade | int) -> Renaming:
    """``G ~> ((G, <tau>) ⊖ tau)``, which is ``(G, <0>)``."""
    return EtaInv(ctx)


def renaming_minus(rho: Renaming, tau: Grade | int) -> Renaming:
    """``rho ⊖ tau : (source ⊖ tau) ~> (target ⊖ tau)``."""
    tau = Grade.of(tau)
    if tau == ZERO:
        return rho
    match rho:
        case Id(ctx):
            return Id(ctx_minus(ctx, tau))
        case Comp(outer, inner):
            return Comp(renaming_minus(outer, tau), renaming_minus(inner, tau))
        case Wk(ctx, _, _) | VarR(ctx, _, _) | Eta(ctx) | EtaInv(ctx):
            return Id(ctx_minus(ctx, tau))
        case Mu(ctx, a, b):
            if tau <= b:
                return Mu(ctx, a, b.monus(tau))
            return Id(ctx_minus(rho.source, tau))
        case MuInv(ctx, a, b):
            if tau <= b:
                return MuInv(ctx, a, b.monus(tau))
            return Id(ctx_minus(rho.source, tau))
        case Mon(ctx, a, b):
            if tau <= a:
                return Mon(ctx, a.monus(tau), b.monus(tau))
            if tau <= b:
                return Comp(add_mod(ctx, b.monus(tau)), minus_weaken(ctx, tau.monus(a)))
            return minus_mono(ctx, tau.monus(b), tau.monus(a))
        case CongVar(inner, _, _, _):
            return renaming_minus(inner, tau)
        case CongMod(inner, g):
            if tau <= g:
                return CongMod(inner, g.monus(tau))
            return renaming_minus(inner, tau.monus(g))
    raise TypeError(f"not a renaming: {rho!r}")


# ---------------------------------------------------------------------------
# Derived structural rules

STRUCTURAL_KINDS = (
    "weaken-ctx", "exchange-vars", "exchange-var-mod", "contract",
    "split-mod", "join-mod", "grow-mod", "drop-zero-mod", "add-zero-mod",
)


def derived_structural(kind: str, ctx: Context, at: int, **params) -> Renaming:
    """A renaming out of ``ctx`` realising one structural rule at position ``at``.

    Positions index context entries.  Parameters by kind:

    * ``weaken-ctx``: ``extra`` (entries inserted before position ``at``)
    * ``contract``: the variable at ``at`` is merged into ``onto``
    * ``split-mod``: ``first`` (the modality at ``at`` splits as first + rest)
    * ``grow-mod``: ``to`` (the new, larger grade)
    """
    ctx = tuple(ctx)
    _wf(ctx, kind)
    if not 0 <= at <= len(ctx):
        raise SideConditionViolated(f"{kind}: position {at} is outside the context")
    prefix = ctx[:at]

    def entry(i: int, cls):
        if i >= len(ctx) or not isinstance(ctx[i], cls):
            want = "variable" if cls is VarBind else "modality"
            raise SideConditionViolated(f"{kind}: expected a {want} at position {i}")
        return ctx[i]

    match kind:
        case "weaken-ctx":
            extra = tuple(params.get("extra", ()))
            clash = set(ctx_names(extra)) & set(ctx_names(ctx))
            if clash:
                raise SideConditionViolated(f"weaken-ctx: {sorted(clash)[0]} already bound")
            return lift(weaken_by(prefix, extra), ctx[at:])
        case "exchange-vars":
            x, y = entry(at, VarBind), entry(at + 1, VarBind)
            tmp = fresh(y.name)
            inner = CongVar(CongVar(Wk(prefix, y.name, y.type), x.name, x.type), y.name, y.type, tmp)
            rho = Comp(VarR(inner.target[:-1], tmp, y.name), inner)
            return lift(rho, ctx[at + 2:])
        case "exchange-var-mod":
            m, x = entry(at, Mod), entry(at + 1, VarBind)
            tmp = fresh(x.name)
            inner = CongVar(CongMod(Wk(prefix, x.name, x.type), m.grade), x.name, x.type, tmp)
            rho = Comp(VarR(inner.target[:-1], tmp, x.name), inner)
            return lift(rho, ctx[at + 2:])
        case "contract":
            y = entry(at, VarBind)
            onto = params["onto"]
            try:
                ty, _ = var_lookup(prefix, onto)
            except UnboundVariable:
                raise SideConditionViolated(f"contract: {onto} is not bound before {y.name}") from None
            if ty != y.type:
                raise SideConditionViolated(f"contract: {onto} : {ty} but {y.name} : {y.type}")
            rest = ctx[at + 1:]
            if y.name in ctx_names(rest):
                raise SideConditionViolated("contract: variable rebound later")
            return lift(VarR(prefix, y.name, onto), rest)
        case "split-mod":
            m = entry(at, Mod)
            first = Grade.of(params["first"])
            if not first <= m.grade:
                raise SideConditionViolated(f"split-mod: {first} exceeds {m.grade}")
            return lift(Mu(prefix, first, m.grade.monus(first)), ctx[at + 1:])
        case "join-mod":
            a, b = entry(at, Mod), entry(at + 1, Mod)
            return lift(MuInv(prefix, a.grade, b.grade), ctx[at + 2:])
        case "grow-mod":
            m = entry(at, Mod)
            return lift(Mon(prefix, m.grade, Grade.of(params["to"])), ctx[at + 1:])
        case "drop-zero-mod":
            m = entry(at, Mod)
            if m.grade != ZERO:
                raise SideConditionViolated(f"drop-zero-mod: modality has grade {m.grade}")
            return lift(Eta(prefix), ctx[at + 1:])
        case "add-zero-mod":
            return lift(EtaInv(prefix), ctx[at:])
    raise SideConditionViolated(f"unknown structural rule {kind}")


__all__ = [
    "Renaming", "Id", "Comp", "Wk", "VarR", "Eta", "EtaInv", "Mu", "MuInv", "Mon", "CongVar",
    "CongMod", "resolve", "variable_map", "apply_renaming", "normal_form", "is_identity", "size",
    "compose", "add_mod", "weaken_by", "lift", "minus_weaken", "minus_mono", "minus_then_mod",
    "mod_then_minus", "renaming_minus", "derived_structural", "STRUCTURAL_KINDS",
]
