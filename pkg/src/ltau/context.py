"""Temporal context operations: captured time, time travel, timed lookup."""

from __future__ import annotations

from .errors import SymbolicUnderflow, UnboundVariable
from .grades import ZERO, Grade
from .syntax import Context, Mod, ValueType, VarBind


def ctx_time(ctx: Context) -> Grade:
    total = ZERO
    for e in ctx:
        if isinstance(e, Mod):
            total = total + e.grade
    return total


def ctx_minus(ctx: Context, tau: Grade | int) -> Context:
    """``ctx ⊖ tau``: drop ``tau`` worth of modalities and everything right of them.

    Symbolic modalities are only crossed when the comparison with ``tau`` is
    decided the same way for every value of rho.
    """
    tau = Grade.of(tau)
    entries = list(ctx)
    while tau != ZERO:
        if not entries:
            return ()
        last = entries.pop()
        if isinstance(last, VarBind):
            continue
        g = last.grade
        if tau <= g:
            entries.append(Mod(g.monus(tau)))
            return tuple(entries)
        if g <= tau:
            tau = tau.monus(g)
            continue
        raise SymbolicUnderflow(f"cannot decide {tau} <= {g} for every rho",
                                rule="Unbox", expected=tau, actual=g)
    return tuple(entries)


def var_lookup(ctx: Context, name: str) -> tuple[ValueType, Grade]:
    """Type of ``name`` and the total modality grade bound right of it."""
    elapsed = ZERO
    for e in reversed(ctx):
        match e:
            case Mod(g):
                elapsed = elapsed + g
            case VarBind(n, ty) if n == name:
                return ty, elapsed
    raise UnboundVariable(f"unbound variable {name}")


def well_formed(ctx: Context) -> bool:
    seen: set[str] = set()
    for e in ctx:
        if isinstance(e, VarBind):
            if e.name in seen:
                return False
            seen.add(e.name)
        elif not isinstance(e, Mod):
            return False
    return True


def ctx_is_concrete(ctx: Context) -> bool:
    from .syntax import type_is_concrete

    for e in ctx:
        if isinstance(e, Mod) and not e.grade.is_concrete:
            return False
        if isinstance(e, VarBind) and not type_is_concrete(e.type):
            return False
    return True
