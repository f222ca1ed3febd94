import random

import pytest
from hypothesis import given, settings, strategies as st

from ltau.context import ctx_minus, ctx_time, var_lookup
from ltau.errors import SideConditionViolated
from ltau.generate import TermGen, random_renaming
from ltau.grades import Grade
from ltau.parser import parse_program
from ltau.renaming import (
    EtaInv, Id, Mon, Mu, Wk, apply_renaming, derived_structural, is_identity, minus_then_mod,
    renaming_minus, variable_map,
)
from ltau.syntax import UNIT, Mod, TBox, VarBind, alpha_eq
from ltau.typecheck import infer_comp


def g(n):
    return Grade.of(n)


X = VarBind("x", UNIT)


def test_identity_leaves_term():
    m = parse_program("return x")
    assert alpha_eq(apply_renaming(Id((X,)), m), m)


def test_weakening_keeps_type():
    m = parse_program("return x")
    rho = Wk((X,), "y", UNIT)
    out = apply_renaming(rho, m)
    assert alpha_eq(out, m)
    assert infer_comp(rho.target, out, None) == infer_comp((X,), m, None)


def test_monotone_modality_keeps_unbox_typed():
    ctx = (VarBind("b", TBox(g(2), UNIT)),)
    m = parse_program("unbox@2 b as y in return y")
    rho = Mon(ctx, g(2), g(5))
    assert infer_comp(rho.target, apply_renaming(rho, m), None) == infer_comp(rho.source, m, None)


def test_minus_of_identity():
    ctx = (X, Mod(g(3)))
    assert renaming_minus(Id(ctx), 2) == Id(ctx_minus(ctx, 2))


def test_minus_of_split_is_identity_shaped():
    rho = renaming_minus(Mu((X,), g(3), g(2)), 2)
    assert rho.source == (X, Mod(g(3)))
    assert is_identity(rho)


def test_minus_of_dropped_weakening():
    rng = random.Random(1)
    gen = TermGen(rng)
    for _ in range(200):
        ctx = gen.context(rng.randint(0, 5))
        tau = rng.randint(1, 4)
        rho = renaming_minus(Wk(ctx, gen.name("w"), UNIT), tau)
        assert is_identity(rho)


def test_split_mod_is_mu():
    rho = derived_structural("split-mod", (Mod(g(3)),), 0, first=1)
    assert isinstance(rho, Mu) and (rho.a, rho.b) == (g(1), g(2))


def test_add_zero_mod_is_eta_inverse():
    rho = derived_structural("add-zero-mod", (X,), 1)
    assert isinstance(rho, EtaInv) and rho.target == (X, Mod(g(0)))


def test_grow_mod_cannot_shrink():
    with pytest.raises(SideConditionViolated):
        derived_structural("grow-mod", (Mod(g(3)),), 0, to=2)


def test_minus_then_mod_renames_into_context():
    rng = random.Random(2)
    gen = TermGen(rng)
    for _ in range(200):
        ctx = gen.context()
        tau = rng.randint(0, int(ctx_time(ctx)))
        rho = minus_then_mod(ctx, tau)
        assert rho.source == ctx_minus(ctx, tau) + (Mod(g(tau)),)
        assert rho.target == ctx


def _pair(seed, gsig):
    rng = random.Random(seed)
    gen = TermGen(rng, gsig)
    ctx = gen.context()
    m = gen.comp(ctx, gen.ground(0), rng.randint(0, 3), 3)
    return ctx, m, random_renaming(rng, ctx, rng.randint(1, 4), gen)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_renaming_preserves_typing(seed, gsig):
    ctx, m, rho = _pair(seed, gsig)
    assert infer_comp(rho.target, apply_renaming(rho, m), gsig) == infer_comp(ctx, m, gsig)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_renaming_is_monotone(seed, gsig):
    _, _, rho = _pair(seed, gsig)
    assert ctx_time(rho.source) <= ctx_time(rho.target)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_lookup_tracking(seed, gsig):
    _, _, rho = _pair(seed, gsig)
    for x, y in variable_map(rho).items():
        ty, before = var_lookup(rho.source, x)
        ty2, after = var_lookup(rho.target, y)
        assert ty == ty2 and before <= after
