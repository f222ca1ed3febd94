import pytest
from hypothesis import given, strategies as st

from ltau.grades import RHO, ZERO, Grade, GradeError

grades = st.builds(Grade, st.integers(0, 50), st.integers(0, 3))


@given(grades, grades, grades)
def test_addition_is_associative(a, b, c):
    assert (a + b) + c == a + (b + c)


@given(grades, grades)
def test_addition_is_commutative(a, b):
    assert a + b == b + a


@given(grades)
def test_zero_is_identity(a):
    assert a + ZERO == a == ZERO + a


@given(grades, grades)
def test_equality_is_componentwise(a, b):
    assert (a == b) == ((a.const, a.coeff) == (b.const, b.coeff))


@given(st.integers(0, 40), st.integers(0, 40))
def test_concrete_monus_truncates(a, b):
    assert Grade.of(a).monus(b) == Grade.of(max(a - b, 0))


@given(grades, grades)
def test_monus_undoes_addition(a, b):
    assert (a + b).monus(b) == a


def test_negative_grade_rejected():
    with pytest.raises(GradeError):
        Grade(-1)


def test_symbolic_monus_limits():
    assert (RHO + 3).monus(2) == RHO + 1
    with pytest.raises(GradeError):
        Grade.of(3).monus(RHO)
    with pytest.raises(GradeError):
        (RHO + 1).monus(2)


def test_order_is_componentwise():
    assert Grade.of(2) <= RHO + 2
    assert not RHO <= Grade.of(5)
    assert not Grade.of(5) <= RHO


def test_instantiate_and_concrete():
    assert (RHO + 2).instantiate(3) == Grade.of(5)
    assert int(Grade.of(4)) == 4
    with pytest.raises(GradeError):
        int(RHO)
