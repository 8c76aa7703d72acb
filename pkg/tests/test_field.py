import pytest
from hypothesis import given, strategies as st

from secantfoci.field import DualNumber, FieldElement, inv, is_prime

P = 32003
res = st.integers(0, P - 1)
units = st.integers(1, P - 1)


def test_is_prime_small_cases():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert is_prime(P)


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        inv(0, P)


@given(units)
def test_inverse_property(a):
    assert a * inv(a, P) % P == 1
    assert FieldElement(a) / FieldElement(a) == 1


@given(res, res, res)
def test_field_axioms(a, b, c):
    x, y, z = FieldElement(a), FieldElement(b), FieldElement(c)
    assert (x + y) * z == x * z + y * z
    assert x - x == 0
    assert (x ** 3) == x * x * x


def test_dual_eps_squared_is_zero():
    e = DualNumber(0, 1)
    assert e * e == DualNumber(0, 0)


@given(units, res, st.integers(0, 12))
def test_dual_power_rule(a, b, k):
    x = DualNumber(a, b)
    acc = DualNumber(1, 0)
    for _ in range(k):
        acc = acc * x
    assert x ** k == acc


@given(units, res)
def test_dual_inverse(a, b):
    x = DualNumber(a, b)
    assert x * x.inverse() == DualNumber(1, 0)
