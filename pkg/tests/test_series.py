from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cantor_frame.series import LaurentTail

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=20)


def tails(order):
    return st.lists(fractions, min_size=order, max_size=order).map(
        lambda c: LaurentTail(tuple(c), "rational"))


def test_inverse_of_zero_is_unit():
    out = LaurentTail.zero(4).inv_one_minus()
    assert out.unit == 1 and out.coeffs == (0.0,) * 4


def test_monomial_product():
    z1 = LaurentTail.monomial(1, 3)
    assert (z1 * z1).coeffs == (0.0, 1.0, 0.0)


def test_mode_mismatch():
    with pytest.raises(ValueError):
        LaurentTail.zero(3, "float") + LaurentTail.zero(3, "rational")
    with pytest.raises(ValueError):
        LaurentTail.zero(3) * LaurentTail.zero(4)
    with pytest.raises(TypeError):
        LaurentTail((0.5,), "rational")


def test_inverse_needs_zero_constant():
    with pytest.raises(ValueError):
        LaurentTail((1,), "float", 1).inv_one_minus()


def test_geometric_series_exact():
    a = LaurentTail.monomial(1, 5, "rational", Fraction(1, 3))
    inv = a.inv_one_minus()
    assert [inv.coefficient(k) for k in range(6)] == [Fraction(1, 3 ** k) for k in range(6)]


@given(tails(4), tails(4))
def test_product_is_graded(a, b):
    """Coefficient k of a*b only sees coefficients <= k of the inputs."""
    full = a * b
    for k in range(1, 5):
        cut_a = LaurentTail(a.coeffs[:k - 1] + (0,) * (5 - k), "rational")
        cut_b = LaurentTail(b.coeffs[:k - 1] + (0,) * (5 - k), "rational")
        assert (cut_a * cut_b).coefficient(k) == full.coefficient(k)
    # both inputs have zero unit, so the first tail coefficient vanishes
    assert full.coefficient(1) == 0


@given(tails(5))
def test_inverse_times_one_minus_is_one(a):
    one = LaurentTail.monomial(0, 5, "rational")
    prod = (one - a) * a.inv_one_minus()
    assert prod.unit == 1 and all(c == 0 for c in prod.coeffs)


@given(tails(4), tails(4), tails(4))
def test_ring_laws(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
