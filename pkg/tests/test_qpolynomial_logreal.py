import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mallowsAvoid.core.errors import DomainError
from mallowsAvoid.core.logreal import LogReal, log_sum
from mallowsAvoid.core.qpolynomial import QPolynomial, merge_counts


def test_q_integer_and_product():
    z3 = QPolynomial.q_integer(1) * QPolynomial.q_integer(2) * QPolynomial.q_integer(3)
    assert z3.coefficients == (1, 2, 2, 1)
    assert z3.evaluate(1) == 6
    assert z3.evaluate(Fraction(1, 2)) == Fraction(21, 8)


def test_trailing_zeros_and_equality():
    assert QPolynomial([1, 2, 0, 0]) == QPolynomial([1, 2])
    assert QPolynomial([3]) == 3
    assert QPolynomial().degree == -1
    assert str(QPolynomial([1, 2, 1, 1])) == "1 + 2q + q^2 + q^3"


def test_json_keeps_big_integers():
    big = QPolynomial([10 ** 40, 0, 7])
    assert QPolynomial.from_json(big.to_json()) == big
    with pytest.raises(DomainError):
        QPolynomial.from_json('{"a": 1}')


def test_merge_counts_unequal_lengths():
    assert merge_counts([[1, 2], [0, 1, 5], []]) == [1, 3, 5]


@given(st.lists(st.integers(0, 50), max_size=6), st.lists(st.integers(0, 50), max_size=6))
def test_product_evaluates_to_product(a, b):
    q = Fraction(2, 7)
    assert (QPolynomial(a) * QPolynomial(b)).evaluate(q) == QPolynomial(a).evaluate(q) * QPolynomial(b).evaluate(q)


def test_logreal_zero_and_one():
    assert LogReal.zero().is_zero
    assert float(LogReal.one()) == 1.0
    assert (LogReal.zero() + LogReal.from_float(0.25)).to_float() == pytest.approx(0.25)
    assert (LogReal.zero() * LogReal.one()).is_zero
    with pytest.raises(DomainError):
        LogReal.from_float(-1.0)


@given(st.floats(min_value=1e-300, max_value=1.0))
def test_logreal_round_trip(x):
    assert LogReal.from_float(x).to_float() == pytest.approx(x, rel=1e-12)


def test_logreal_arithmetic_without_underflow():
    tiny = LogReal(-1000.0)
    assert (tiny * tiny).logval == -2000.0
    assert (tiny + tiny).logval == pytest.approx(-1000.0 + math.log(2))
    assert (tiny / tiny).logval == 0.0
    assert (tiny ** 0.5).logval == -500.0


def test_log_sum():
    values = [LogReal.from_float(v) for v in (0.1, 0.2, 0.3)]
    assert log_sum(values).to_float() == pytest.approx(0.6)
    assert log_sum([]).is_zero
