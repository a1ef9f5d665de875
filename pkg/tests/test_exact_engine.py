import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from mallowsAvoid.core import exact_engine as ee
from mallowsAvoid.core.errors import DomainError, ResourceLimitError
from mallowsAvoid.core.mallows import SamplerState, pmf, sample_lehmer_words
from mallowsAvoid.core.permutations import PatternTag
from mallowsAvoid.core.qpolynomial import QPolynomial

RECURRENCE_TAGS = [PatternTag.P312, PatternTag.P231, PatternTag.P213, PatternTag.P132]


def test_oracle_small_numerators():
    assert ee.brute_force_avoidance(3, "312").numerator == QPolynomial([1, 2, 1, 1])
    assert ee.brute_force_avoidance(3, "213").numerator == QPolynomial([1, 1, 2, 1])
    assert ee.brute_force_avoidance(3, "312").probability(0.5) == pytest.approx(0.904762, abs=1e-6)
    assert ee.brute_force_avoidance(3, "213").probability(0.5) == pytest.approx(0.809524, abs=1e-6)


@pytest.mark.parametrize("tag", list(PatternTag))
def test_catalan_counts(tag):
    for n in range(1, 11):
        assert ee.brute_force_avoidance(n, tag).count == ee.catalan(n)


@pytest.mark.parametrize("tag", list(PatternTag))
def test_tree_and_full_enumeration_agree(tag):
    for n in range(0, 8):
        tree = ee.brute_force_avoidance(n, tag, method="tree")
        full = ee.brute_force_avoidance(n, tag, method="full", workers=3)
        assert tree.numerator == full.numerator


def test_oracle_guards():
    with pytest.raises(ResourceLimitError):
        ee.brute_force_avoidance(13, "123", method="full")
    with pytest.raises(ResourceLimitError):
        ee.brute_force_avoidance(15, "123")
    with pytest.raises(DomainError):
        ee.brute_force_avoidance(4, "123", method="bogus")


def test_w_seq():
    w = ee.w_seq(10, 0.5)
    assert w[0] == 1
    assert w[2] == pytest.approx(0.375)
    assert all(a > b for a, b in zip(w, w[1:]))
    assert np.allclose(np.exp(ee.log_w_table(10, 0.5)), w)


@pytest.mark.parametrize("tag", RECURRENCE_TAGS)
@pytest.mark.parametrize("q", [0.25, 0.5, 0.75])
def test_recurrence_matches_oracle(tag, q):
    series = ee.avoidance_recurrence(8, q, tag)
    for n in range(1, 9):
        reference = ee.brute_force_avoidance(n, tag).probability(q)
        assert series.probability(n) == pytest.approx(reference, rel=1e-12)


@pytest.mark.parametrize("q", [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)])
@pytest.mark.parametrize("tag", RECURRENCE_TAGS)
def test_exact_recurrence_equals_oracle(tag, q):
    values = ee.avoidance_recurrence_exact(8, q, tag)
    for n in range(1, 9):
        assert values[n] == ee.brute_force_avoidance(n, tag).probability(q)
    with pytest.raises(ResourceLimitError):
        ee.avoidance_recurrence_exact(31, q, tag)


def test_recurrence_rejects_other_patterns():
    with pytest.raises(DomainError):
        ee.avoidance_recurrence(5, 0.5, "123")


def test_series_basic_shape():
    series = ee.avoidance_recurrence(60, 0.5, "312")
    assert series.probability(1) == 1.0
    assert series.probability(2) == 1.0
    assert series[0].logval == 0.0
    assert len(series.d) == 60
    assert all(b <= a for a, b in zip(series.log_d[1:], series.log_d[2:]))
    assert all(series.log_d <= 0)


def test_recurrence_duality_for_q_above_one():
    above = ee.avoidance_recurrence(8, 2.0, "312")
    below = ee.avoidance_recurrence(8, 0.5, "213")
    assert above.pattern is PatternTag.P213
    assert np.allclose(above.log_d, below.log_d)
    assert above.probability(6) == pytest.approx(ee.brute_force_avoidance(6, "312").probability(2.0), rel=1e-12)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
def test_pair_equalities_ordering_and_floor(q):
    s312, s231, s213, s132 = (ee.avoidance_recurrence(50, q, t) for t in RECURRENCE_TAGS)
    assert np.allclose(s312.log_d, s231.log_d, rtol=0, atol=1e-14)
    assert np.allclose(s213.log_d, s132.log_d, rtol=0, atol=1e-14)
    for n in range(3, 51):
        assert s312.log_d[n] > s213.log_d[n]
    for n in range(1, 51):
        assert s213.log_d[n] > n * math.log1p(-q)
        assert s312.log_d[n] > n * math.log1p(-q)


def test_submultiplicativity_on_oracle():
    q = Fraction(1, 2)
    for tag in PatternTag:
        d = [ee.brute_force_avoidance(n, tag).probability(q) for n in range(0, 9)]
        for n1 in range(1, 8):
            for n2 in range(1, 9 - n1):
                assert d[n1 + n2] <= d[n1] * d[n2]


def test_projection_law_factorises():
    q = Fraction(1, 3)
    law = ee.projection_law(2, 3, q)
    assert len(law) == 12
    assert sum(law.values()) == 1
    for (first, second), probability in law.items():
        assert probability == pmf(first, q) * pmf(second, q)


def test_gamma_sequence():
    q = 0.5
    gamma = ee.gamma_seq(200, q)
    assert gamma[0] == 1.0
    assert gamma[1] == pytest.approx(1 - q)
    assert gamma[2] == pytest.approx((1 - q) * (1 - q ** 2))
    series = ee.avoidance_recurrence(200, q, "312")
    expected = np.exp(ee.log_w_table(200, q) + series.log_d)
    assert np.allclose(gamma, expected, rtol=1e-12, atol=0)


def test_scaled_gamma():
    q, t = 0.5, 1.2
    plain = ee.gamma_seq(30, q)
    scaled = ee.gamma_seq(30, q, scale=t)
    assert np.allclose(scaled, plain * t ** np.arange(31), rtol=1e-12)
    with pytest.raises(DomainError):
        ee.gamma_seq(5, q, scale=-1.0)


def test_monotone_probability_examples():
    assert ee.monotone_X_probability([5], 0.3) == pytest.approx(1.0)
    assert ee.monotone_X_probability([1, 2], Fraction(1, 2)) == Fraction(1, 3)
    with pytest.raises(DomainError):
        ee.monotone_X_probability([3, 2], 0.5)
    with pytest.raises(ResourceLimitError):
        ee.monotone_X_probability([1, 10 ** 4 + 1], 0.5)


def test_monotone_probability_against_sampler():
    indices = (2, 3, 4)
    words = sample_lehmer_words(4, 0.5, 10 ** 5, SamplerState(seed=4))
    columns = words[:, [i - 1 for i in indices]]
    hits = np.all(np.diff(columns, axis=1) > 0, axis=1)
    exact = ee.monotone_X_probability(indices, 0.5)
    sigma = math.sqrt(exact * (1 - exact) / len(hits))
    assert abs(hits.mean() - exact) <= 4 * sigma


def test_monotone_bounds_examples():
    lower, upper = ee.monotone_X_bounds(1, 0.4)
    assert (lower, upper) == (pytest.approx(0.6), pytest.approx(1 / 0.6))
    lower, upper = ee.monotone_X_bounds(2, 0.5)
    assert lower == pytest.approx(0.125)
    assert upper == pytest.approx(8 / 9)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
def test_monotone_bounds_bracket_dp(q):
    for m in range(1, 5):
        lower, upper = ee.monotone_X_bounds(m, q)
        for indices in itertools.combinations(range(1, 9), m):
            value = ee.monotone_X_probability(indices, q)
            assert lower <= value <= upper


def test_lower_bound_123_against_oracle():
    assert ee.lower_bound_123(2, 0.4) >= 0.6 - 1e-12
    for n in range(1, 9):
        exact = ee.brute_force_avoidance(n, "123").probability(0.5)
        assert exact >= ee.lower_bound_123(n, 0.5)


def test_exponent_123_trend():
    target = 0.5 ** 0.25
    gap16 = abs(ee.exponent_123_estimate(16, 0.5) - target)
    gap64 = abs(ee.exponent_123_estimate(64, 0.5) - target)
    assert gap64 < 0.05
    assert gap64 < gap16


def test_sum_bounds_123_chain():
    for n in range(1, 11):
        lower, upper = ee.sum_bounds_123(n, 0.5)
        exact = ee.brute_force_avoidance(n, "123").probability(0.5)
        assert ee.lower_bound_123(n, 0.5) <= lower * (1 + 1e-12)
        assert lower <= exact * (1 + 1e-12)
        assert exact <= upper * (1 + 1e-12)


def test_fixed_point_count_law_is_distribution():
    law = ee.fixed_point_count_law(12, 0.5)
    assert law.sum() == pytest.approx(1.0)
    # X_1 = 0 siempre, así que |A_n| ≥ 1
    assert law[0] == 0.0


def test_uniform_asymptotic():
    assert ee.uniform_asymptotic(1) == pytest.approx(4 * math.e / (math.sqrt(2) * math.pi))
    errors = [abs(ee.uniform_asymptotic(n) / float(ee.uniform_avoidance_probability(n)) - 1) for n in (20, 50, 100)]
    assert errors[1] < 0.05
    assert errors[0] > errors[1] > errors[2]
    for n in range(1, 21):
        direct = (4 * math.e) ** n / (math.sqrt(2) * math.pi * n ** (n + 2))
        assert ee.uniform_asymptotic(n) == pytest.approx(direct, rel=1e-12)


def test_exact_probability_uniform_case():
    assert ee.exact_probability(4, Fraction(1), "231") == Fraction(14, 24)
