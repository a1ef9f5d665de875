import itertools
import logging
import math
from fractions import Fraction

import numpy as np
import pytest

from mallowsAvoid.core.errors import DomainError
from mallowsAvoid.core.mallows import (
    MallowsParam, SamplerState, expected_inversions, identity_probability,
    inversion_statistics, lehmer_word_probability, log_normalizer, normalizer,
    normalizer_polynomial, pmf, sample_lehmer_words, sample_permutation,
    sample_permutations, sample_truncated_geometric, truncated_geometric_pmf,
)
from mallowsAvoid.core.permutations import (
    Permutation, enumerate_permutations, inversions, lehmer_decode, reverse,
)

QUARTERS = [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]
Q_GRID = [Fraction(k, 10) for k in range(1, 10)]


def test_normalizer_values():
    assert normalizer(3, Fraction(1, 2)) == Fraction(21, 8)
    assert normalizer(5, 1) == 120
    assert normalizer(0, 0.3) == 1
    assert normalizer_polynomial(4).evaluate(1) == 24
    assert log_normalizer(40, 0.5) == pytest.approx(math.log(normalizer(40, 0.5)))


@pytest.mark.parametrize("q", QUARTERS)
@pytest.mark.parametrize("n", range(1, 8))
def test_pmf_normalizes_exactly(n, q):
    assert sum(pmf(p, q) for p in enumerate_permutations(n)) == 1


@pytest.mark.parametrize("q", QUARTERS)
def test_sampler_law_matches_pmf_on_every_word_of_length_5(q):
    words = list(itertools.product(*(range(j) for j in range(1, 6))))
    assert len(words) == math.factorial(5)
    decoded = set()
    for x in words:
        p = lehmer_decode(x)
        decoded.add(p)
        assert lehmer_word_probability(x, q) == pmf(p, q)
    assert len(decoded) == 120


@pytest.mark.parametrize("n", range(1, 9))
def test_identity_probability_matches_pmf_on_grid(n):
    for q in Q_GRID:
        assert identity_probability(n, q) == pmf(Permutation.identity(n), q)


@pytest.mark.parametrize("q", Q_GRID)
def test_identity_probability_exceeds_geometric_floor(q):
    for n in range(1, 51):
        assert identity_probability(n, q) > (1 - q) ** n


@pytest.mark.parametrize("q", QUARTERS)
def test_truncated_geometric_pmf_sums_to_one(q):
    for j in range(1, 51):
        assert sum(truncated_geometric_pmf(j, m, q) for m in range(j)) == 1


def test_pmf_duality_and_uniform():
    q = Fraction(3, 1)
    for p in enumerate_permutations(4):
        assert pmf(p, q) == pmf(reverse(p), Fraction(1, 3))
        assert pmf(p, Fraction(1)) == Fraction(1, 24)


def test_invalid_q():
    with pytest.raises(DomainError):
        MallowsParam(0)
    with pytest.raises(DomainError):
        MallowsParam(float("nan"))
    with pytest.raises(DomainError):
        identity_probability(3, 1.5)


def test_truncated_geometric_pmf():
    q = Fraction(1, 2)
    assert sum(truncated_geometric_pmf(5, m, q) for m in range(5)) == 1
    assert truncated_geometric_pmf(1, 0, q) == 1
    with pytest.raises(DomainError):
        truncated_geometric_pmf(3, 3, q)


def test_identity_probability_matches_pmf():
    q = Fraction(2, 5)
    assert identity_probability(6, q) == pmf(Permutation.identity(6), q)


def test_lehmer_word_probability_is_pmf_of_decoded():
    q = Fraction(1, 2)
    x = (0, 1, 2, 0)
    assert lehmer_word_probability(x, q) == pmf(lehmer_decode(x), q)


def test_sampler_reproducible_and_valid():
    a = sample_permutations(9, 0.4, 50, SamplerState(seed=11))
    b = sample_permutations(9, 0.4, 50, SamplerState(seed=11))
    assert a == b
    assert all(sorted(p.word) == list(range(1, 10)) for p in a)
    assert sample_permutation(1, 0.7, SamplerState(seed=0)) == Permutation.identity(1)


def test_sampler_special_cases():
    uniform = sample_permutations(6, 1.0, 20, SamplerState(seed=3))
    assert all(p.n == 6 for p in uniform)
    dual = sample_permutations(6, 50.0, 200, SamplerState(seed=3))
    # con q muy grande casi todas las muestras son la permutación decreciente
    assert sum(1 for p in dual if p == reverse(Permutation.identity(6))) > 150


def test_lehmer_words_in_range():
    words = sample_lehmer_words(12, 0.6, 2000, SamplerState(seed=5))
    assert words.shape == (2000, 12)
    assert (words[:, 0] == 0).all()
    assert ((words >= 0) & (words <= np.arange(12))).all()


def test_truncated_geometric_sampler_frequencies():
    state = SamplerState(seed=1)
    draws = [sample_truncated_geometric(4, 0.5, state) for _ in range(20000)]
    freq = np.bincount(draws, minlength=4) / len(draws)
    exact = [truncated_geometric_pmf(4, m, 0.5) for m in range(4)]
    assert np.allclose(freq, exact, atol=0.02)


def test_spawn_is_deterministic_and_distinct():
    first = SamplerState(seed=7).spawn(3)
    second = SamplerState(seed=7).spawn(3)
    draws = [s.rng.random() for s in first]
    assert draws == [s.rng.random() for s in second]
    assert len(set(draws)) == 3
    with pytest.raises(DomainError):
        SamplerState(seed=-1)


def test_spawned_grandchild_differs_from_sibling():
    root = SamplerState(seed=5)
    child, _ = root.spawn(2)
    grandchild = child.spawn(1)[0]
    sibling = root.spawn(2)[0]
    assert not np.allclose(grandchild.rng.random(4), sibling.rng.random(4))
    again = child.spawn(1)[0]
    assert np.array_equal(again.rng.random(4), child.spawn(1)[0].rng.random(4))


def test_domain_errors_are_logged_before_raising(caplog):
    with caplog.at_level(logging.ERROR, logger="mallowsAvoid"):
        with pytest.raises(DomainError):
            truncated_geometric_pmf(3, 3, Fraction(1, 2))
        with pytest.raises(DomainError):
            identity_probability(0, 0.5)
    messages = [r.getMessage() for r in caplog.records if r.levelno == logging.ERROR]
    assert any("fuera del soporte" in m for m in messages)
    assert any("n debe ser ≥ 1" in m for m in messages)


def test_expected_inversions():
    q = 0.5
    exact = sum(float(pmf(p, q)) * inversions(p) for p in enumerate_permutations(5))
    assert expected_inversions(5, q) == pytest.approx(exact)
    assert expected_inversions(5, 1) == pytest.approx(5)
    assert expected_inversions(5, 2.0) == pytest.approx(10 - exact)


def test_inversion_statistics():
    samples = sample_permutations(8, 0.5, 20000, SamplerState(seed=2))
    mean, variance = inversion_statistics(samples)
    assert mean == pytest.approx(expected_inversions(8, 0.5), abs=0.1)
    assert variance > 0
    with pytest.raises(DomainError):
        inversion_statistics([])
