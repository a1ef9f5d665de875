import math

import pytest

from mallowsAvoid.core import exact_engine as ee
from mallowsAvoid.core import genfunc_bounds as gb
from mallowsAvoid.core.errors import DomainError

GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
TABLE_LB = [0.991, 0.966, 0.926, 0.871, 0.801, 0.712, 0.599, 0.452, 0.259]
# En q = 0.7 y 0.9 se usan los valores de la forma cerrada (0.676 y 0.8215),
# no los redondeos .677 y .825 que circulan para esos puntos.
TABLE_UB = [0.991, 0.966, 0.926, 0.872, 0.806, 0.733, 0.676, 0.700, 0.8215]
TRUE_VALUES = {0.6: 0.716, 0.7: 0.605, 0.8: 0.461, 0.9: 0.275}


def test_F_extended():
    assert gb.F_extended(0.0).value == 1.0
    assert gb.F_extended(0.5).value == pytest.approx(2.0)
    assert gb.F_extended(1.0).infinite
    assert gb.F_extended(1.5).infinite
    assert gb.F_extended(-0.1).infinite
    assert gb.F_extended(1 - 1e-16).infinite
    assert str(gb.INFINITY) == "+inf"
    assert math.isinf(float(gb.INFINITY))


@pytest.mark.parametrize("q, lb, ub", list(zip(GRID, TABLE_LB, TABLE_UB)))
def test_closed_form_table(q, lb, ub):
    lower, upper = gb.closed_form_bounds(q)
    assert lower == pytest.approx(lb, abs=5e-4)
    assert upper == pytest.approx(ub, abs=5e-4)
    assert lower < upper


def test_closed_forms_close_for_small_q():
    for q in (0.05, 0.1, 0.2, 0.3, 0.4, 0.5):
        lower, upper = gb.closed_form_bounds(q)
        assert upper - lower < 0.01


def test_closed_forms_match_thresholds():
    for q in (0.2, 0.5, 0.8):
        lower, upper = gb.closed_form_bounds(q)
        third = gb.lower_threshold_candidates(q)[2]
        assert lower == pytest.approx((1 - q) / third, rel=1e-12)
        assert upper == pytest.approx((1 - q) / gb.upper_threshold(q), rel=1e-12)


def test_quadratic_roots():
    for q in (0.3, 0.5, 0.7):
        assert gb.lower_quadratic(gb.lower_threshold_candidates(q)[2], q) == pytest.approx(0.0, abs=1e-12)
        assert gb.upper_quadratic(gb.upper_threshold(q), q) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
def test_bisection_reproduces_closed_form_roots(q):
    lower = gb.bisect_transition(lambda c: gb.iterated_lower_condition_no_tail(c, q, 4).infinite)
    upper = gb.bisect_transition(lambda c: gb.iterated_upper_condition(c, q, 3).infinite)
    assert lower == pytest.approx(gb.lower_threshold(q), abs=1e-10)
    assert upper == pytest.approx(gb.upper_threshold(q), abs=1e-10)


def test_iterated_conditions_are_monotone_in_depth():
    q, c = 0.5, 0.6
    upper = [gb.iterated_upper_condition(c, q, n) for n in (4, 8, 16)]
    lower = [gb.iterated_lower_condition(c, q, n) for n in (4, 8, 16)]
    assert all(u.is_finite for u in upper)
    assert all(l.is_finite for l in lower)
    assert all(l.value <= u.value for l, u in zip(lower, upper))


C_GRID = [0.05 + 0.1 * k for k in range(10)]
Q_GRID = [0.05 + 0.1 * k for k in range(10)]


@pytest.mark.parametrize("q", Q_GRID)
def test_infinite_lower_condition_persists_with_depth(q):
    for c in C_GRID:
        values = [gb.iterated_lower_condition(c, q, n) for n in range(1, 25)]
        for shallow, deep in zip(values, values[1:]):
            if shallow.infinite:
                assert deep.infinite, (c, q)
            elif deep.is_finite:
                assert deep.value >= shallow.value * (1 - 1e-12)


@pytest.mark.parametrize("q", Q_GRID)
def test_finite_upper_condition_persists_with_depth(q):
    for c in C_GRID:
        values = [gb.iterated_upper_condition(c, q, n) for n in range(1, 25)]
        for shallow, deep in zip(values, values[1:]):
            if shallow.is_finite:
                assert deep.is_finite, (c, q)
                assert deep.value <= shallow.value * (1 + 1e-12)


@pytest.mark.parametrize("q", Q_GRID)
def test_certificates_never_contradict(q):
    # inferior +∞ en c da L > (1−q)/c; superior finita en c' da L < (1−q)/c'
    above = [c for c in C_GRID if any(gb.iterated_lower_condition(c, q, n).infinite for n in (4, 8, 16))]
    below = [c for c in C_GRID if any(gb.iterated_upper_condition(c, q, n).is_finite for n in (4, 8, 16))]
    if above and below:
        assert max(below) < min(above)
    interval = gb.limit_312(q, eps=0.05)
    for c in below:
        assert (1 - q) / c > interval.lo
    for c in above:
        assert (1 - q) / c < interval.hi


def test_no_tail_infinite_implies_lower_infinite():
    q = 0.5
    for c in (0.62, 0.63, 0.65, 0.7, 0.9):
        if gb.iterated_lower_condition_no_tail(c, q, 4).infinite:
            assert gb.iterated_lower_condition(c, q, 4).infinite


def test_condition_domains():
    with pytest.raises(DomainError):
        gb.iterated_upper_condition(1.0, 0.5, 3)
    with pytest.raises(DomainError):
        gb.iterated_lower_condition(0.5, 0.5, 0)
    with pytest.raises(DomainError):
        gb.iterated_lower_condition_no_tail(0.5, 0.5, 1)
    with pytest.raises(DomainError):
        gb.iterated_lower_condition(0.5, 1.2, 3)


def test_upper_condition_at_depth_one():
    q, c = 0.4, 0.3
    inner = 1 / (1 - c * q / (1 - q))
    expected = 1 / (1 - c * inner)
    assert gb.iterated_upper_condition(c, q, 1).value == pytest.approx(expected)


@pytest.mark.parametrize("q, value", sorted(TRUE_VALUES.items()))
def test_limit_matches_table(q, value):
    interval = gb.limit_312(q, eps=0.01)
    lb, ub = gb.closed_form_bounds(q)
    assert interval.width <= 0.01
    assert not interval.flagged
    assert interval.contains(value)
    assert lb <= interval.lo <= interval.hi <= ub


def test_limit_interval_is_sound_against_recurrence():
    q = 0.5
    interval = gb.limit_312(q, eps=1e-3)
    series = ee.avoidance_recurrence(2000, q, "312")
    # d_n^{1/n} decrece hacia el límite, que queda por debajo de hi
    assert series.root(2000) >= interval.lo
    assert series.root(2000) - interval.hi < 0.01


def test_limit_flags_when_depth_cap_too_small():
    interval = gb.limit_312(0.9, eps=1e-6, depth_cap=2)
    assert interval.flagged
    lb, _ = gb.closed_form_bounds(0.9)
    assert interval.lo >= lb
    assert interval.hi <= gb.hugo_upper_bound(0.9)


def test_limit_rejects_bad_arguments():
    with pytest.raises(DomainError):
        gb.limit_312(0.5, eps=0)
    with pytest.raises(DomainError):
        gb.limit_312(1.0)


def test_depth_schedule():
    assert gb.depth_schedule(64) == [8, 16, 32, 64]
    assert gb.depth_schedule(100) == [8, 16, 32, 64, 100]
    assert gb.depth_schedule(4) == [4]


def test_bound_report_row():
    report = gb.bound_report(0.5)
    row = report.as_row()
    assert round(row["LB"], 3) == 0.801
    assert round(row["UB"], 3) == 0.806
    assert row["hugo"] == pytest.approx(2.0)
    assert row["bisect_lo"] <= row["bisect_hi"]


def test_functional_equation_residual():
    assert gb.functional_equation_residual(0.5, 0.5, 400) < 1e-8
    assert gb.truncation_length(0.5) >= 34
    with pytest.raises(DomainError):
        gb.truncation_length(1.0)


def test_residual_decreases_as_truncation_doubles():
    residuals = [gb.functional_equation_residual(0.6, 0.5, n) for n in (5, 10, 20, 40)]
    assert all(a > b for a, b in zip(residuals, residuals[1:]))


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
def test_G_is_strictly_convex(q):
    radius = 1 / gb.limit_312(q, eps=0.01).hi
    ts = [0.9 * radius * k / 20 for k in range(21)]
    values = [gb.G_truncated(t, q, 600) for t in ts]
    second = [a - 2 * b + c for a, b, c in zip(values, values[1:], values[2:])]
    assert all(d > 0 for d in second)


def test_G_truncated_partial_sums():
    q = 0.5
    direct = sum(g * 0.3 ** n for n, g in enumerate(ee.gamma_seq(50, q)))
    assert gb.G_truncated(0.3, q, 50) == pytest.approx(direct, rel=1e-12)


def test_divergence_witness_beyond_radius():
    q = 0.5
    interval = gb.limit_312(q, eps=1e-3)
    witness = gb.divergence_witness(q, (1 - 1e-9) / interval.lo)
    assert witness.exceeded
    inside = gb.divergence_witness(q, 0.5, max_terms=2000)
    assert not inside.exceeded


def test_reference_limits():
    assert gb.exponent_123(0.5) == pytest.approx(0.8409, abs=1e-4)
    assert gb.limit_132(0.3) == pytest.approx(0.7)
    assert gb.hugo_upper_bound(0.9) == pytest.approx(0.4)


def test_213_root_stays_above_limit_and_approaches_it():
    q = 0.5
    series = ee.avoidance_recurrence(4096, q, "213")
    floor = gb.limit_132(q)
    assert all(series.root(n) >= floor for n in range(1, 4097))
    assert series.root(4096) - floor < series.root(256) - floor
