import math

import numpy as np
import pytest

from quicksearch.analysis import (
    build_region,
    mean_bound_terms,
    mean_error_lower_bound,
    mean_signal_exponent,
    mean_threshold,
    refinement_retention_scale,
    retention_regime,
    threshold_denominator,
    variance_error_closed_form,
    variance_error_closed_form_expected,
    variance_signal_exponent,
    variance_threshold,
)
from quicksearch.errors import DomainError
from quicksearch.model import MeanTest, VarianceTest
from quicksearch.policy import s_of_k


def test_signal_exponents():
    n = 10**4
    gap = math.sqrt(2 * math.log(n))
    assert mean_signal_exponent(MeanTest(gap, 0.0), n) == pytest.approx(1.0)
    assert mean_signal_exponent(MeanTest(1.073, 0.0), n) == pytest.approx(0.0625, abs=2e-4)
    assert variance_signal_exponent(VarianceTest(float(n), 1.0), n) == pytest.approx(1.0)
    assert variance_signal_exponent(VarianceTest(10.0, 1.0), n) == pytest.approx(0.25)


def test_thresholds_examples():
    assert mean_threshold(0.25, 2.0, 2, 0.5) == pytest.approx(0.0625)
    assert mean_threshold(0.25, 1.0, 0, 0.5) == pytest.approx(0.25)
    assert mean_threshold(0.999999, 2.0, 2, 0.5) < 1e-6
    assert variance_threshold(0.5, 2.0, 2, 0.5) == pytest.approx(0.25)
    assert variance_threshold(0.0, 4.0, 0, 0.5) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        mean_threshold(1.5, 2.0, 2, 0.5)


def test_threshold_nonadaptive_branch():
    # alpha beyond 1 - 1/S falls back to floor(S) rounds
    assert threshold_denominator(2.0, 2, 0.9) == 2
    assert mean_threshold(0.25, 2.0, 2, 0.9) == pytest.approx(0.125)


def test_threshold_consistency_with_schedule():
    # (1-sqrt(e))^2 / tau at the built schedule's raw stopping round
    for s, k, alpha in [(2.0, 2, 0.5), (10.0, 3, 0.5), (4.0, 1, 0.7), (20.0, 2, 0.95)]:
        tau = k + s_of_k(s, k, alpha)
        assert mean_threshold(0.25, s, k, alpha) == pytest.approx(
            (1 - math.sqrt(0.25)) ** 2 / tau
        )


def test_retention_scale():
    n = 10**4
    assert refinement_retention_scale("mean", n, 0.5) == pytest.approx(0.1)
    assert refinement_retention_scale("variance", n, 0.5) == pytest.approx(4.6052, abs=1e-4)
    assert refinement_retention_scale("mean", n, 0.0) == 1.0
    assert retention_regime("mean", n, 0.5, 0.2) == "above"
    assert retention_regime("variance", n, 0.5, 4.0) == "below"


def test_detection_dominates_retention_scale():
    # threshold-implied gap exceeds the retention-critical scale across rarity
    n = 10**4
    for eps_exp in np.arange(0.1, 0.91, 0.1):
        gap = math.sqrt(2 * mean_threshold(eps_exp, 2.0, 2, 0.5) * math.log(n))
        assert gap > refinement_retention_scale("mean", n, eps_exp)


def test_mean_bound_terms():
    a, b = mean_bound_terms(100, 100, 4, 0.0)
    assert a == pytest.approx(1.0)
    assert b == pytest.approx(0.0)
    a, b = mean_bound_terms(100, 10**4, 4, 1.073)
    assert a == pytest.approx(math.sqrt(7.6832 / 16.2003), abs=1e-4)
    assert b == pytest.approx(2.47495, abs=2e-4)
    with pytest.raises(DomainError):
        mean_bound_terms(2, 100, 4, 1.0)


def test_mean_error_lower_bound_values():
    assert mean_error_lower_bound(0.0) == pytest.approx(0.46977, abs=1e-4)
    assert mean_error_lower_bound(50.0) == pytest.approx(0.0, abs=1e-12)
    assert mean_error_lower_bound(1e6) == 0.0


def test_mean_error_lower_bound_envelope_and_monotone():
    values = [mean_error_lower_bound(b) for b in np.linspace(0.0, 30.0, 400)]
    assert all(0.0 <= v < 0.63 for v in values)
    assert all(x >= y for x, y in zip(values, values[1:]))
    assert mean_error_lower_bound(40.0) < 1e-10


def test_variance_error_closed_form_examples():
    # odds term x = ratio^(tau/2) * n_rare/n_normal
    assert variance_error_closed_form(3.0, 4, 1, 9, 1) == pytest.approx(0.5)
    assert variance_error_closed_form(3.0, 2, 9, 3, 3) == pytest.approx(1 - 0.9**3)
    assert variance_error_closed_form(100.0, 40, 10, 10, 2) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        variance_error_closed_form(0.9, 4, 1, 1, 1)


def test_variance_error_monotonicities():
    base = variance_error_closed_form(4.0, 4, 50, 5000, 3)
    assert variance_error_closed_form(5.0, 4, 50, 5000, 3) < base
    assert variance_error_closed_form(4.0, 4, 50, 5000, 5) > base
    assert variance_error_closed_form(4.0, 4, 50, 9000, 3) > base
    assert variance_error_closed_form(4.0, 4, 80, 5000, 3) < base


def test_variance_error_expected_entry_point():
    direct = variance_error_closed_form(4.0, 4, 100.0, 9900.0, 3)
    assert variance_error_closed_form_expected(4.0, 4, 10**4, 0.01, 3) == pytest.approx(direct)
    with pytest.raises(DomainError):
        variance_error_closed_form_expected(4.0, 4, 100, 0.0, 1)


def test_build_region_classification():
    grid = build_region(
        "mean", 10**4, 1, 2.0, 2, 0.5, axis1=[0.01, 0.05, 0.2], axis2=[0.25, 0.5, 0.75]
    )
    assert len(grid.rows()) == 9
    thr = [mean_threshold(e, 2.0, 2, 0.5) for e in (0.25, 0.5, 0.75)]
    for i, sig in enumerate(grid.axis1):
        for j in range(3):
            assert grid.detectable[i][j] == (sig > thr[j])
    # boundary cell classifies undetectable (strict inequality)
    boundary = build_region(
        "mean", 10**4, 1, 2.0, 2, 0.5, axis1=[thr[1]], axis2=[0.5]
    )
    assert boundary.detectable[0][0] is False or boundary.detectable[0][0] == False  # noqa: E712


def test_region_widens_with_refinements():
    axis1 = list(np.linspace(0.01, 0.4, 12))
    axis2 = list(np.linspace(0.1, 0.9, 9))
    g0 = build_region("mean", 10**4, 1, 2.0, 0, 0.5, axis1, axis2)
    g2 = build_region("mean", 10**4, 1, 2.0, 2, 0.5, axis1, axis2)
    for i in range(12):
        for j in range(9):
            assert g2.detectable[i][j] or not g0.detectable[i][j]
    assert any(
        g2.detectable[i][j] and not g0.detectable[i][j] for i in range(12) for j in range(9)
    )


def test_region_monte_carlo_overlay():
    grid = build_region(
        "variance", 500, 1, 2.0, 0, 0.5, axis1=[0.1, 1.5], axis2=[0.5], trials=60, master_seed=3
    )
    assert grid.empirical is not None
    weak, strong = grid.empirical[0][0], grid.empirical[1][0]
    assert strong < 0.2 < 0.5 < weak
    assert len(grid.rows()[0]) == 5
