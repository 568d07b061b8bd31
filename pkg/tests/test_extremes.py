import math

import numpy as np
import pytest
from scipy.stats import chi2, norm, uniform

from quicksearch.engine import keyed_generator
from quicksearch.errors import DomainError
from quicksearch.extremes import (
    LN_TWO_SQRT_PI,
    LimitLaw,
    central_order_normal,
    chi2_max_limit_cdf,
    chi2_max_norm,
    chi2_min_limit_cdf,
    chi2_min_norm,
    exact_order_cdf,
    gaussian_min_limit_cdf,
    gaussian_min_norm,
    low_order_limit_cdf,
    refinement_central_predictors,
    sample_chi2_max,
    sample_chi2_min,
    sample_gaussian_min,
    von_mises_cdf,
)
from quicksearch.model import MeanTest, VarianceTest


def ks_distance(sample, cdf):
    s = np.sort(np.asarray(sample))
    n = s.size
    f = np.array([cdf(x) for x in s])
    ranks = np.arange(1, n + 1) / n
    return max(np.max(np.abs(ranks - f)), np.max(np.abs(f - (ranks - 1 / n))))


def binomial_sum_order_cdf(p, r, m):
    # independent oracle for the incomplete-beta evaluation
    return sum(math.comb(m, k) * p**k * (1 - p) ** (m - k) for k in range(r, m + 1))


def test_exact_order_cdf_examples():
    assert exact_order_cdf(lambda y: y, 1, 1, 0.37) == pytest.approx(0.37)
    assert exact_order_cdf(lambda y: 0.5, 1, 3, 0.0) == pytest.approx(0.875)
    assert exact_order_cdf(lambda y: 0.3, 5, 5, 0.0) == pytest.approx(0.3**5)
    with pytest.raises(DomainError):
        exact_order_cdf(lambda y: y, 0, 3, 0.5)
    with pytest.raises(DomainError):
        exact_order_cdf(lambda y: y, 4, 3, 0.5)


@pytest.mark.parametrize("r,m", [(1, 1), (2, 7), (3, 25), (5, 60), (4, 200)])
def test_exact_order_cdf_matches_binomial_sum(r, m):
    for p in (0.01, 0.2, 0.5, 0.9):
        assert exact_order_cdf(lambda y: p, r, m, 0.0) == pytest.approx(
            binomial_sum_order_cdf(p, r, m), rel=1e-10
        )


def test_gaussian_min_norm_values():
    nrm = gaussian_min_norm(10**4)
    assert nrm.shift == pytest.approx(16.2003, abs=1e-4)
    assert nrm.scale == pytest.approx(4.0250, abs=1e-4)
    with pytest.raises(DomainError):
        gaussian_min_norm(2)


def test_gaussian_min_limit_values():
    assert gaussian_min_limit_cdf(LN_TWO_SQRT_PI) == pytest.approx(1 - math.exp(-1))
    assert gaussian_min_limit_cdf(-40.0) == pytest.approx(0.0, abs=1e-12)
    assert gaussian_min_limit_cdf(40.0) == pytest.approx(1.0)


def test_chi2_min_norm_and_limit():
    assert chi2_min_norm(2, 10).scale == pytest.approx(5.0)
    assert chi2_min_limit_cdf(2, 0.7) == pytest.approx(1 - math.exp(-0.7))
    assert chi2_min_limit_cdf(2, 0.0) == 0.0
    with pytest.raises(DomainError):
        chi2_min_limit_cdf(2, -0.1)


def test_chi2_max_norm_and_limit():
    # exponential parent (k=2): centering is exactly -ln m, no ln-ln correction
    m = round(math.e**3)
    assert chi2_max_norm(2, m).shift == pytest.approx(-math.log(m))
    assert chi2_max_norm(2, m).scale == 0.5
    assert chi2_max_limit_cdf(2, 0.0) == pytest.approx(math.exp(-1.0))
    assert chi2_max_limit_cdf(2, 40.0) == pytest.approx(1.0)
    # k=4 picks up a (k-2)/2 = 1 ln-ln term
    assert chi2_max_norm(4, 1000).shift == pytest.approx(
        -(math.log(1000) + math.log(math.log(1000)))
    )


def test_chi2_max_centering_makes_tail_mass_stable():
    # m * P(chi2(k) > (w - shift)/scale) should approach exp(-w)/Gamma(k/2);
    # k=2 is exact at every m, higher k converges logarithmically.
    for w in (-0.5, 0.0, 1.0):
        for m in (10**4, 10**7):
            nrm = chi2_max_norm(2, m)
            x = (w - nrm.shift) / nrm.scale
            assert m * chi2.sf(x, 2) == pytest.approx(math.exp(-w), rel=1e-9)
    for k in (4, 6):
        for w in (-0.5, 0.0, 1.0):
            target = math.exp(-w) / math.gamma(k / 2)
            gaps = []
            for m in (10**4, 10**6, 10**8):
                nrm = chi2_max_norm(k, m)
                x = (w - nrm.shift) / nrm.scale
                gaps.append(abs(math.log(m * chi2.sf(x, k)) - math.log(target)))
            assert gaps[2] < gaps[1] < gaps[0]


def test_low_order_limit_examples():
    L1 = lambda w: 1 - math.exp(-1.0)
    assert low_order_limit_cdf(L1, 2, 0.0) == pytest.approx(1 - 2 * math.exp(-1.0))
    L2 = lambda w: 1 - math.exp(-2.0)
    assert low_order_limit_cdf(L2, 3, 0.0) == pytest.approx(1 - 5 * math.exp(-2.0))
    # r=1 reduces to the base law pointwise
    for w in np.linspace(-4, 4, 30):
        assert low_order_limit_cdf(gaussian_min_limit_cdf, 1, w) == pytest.approx(
            gaussian_min_limit_cdf(w), rel=1e-12
        )
    assert low_order_limit_cdf(lambda w: 1.0, 3, 0.0) == 1.0


def test_central_order_normal_examples():
    mean, var = central_order_normal(norm.ppf, norm.pdf, 0.5, 100)
    assert mean == pytest.approx(0.0)
    assert var == pytest.approx(2 * math.pi * 0.25 / 100)
    mean, var = central_order_normal(uniform.ppf, uniform.pdf, 0.25, 400)
    assert mean == pytest.approx(0.25)
    assert var == pytest.approx(4.6875e-4)
    _, v1 = central_order_normal(norm.ppf, norm.pdf, 0.3, 100)
    _, v2 = central_order_normal(norm.ppf, norm.pdf, 0.3, 10**6)
    assert v2 < v1 / 1000


def test_central_order_zero_density():
    with pytest.raises(DomainError):
        central_order_normal(lambda z: 2.0, uniform.pdf, 0.5, 10)


def test_refinement_central_predictors():
    pair = MeanTest(0.6, 0.0)
    mean, var = refinement_central_predictors(pair, 4, 0.5, 50, label="rare")
    assert mean == pytest.approx(0.0)
    assert var == pytest.approx(math.pi * 4 / (2 * 50))
    mean_n, _ = refinement_central_predictors(pair, 4, 0.5, 50, label="normal")
    assert mean_n == pytest.approx(2.4)
    mean_q, _ = refinement_central_predictors(MeanTest(1.0, 0.0), 1, 0.8413, 10**6)
    assert mean_q == pytest.approx(1.0, abs=1e-3)
    _, v_small = refinement_central_predictors(pair, 3, 0.4, 100)
    _, v_big = refinement_central_predictors(pair, 3, 0.4, 200)
    assert v_small == pytest.approx(2 * v_big)
    with pytest.raises(DomainError):
        refinement_central_predictors(VarianceTest(4.0, 1.0), 3, 0.4, 100)


def test_von_mises_limits_and_support():
    # vanishing shape reproduces the double-exponential forms
    law = LimitLaw("min", 0.0, LN_TWO_SQRT_PI, 1.0)
    for w in np.linspace(-6, 6, 25):
        assert von_mises_cdf(law, w) == pytest.approx(gaussian_min_limit_cdf(w), rel=1e-12)
    gumbel = LimitLaw("max", 0.0, 0.0, 1.0)
    assert von_mises_cdf(gumbel, 0.0) == pytest.approx(math.exp(-1.0))
    edge = LimitLaw("min", 1.0, 0.0, 1.0)
    assert von_mises_cdf(edge, -1.0) == 0.0
    assert von_mises_cdf(edge, -5.0) == 0.0
    heavy = LimitLaw("min", -0.5, 0.0, 1.0)
    assert von_mises_cdf(heavy, 2.0) == 1.0
    top = LimitLaw("max", 1.0, 0.0, 1.0)
    assert von_mises_cdf(top, 1.5) == 1.0


def test_von_mises_branch_agreement_at_switch():
    for kind in ("min", "max"):
        near = LimitLaw(kind, 2e-8, 0.3, 1.2)
        zero = LimitLaw(kind, 0.0, 0.3, 1.2)
        for w in np.linspace(-3, 3, 13):
            assert von_mises_cdf(near, w) == pytest.approx(von_mises_cdf(zero, w), abs=1e-7)


def test_inverse_cdf_samplers_match_brute_force():
    rng = keyed_generator(2121, 0)
    m = 500
    brute = keyed_generator(2121, 1).standard_normal((4000, m)).min(axis=1)
    nrm = gaussian_min_norm(m)
    brute_w = nrm.shift + nrm.scale * brute
    smart_w = sample_gaussian_min(m, 4000, rng)
    # same distribution: two-sample KS below the 0.1% critical value
    both = np.sort(np.concatenate([brute_w, smart_w]))
    e1 = np.searchsorted(np.sort(brute_w), both, side="right") / 4000
    e2 = np.searchsorted(np.sort(smart_w), both, side="right") / 4000
    assert np.max(np.abs(e1 - e2)) < 1.95 * math.sqrt(2 / 4000)


def test_sampled_extremes_against_limits():
    rng = keyed_generator(2122, 0)
    w = sample_chi2_min(2, 10**4, 30000, rng)
    assert ks_distance(w, lambda x: chi2_min_limit_cdf(2, max(x, 0.0))) < 0.02
    w = sample_chi2_max(2, 10**4, 30000, rng)
    assert ks_distance(w, lambda x: chi2_max_limit_cdf(2, x)) < 0.02
