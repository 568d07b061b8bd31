"""Hypothesis-test families and their per-stream statistics.

Two Gaussian families are supported: a mean shift at unit variance and a
variance ratio at zero mean.  In both families the normal population has the
larger parameter, so a stream that looks "small" (small cumulative sum, or
small cumulative sum of squares) is evidence for the rare class.  All
likelihood arithmetic is done in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import DomainError

__all__ = [
    "MeanTest",
    "VarianceTest",
    "HypothesisPair",
    "SufficientStat",
    "sample_increment",
    "accumulate",
    "llr_increment",
    "log_likelihood_ratio",
    "posterior_rare",
    "ordering_statistic",
]


@dataclass(frozen=True)
class MeanTest:
    """Normal streams draw N(mu0, 1), rare streams N(mu1, 1), with mu0 > mu1."""

    mu0: float
    mu1: float

    def __post_init__(self) -> None:
        if not self.mu0 > self.mu1:
            raise DomainError(f"mean test requires mu0 > mu1, got {self.mu0} <= {self.mu1}")


@dataclass(frozen=True)
class VarianceTest:
    """Normal streams draw N(0, a0), rare streams N(0, a1), with a0 > a1 > 0."""

    a0: float
    a1: float

    def __post_init__(self) -> None:
        if not (self.a0 > self.a1 > 0.0):
            raise DomainError(f"variance test requires a0 > a1 > 0, got a0={self.a0}, a1={self.a1}")


HypothesisPair = Union[MeanTest, VarianceTest]


@dataclass(frozen=True)
class SufficientStat:
    """Cumulative per-stream statistic: sum of samples (mean test) or sum of squares (variance test)."""

    value: float
    count: int

    def __post_init__(self) -> None:
        if self.count < 0:
            raise DomainError(f"sample count must be nonnegative, got {self.count}")


def sample_increment(pair: HypothesisPair, is_rare: bool, rng_draw: float) -> float:
    """Map a standard-normal draw to one raw sample from the stream's class.

    The caller owns the RNG; this function is a pure transform.
    """
    if isinstance(pair, MeanTest):
        return (pair.mu1 if is_rare else pair.mu0) + rng_draw
    return math.sqrt(pair.a1 if is_rare else pair.a0) * rng_draw


def accumulate(pair: HypothesisPair, stat: SufficientStat, sample: float) -> SufficientStat:
    """Fold one raw sample into the cumulative statistic.

    The mean test accumulates the sample itself; the variance test accumulates
    its square, so the statistic stays nonnegative.
    """
    if isinstance(pair, MeanTest):
        return SufficientStat(stat.value + sample, stat.count + 1)
    return SufficientStat(stat.value + sample * sample, stat.count + 1)


def llr_increment(pair: HypothesisPair, sample: float) -> float:
    """Per-sample log density ratio ln(f0(x)/f1(x))."""
    if isinstance(pair, MeanTest):
        return (pair.mu0 - pair.mu1) * sample + 0.5 * (pair.mu1**2 - pair.mu0**2)
    return 0.5 * (1.0 / pair.a1 - 1.0 / pair.a0) * sample * sample + 0.5 * math.log(pair.a1 / pair.a0)


def log_likelihood_ratio(pair: HypothesisPair, stat: SufficientStat) -> float:
    """Cumulative log likelihood ratio ln prod_u f0(X_u)/f1(X_u) from the sufficient statistic.

    An empty statistic (count 0) is the empty product, i.e. 0.  For the
    variance test the Gaussian normalization term (count/2)*ln(a1/a0) is
    included so the result is the log of the true density ratio.
    """
    if stat.count == 0:
        return 0.0
    if isinstance(pair, MeanTest):
        return (pair.mu0 - pair.mu1) * stat.value + stat.count * (pair.mu1**2 - pair.mu0**2) / 2.0
    return 0.5 * (1.0 / pair.a1 - 1.0 / pair.a0) * stat.value + 0.5 * stat.count * math.log(
        pair.a1 / pair.a0
    )


def posterior_rare(pair: HypothesisPair, stat: SufficientStat, epsilon: float) -> float:
    """Posterior probability that the stream is rare, given prior ``epsilon``.

    Computed as 1 / (1 + ((1-eps)/eps) * exp(llr)) in a form that does not
    overflow for |llr| up to several hundred.
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"prior must lie strictly inside (0, 1), got {epsilon}")
    x = log_likelihood_ratio(pair, stat) + math.log1p(-epsilon) - math.log(epsilon)
    # logistic(-x), evaluated on the side that keeps exp() bounded
    if x >= 0.0:
        e = math.exp(-x)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(x))


def ordering_statistic(pair: HypothesisPair, stat: SufficientStat) -> float:
    """Monotone surrogate for the likelihood ratio used to rank streams.

    Both families' likelihood ratios are strictly increasing in the cumulative
    statistic (given the normal class has the larger parameter), so sorting
    streams ascending by this value sorts them ascending by likelihood ratio.
    """
    return stat.value
