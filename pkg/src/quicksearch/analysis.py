"""Closed-form detectability thresholds, error bounds, and region grids.

Signal strength is measured by dimensionless exponents: the squared mean gap
relative to 2*ln(n) for the mean test, and the log variance ratio relative to
ln(n) for the variance test.  Detection succeeds asymptotically iff the
exponent exceeds a threshold set by the rarity exponent and the schedule
length; this module evaluates those thresholds, the finite-size error bounds
behind them, and classification grids over the (signal, rarity) plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .extremes import LN_TWO_SQRT_PI, gaussian_min_shift
from .model import MeanTest, VarianceTest
from .policy import SearchConfig, s_of_k

__all__ = [
    "RegionGrid",
    "mean_signal_exponent",
    "variance_signal_exponent",
    "threshold_denominator",
    "mean_threshold",
    "variance_threshold",
    "refinement_retention_scale",
    "retention_regime",
    "mean_bound_terms",
    "mean_error_lower_bound",
    "variance_error_closed_form",
    "variance_error_closed_form_expected",
    "build_region",
]


def mean_signal_exponent(pair: MeanTest, n: int) -> float:
    """(mu0 - mu1)^2 / (2 ln n)."""
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    return (pair.mu0 - pair.mu1) ** 2 / (2.0 * math.log(n))


def variance_signal_exponent(pair: VarianceTest, n: int) -> float:
    """ln(a0/a1) / ln n."""
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    return math.log(pair.a0 / pair.a1) / math.log(n)


def threshold_denominator(budget_s: float, k: int, alpha: float) -> int:
    """Stopping-round count entering the detectability thresholds.

    k + s(k) on the branch where refining pays (alpha <= 1 - 1/S), floor(S)
    otherwise.
    """
    if budget_s < 1.0:
        raise DomainError(f"budget must be >= 1, got {budget_s}")
    if alpha <= 1.0 - 1.0 / budget_s + 1e-9:
        return k + s_of_k(budget_s, k, alpha)
    return int(math.floor(budget_s + 1e-9))


def mean_threshold(eps_exp: float, budget_s: float, k: int, alpha: float) -> float:
    """Mean-test detectability threshold (1 - sqrt(eps_exp))^2 / (k + s(k))."""
    if not 0.0 <= eps_exp < 1.0:
        raise DomainError(f"rarity exponent must lie in [0, 1), got {eps_exp}")
    return (1.0 - math.sqrt(eps_exp)) ** 2 / threshold_denominator(budget_s, k, alpha)


def variance_threshold(eps_exp: float, budget_s: float, k: int, alpha: float) -> float:
    """Variance-test detectability threshold 2*(1 - eps_exp) / (k + s(k))."""
    if not 0.0 <= eps_exp < 1.0:
        raise DomainError(f"rarity exponent must lie in [0, 1), got {eps_exp}")
    return 2.0 * (1.0 - eps_exp) / threshold_denominator(budget_s, k, alpha)


def refinement_retention_scale(test: str, n: int, eps_exp: float) -> float:
    """Critical signal scale above which refinements retain (almost) all rare streams.

    n^(-eps_exp/2) for the mean gap, eps_exp*ln(n) for the variance ratio.
    """
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    if test == "mean":
        return n ** (-eps_exp / 2.0)
    if test == "variance":
        return eps_exp * math.log(n)
    raise DomainError(f"test must be 'mean' or 'variance', got {test!r}")


def retention_regime(test: str, n: int, eps_exp: float, signal: float) -> str:
    """Classify a configured gap (mean) or ratio (variance) against the retention scale."""
    return "above" if signal > refinement_retention_scale(test, n, eps_exp) else "below"


def mean_bound_terms(n_rare: int, n_normal: int, tau: int, gap: float) -> tuple[float, float]:
    """Slope and offset comparing the extremes of the two classes at detection time.

    With h the Gaussian-minimum centering, returns
    A = sqrt(h(n_rare)/h(n_normal)) and
    B = sqrt(h(n_rare)) * (sqrt(h(n_rare)) - sqrt(h(n_normal)) + sqrt(tau)*gap).
    """
    if tau < 1:
        raise DomainError(f"round count must be >= 1, got {tau}")
    h_rare = gaussian_min_shift(n_rare)
    h_normal = gaussian_min_shift(n_normal)
    a = math.sqrt(h_rare / h_normal)
    b = math.sqrt(h_rare) * (math.sqrt(h_rare) - math.sqrt(h_normal) + math.sqrt(tau) * gap)
    return a, b


def mean_error_lower_bound(b_n: float) -> float:
    """Asymptotic lower bound on the mean-test detection error as a function of the offset.

    exp(-exp(B - c)) * (1 - exp(-exp(-c)) + exp(-exp(-c)) / (exp(B) + 1)) with
    c = ln(2 sqrt(pi)).  Decreasing in B; tends to 0 iff B -> +inf.
    """
    c = LN_TWO_SQRT_PI
    if b_n - c > 700.0:
        return 0.0
    outer = math.exp(-math.exp(b_n - c))
    tail = math.exp(-math.exp(-c))
    inner = (1.0 - tail) + tail / (math.exp(min(b_n, 700.0)) + 1.0)
    return outer * inner


def variance_error_closed_form(
    ratio: float, tau: int, n_rare: float, n_normal: float, t_target: int
) -> float:
    """Variance-test detection error 1 - (x/(1+x))^t_target with x = ratio^(tau/2) * n_rare/n_normal."""
    if ratio <= 1.0:
        raise DomainError(f"variance ratio must exceed 1, got {ratio}")
    if tau < 1:
        raise DomainError(f"round count must be >= 1, got {tau}")
    if n_rare <= 0 or n_normal <= 0:
        raise DomainError("class counts must be positive")
    if t_target < 1:
        raise DomainError(f"t_target must be >= 1, got {t_target}")
    log_x = 0.5 * tau * math.log(ratio) + math.log(n_rare) - math.log(n_normal)
    if log_x < -700.0:
        return 1.0
    return -math.expm1(-t_target * math.log1p(math.exp(-log_x)))


def variance_error_closed_form_expected(
    ratio: float, tau: int, n: int, epsilon: float, t_target: int
) -> float:
    """Closed-form error evaluated at the expected class counts n*eps and n*(1-eps)."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"prior must lie in (0, 1), got {epsilon}")
    return variance_error_closed_form(ratio, tau, n * epsilon, n * (1.0 - epsilon), t_target)


@dataclass(frozen=True)
class RegionGrid:
    """Detectability classification over a (signal exponent, rarity exponent) grid.

    ``detectable[i][j]`` refers to signal ``axis1[i]`` and rarity ``axis2[j]``;
    ``empirical`` holds Monte Carlo error rates when an overlay was run, else None.
    """

    test: str
    axis1: tuple[float, ...]
    axis2: tuple[float, ...]
    thresholds: tuple[float, ...]
    detectable: tuple[tuple[bool, ...], ...]
    empirical: tuple[tuple[float, ...], ...] | None

    def rows(self) -> list[tuple]:
        """Flatten to (axis1, axis2, threshold, detectable[, empirical]) records."""
        out = []
        for i, r in enumerate(self.axis1):
            for j, e in enumerate(self.axis2):
                row: tuple = (r, e, self.thresholds[j], int(self.detectable[i][j]))
                if self.empirical is not None:
                    row = row + (self.empirical[i][j],)
                out.append(row)
        return out


def build_region(
    test: str,
    n: int,
    t_target: int,
    budget_s: float,
    k: int,
    alpha: float,
    axis1: list[float],
    axis2: list[float],
    trials: int = 0,
    master_seed: int = 0,
) -> RegionGrid:
    """Classify each (signal, rarity) cell against the detectability threshold.

    A cell is detectable iff its signal exponent strictly exceeds the threshold
    at its rarity exponent.  With ``trials`` > 0 each cell also gets a Monte
    Carlo error estimate from the full sampling engine.
    """
    if test not in ("mean", "variance"):
        raise DomainError(f"test must be 'mean' or 'variance', got {test!r}")
    if any(not 0.0 < e < 1.0 for e in axis2):
        raise DomainError("rarity exponents must lie in (0, 1)")
    threshold_fn = mean_threshold if test == "mean" else variance_threshold
    thresholds = tuple(threshold_fn(e, budget_s, k, alpha) for e in axis2)
    detectable = tuple(
        tuple(sig > thresholds[j] for j in range(len(axis2))) for sig in axis1
    )

    empirical = None
    if trials > 0:
        from . import engine  # deferred: analysis stays importable without the simulator
        from .policy import build_schedule

        log_n = math.log(n)
        rates = []
        for i, sig in enumerate(axis1):
            row = []
            for j, eps_exp in enumerate(axis2):
                if test == "mean":
                    pair = MeanTest(math.sqrt(2.0 * sig * log_n), 0.0)
                else:
                    pair = VarianceTest(n**sig, 1.0)
                cfg = SearchConfig(
                    n=n,
                    epsilon=n ** (eps_exp - 1.0),
                    t_target=t_target,
                    budget_s=budget_s,
                    max_refines=k,
                    alpha=alpha,
                )
                schedule = build_schedule(cfg)
                report = engine.monte_carlo(
                    cfg, pair, schedule, trials, (master_seed, i, j)
                )
                row.append(report.error_rate)
            rates.append(tuple(row))
        empirical = tuple(rates)

    return RegionGrid(
        test=test,
        axis1=tuple(axis1),
        axis2=tuple(axis2),
        thresholds=thresholds,
        detectable=detectable,
        empirical=empirical,
    )
