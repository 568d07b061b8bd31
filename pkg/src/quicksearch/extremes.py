"""Order-statistic and extreme-value analytics.

Exact finite-sample order-statistic cdfs, the affine normalizations under
which Gaussian and chi-squared minima/maxima have nondegenerate limits, the
generic von Mises limit families, and the low-order and central-order limit
laws built on top of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy import special

from .errors import DomainError
from .model import HypothesisPair, MeanTest

__all__ = [
    "AffineNorm",
    "LimitLaw",
    "LN_TWO_SQRT_PI",
    "exact_order_cdf",
    "gaussian_min_shift",
    "gaussian_min_norm",
    "gaussian_min_limit_cdf",
    "chi2_min_norm",
    "chi2_min_limit_cdf",
    "chi2_max_norm",
    "chi2_max_limit_cdf",
    "low_order_limit_cdf",
    "central_order_normal",
    "refinement_central_predictors",
    "sample_gaussian_min",
    "sample_chi2_min",
    "sample_chi2_max",
    "von_mises_cdf",
]

# Location constant of the Gaussian-minimum limit law.
LN_TWO_SQRT_PI = math.log(2.0 * math.sqrt(math.pi))

# Below this magnitude the von Mises shape parameter is treated as zero and the
# double-exponential limit branch is used; the two branches agree to ~1e-7 at
# the switch point.
_SHAPE_ZERO = 1e-8


@dataclass(frozen=True)
class AffineNorm:
    """Affine normalization w = shift + scale * y rendering sample extremes nondegenerate."""

    shift: float
    scale: float
    m: int

    def __post_init__(self) -> None:
        if self.scale <= 0.0:
            raise DomainError(f"scale must be positive, got {self.scale}")


@dataclass(frozen=True)
class LimitLaw:
    """Von Mises limit family member for normalized minima or maxima."""

    kind: Literal["min", "max"]
    shape: float
    location: float
    scale: float

    def __post_init__(self) -> None:
        if self.kind not in ("min", "max"):
            raise DomainError(f"kind must be 'min' or 'max', got {self.kind!r}")
        if self.scale <= 0.0:
            raise DomainError(f"scale must be positive, got {self.scale}")


def exact_order_cdf(parent_cdf: Callable[[float], float], r: int, m: int, y: float) -> float:
    """Exact cdf of the r-th smallest of m i.i.d. draws from the parent.

    Evaluated as the regularized incomplete beta I_{G(y)}(r, m-r+1), which is
    the binomial tail sum in a numerically stable form at any m.
    """
    if not 1 <= r <= m:
        raise DomainError(f"order r={r} out of range for sample size m={m}")
    p = float(parent_cdf(y))
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"parent cdf returned {p}, outside [0, 1]")
    return float(special.betainc(r, m - r + 1, p))


def gaussian_min_shift(m: float) -> float:
    """Centering 2*ln(m) - ln(ln(m)) for the minimum of m standard normals."""
    if m < 3:
        raise DomainError(f"need m >= 3 for a positive centering, got {m}")
    return 2.0 * math.log(m) - math.log(math.log(m))


def gaussian_min_norm(m: int) -> AffineNorm:
    """Normalization under which standard-normal minima converge in law."""
    h = gaussian_min_shift(m)
    return AffineNorm(shift=h, scale=math.sqrt(h), m=m)


def gaussian_min_limit_cdf(w: float) -> float:
    """Limit law of normalized standard-normal minima: 1 - exp(-exp(w - ln(2 sqrt(pi))))."""
    return -math.expm1(-math.exp(w - LN_TWO_SQRT_PI))


def chi2_min_norm(k: int, m: int) -> AffineNorm:
    """Normalization under which chi-squared(k) minima converge in law."""
    if k < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {k}")
    if m < 2:
        raise DomainError(f"need m >= 2, got {m}")
    scale = 0.5 * math.exp((math.log(m) - special.gammaln(k / 2.0 + 1.0)) * 2.0 / k)
    return AffineNorm(shift=0.0, scale=scale, m=m)


def chi2_min_limit_cdf(k: int, w: float) -> float:
    """Limit law of normalized chi-squared(k) minima: 1 - exp(-w^(k/2)) on w >= 0."""
    if k < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {k}")
    if w < 0.0:
        raise DomainError(f"support is the nonnegative axis, got w={w}")
    return -math.expm1(-(w ** (k / 2.0)))


def chi2_max_norm(k: int, m: int) -> AffineNorm:
    """Normalization under which chi-squared(k) maxima converge to a Gumbel-type law.

    The centering is -(ln m + (k/2 - 1) * ln ln m): the ln ln coefficient is
    (k-2)/2, which makes the upper tail mass at the shifted point decay like
    exp(-w)/m with no residual ln(m) drift.  At k=2 (exponential parent) the
    centering reduces to -ln m and the law is exactly Gumbel.
    """
    if k < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {k}")
    if m < 3:
        raise DomainError(f"need m >= 3, got {m}")
    shift = -(math.log(m) + (k / 2.0 - 1.0) * math.log(math.log(m)))
    return AffineNorm(shift=shift, scale=0.5, m=m)


def chi2_max_limit_cdf(k: int, w: float) -> float:
    """Limit law of normalized chi-squared(k) maxima: exp(-exp(-w)/Gamma(k/2))."""
    if k < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {k}")
    return math.exp(-math.exp(-w - special.gammaln(k / 2.0)))


def low_order_limit_cdf(limit_min: Callable[[float], float], r: int, w: float) -> float:
    """Limit cdf of the r-th smallest statistic given the minimum's limit law L.

    Equal to 1 - (1-L(w)) * sum_{i<r} (-ln(1-L(w)))^i / i!, i.e. the lower tail
    of a Poisson count with mean -ln(1-L(w)), computed via the regularized
    incomplete gamma.  r=1 reproduces L exactly.
    """
    if r < 1:
        raise DomainError(f"order must be >= 1, got {r}")
    lw = float(limit_min(w))
    if lw >= 1.0:
        return 1.0
    if lw <= 0.0:
        return 0.0
    rate = -math.log1p(-lw)
    return float(special.gammainc(r, rate))


def central_order_normal(
    parent_quantile: Callable[[float], float],
    parent_pdf: Callable[[float], float],
    zeta: float,
    m: int,
) -> tuple[float, float]:
    """Normal approximation (mean, variance) of the ceil(m*zeta)-th of m order statistics.

    mean = G^{-1}(zeta), variance = zeta*(1-zeta) / (m * g(G^{-1}(zeta))^2).
    """
    if not 0.0 < zeta < 1.0:
        raise DomainError(f"central fraction must lie in (0, 1), got {zeta}")
    if m < 1:
        raise DomainError(f"sample size must be >= 1, got {m}")
    q = float(parent_quantile(zeta))
    g = float(parent_pdf(q))
    if g <= 0.0:
        raise DomainError(f"parent density vanishes at the {zeta}-quantile")
    return q, zeta * (1.0 - zeta) / (m * g * g)


def refinement_central_predictors(
    pair: HypothesisPair,
    t: int,
    fraction: float,
    count: int,
    label: Literal["rare", "normal"] = "rare",
) -> tuple[float, float]:
    """Predicted (mean, variance) of the ``fraction``-quantile order statistic at round t.

    Applies the central-order normal law to the N(mu*t, t) parent of the given
    class after t samples; only the mean test has a Gaussian cumulative
    statistic, so variance-test input is rejected.
    """
    if not isinstance(pair, MeanTest):
        raise DomainError("central-order predictors are defined for the mean test only")
    if t < 1:
        raise DomainError(f"round index must be >= 1, got {t}")
    if count < 2:
        raise DomainError(f"need at least 2 streams, got {count}")
    if label not in ("rare", "normal"):
        raise DomainError(f"label must be 'rare' or 'normal', got {label!r}")
    mu = pair.mu1 if label == "rare" else pair.mu0
    center = mu * t
    sd = math.sqrt(t)
    return central_order_normal(
        lambda z: center + sd * float(special.ndtri(z)),
        lambda x: math.exp(-((x - center) ** 2) / (2.0 * t)) / (sd * math.sqrt(2.0 * math.pi)),
        fraction,
        count,
    )


def sample_gaussian_min(m: int, reps: int, rng) -> np.ndarray:
    """Draw normalized minima of m standard normals, exactly, via the inverse cdf.

    The minimum's cdf is 1-(1-Phi(y))^m, so one uniform per replicate suffices;
    no m-wide sample is materialized.
    """
    norm = gaussian_min_norm(m)
    u = rng.random(reps)
    q = -np.expm1(np.log1p(-u) / m)
    return norm.shift + norm.scale * special.ndtri(q)


def sample_chi2_min(k: int, m: int, reps: int, rng) -> np.ndarray:
    """Draw normalized minima of m chi-squared(k) variates via the inverse cdf."""
    norm = chi2_min_norm(k, m)
    u = rng.random(reps)
    q = -np.expm1(np.log1p(-u) / m)
    return norm.scale * 2.0 * special.gammaincinv(k / 2.0, q)


def sample_chi2_max(k: int, m: int, reps: int, rng) -> np.ndarray:
    """Draw normalized maxima of m chi-squared(k) variates via the inverse cdf."""
    norm = chi2_max_norm(k, m)
    u = rng.random(reps)
    q = np.exp(np.log(u) / m)
    return norm.shift + norm.scale * 2.0 * special.gammaincinv(k / 2.0, q)


def von_mises_cdf(law: LimitLaw, w: float) -> float:
    """Evaluate a von Mises min/max limit family member at w.

    Arguments outside the support constraint 1 +/- shape*(w-location)/scale >= 0
    clamp to the appropriate cdf endpoint.
    """
    z = (w - law.location) / law.scale
    if law.kind == "min":
        if abs(law.shape) < _SHAPE_ZERO:
            return -math.expm1(-math.exp(z))
        arg = 1.0 + law.shape * z
        if arg <= 0.0:
            return 0.0 if law.shape > 0.0 else 1.0
        return -math.expm1(-(arg ** (1.0 / law.shape)))
    if abs(law.shape) < _SHAPE_ZERO:
        return math.exp(-math.exp(-z))
    arg = 1.0 - law.shape * z
    if arg <= 0.0:
        return 1.0 if law.shape > 0.0 else 0.0
    return math.exp(-(arg ** (1.0 / law.shape)))
