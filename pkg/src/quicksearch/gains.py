"""Agility and scaling gains of refining versus not refining.

The agility gain is the budget ratio (non-adaptive over adaptive) at matched
signal scaling and reliability; the scaling gain is the threshold ratio at
matched budget.  Both are pinned between two-sided bounds that collapse to a
closed form as the refinement count grows.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, ScheduleInfeasibleError
from .policy import s_of_k

__all__ = [
    "GainBounds",
    "agility_gain_bounds",
    "scaling_gain_bounds",
    "equalized_budget",
]


@dataclass(frozen=True)
class GainBounds:
    lower: float
    upper: float
    asymptotic_k: float

    def __post_init__(self) -> None:
        if self.lower > self.upper + 1e-12:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")


def agility_gain_bounds(s0: float, alpha: float, k: int) -> GainBounds:
    """Bounds on the budget ratio gained by k refinements at matched reliability.

    Inverts the floor bracketing of the matched stopping-round identity:

        (1 - alpha^k)/(1-alpha) <= s0*(1/G - alpha^k) <= (1 - alpha^(k+1))/(1-alpha)

    so G lies between the reciprocals.  Both ends tend to s0*(1-alpha) as
    k grows.
    """
    if s0 <= 0.0:
        raise DomainError(f"reference budget must be positive, got {s0}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"survival fraction must lie in (0, 1), got {alpha}")
    if k < 0:
        raise DomainError(f"refinement count must be nonnegative, got {k}")
    ak = alpha**k
    lower = 1.0 / (ak + (1.0 - alpha ** (k + 1)) / (s0 * (1.0 - alpha)))
    upper = 1.0 / (ak + (1.0 - ak) / (s0 * (1.0 - alpha)))
    return GainBounds(lower=lower, upper=upper, asymptotic_k=s0 * (1.0 - alpha))


def scaling_gain_bounds(budget_s: float, alpha: float, k: int) -> GainBounds:
    """Bounds on the threshold ratio gained by k refinements at matched budget."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"survival fraction must lie in (0, 1), got {alpha}")
    if k < 0:
        raise DomainError(f"refinement count must be nonnegative, got {k}")
    if alpha > 1.0 - 1.0 / budget_s + 1e-9:
        raise DomainError(
            f"refining does not pay at alpha={alpha}, S={budget_s}; no scaling gain is defined"
        )
    inv = alpha ** (-k)
    lower = inv * (1.0 + (alpha ** (k + 1) - 1.0) / (budget_s * (1.0 - alpha)))
    upper = inv * (1.0 + (alpha**k - 1.0) / (budget_s * (1.0 - alpha)))
    return GainBounds(
        lower=lower,
        upper=upper,
        asymptotic_k=inv * (1.0 - 1.0 / (budget_s * (1.0 - alpha))),
    )


def equalized_budget(alpha: float, k: int, s0: float) -> float:
    """Smallest budget S whose k-refinement schedule matches a non-adaptive budget s0.

    Solves floor(S*alpha^-k + (1 - alpha^-k)/(1-alpha)) = floor(s0) for the
    infimum feasible S by bisection over the exact floored expression; the
    pre-floor solution is S = alpha^k * (s0 - (1 - alpha^-k)/(1-alpha)).
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"survival fraction must lie in (0, 1), got {alpha}")
    if k < 0:
        raise DomainError(f"refinement count must be nonnegative, got {k}")
    target = int(s0)
    if target < 1:
        raise ScheduleInfeasibleError(f"non-adaptive budget {s0} funds no rounds")

    def rounds(s: float) -> int:
        try:
            return s_of_k(s, k, alpha)
        except ScheduleInfeasibleError:
            return 0

    corr = (1.0 - alpha ** (-k)) / (1.0 - alpha)
    center = alpha**k * (target - corr)
    lo, hi = center - 1.0, center + 1.0
    if rounds(hi) < target:  # guard against float drift in the bracket
        hi = center + 2.0
    if rounds(hi) < target or (lo >= 1.0 and rounds(lo) >= target):
        raise ScheduleInfeasibleError(f"cannot bracket a budget matching s0={s0}")
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if rounds(mid) >= target:
            hi = mid
        else:
            lo = mid
    if hi < 1.0:
        raise ScheduleInfeasibleError(
            f"matching s0={s0} with {k} refinements needs a budget below one pass"
        )
    return hi
