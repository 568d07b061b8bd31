"""Open-loop sampling schedule synthesis.

Given the normalized budget S, the refinement cap K, the survival fraction
alpha and the population size, this module derives the number of refinements
actually worth performing, the stopping round, the refine/observe switching
sequence and the per-round active-set sizes.  The budget is a hard constraint:
a built schedule never claims more than S*n samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, ScheduleInfeasibleError

__all__ = [
    "SearchConfig",
    "Schedule",
    "epsilon_exponent",
    "retained_count",
    "optimal_k",
    "s_of_k",
    "active_sizes_for_psi",
    "build_schedule",
]

# Tolerance absorbing binary-float drift before floors and budget comparisons
# (e.g. 0.1**-2 evaluating to 99.999...98).
_FLOAT_SLACK = 1e-9


def _floor(x: float) -> int:
    return int(math.floor(x + _FLOAT_SLACK))


@dataclass(frozen=True)
class SearchConfig:
    """Problem instance: population size, rare prior, target count and sampling resources.

    ``epsilon`` may be 0 or 1 for degenerate all-normal / all-rare populations;
    operations that need a nondegenerate prior enforce (0, 1) themselves.
    """

    n: int
    epsilon: float
    t_target: int
    budget_s: float
    max_refines: int
    alpha: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"need at least one stream, got n={self.n}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError(f"rare prior must lie in [0, 1], got {self.epsilon}")
        if not 1 <= self.t_target <= self.n:
            raise DomainError(f"t_target must lie in [1, n], got {self.t_target}")
        if self.budget_s < 1.0:
            raise DomainError(f"budget must fund at least one full pass, got S={self.budget_s}")
        if self.max_refines < 0:
            raise DomainError(f"refinement cap must be nonnegative, got {self.max_refines}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"survival fraction must lie in (0, 1), got {self.alpha}")

    def regime_summary(self) -> dict[str, float]:
        """Asymptotic-regime indicators, recorded for reporting but never enforced."""
        n_eps = self.n * self.epsilon
        return {
            "epsilon": self.epsilon,
            "n_epsilon": n_eps,
            "t_target_over_n_epsilon": (self.t_target / n_eps) if n_eps > 0 else math.inf,
        }


@dataclass(frozen=True)
class Schedule:
    """Concrete open-loop plan: refine after rounds 1..k_star, then observe until tau."""

    k_star: int
    tau: int
    psi: tuple[int, ...]
    active_sizes: tuple[int, ...]
    total_samples: int

    def __post_init__(self) -> None:
        if len(self.psi) != self.tau - 1 or len(self.active_sizes) != self.tau:
            raise ValueError("psi must have tau-1 entries and active_sizes tau entries")
        ones = sum(self.psi)
        if any(self.psi[i] < self.psi[i + 1] for i in range(len(self.psi) - 1)):
            raise ValueError("switching sequence must be ones-then-zeros")
        if ones != self.k_star:
            raise ValueError(f"switching sequence has {ones} refinements, expected {self.k_star}")


def epsilon_exponent(n: int, epsilon: float) -> float:
    """Rarity exponent ln(n*eps)/ln(n), in (-inf, 1) for eps in (0, 1)."""
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    if n * epsilon <= 0.0:
        raise DomainError("n*epsilon must be positive")
    return math.log(n * epsilon) / math.log(n)


def retained_count(active: int, t_target: int, alpha: float) -> int:
    """Number of streams a refinement keeps: floor(alpha*(active - t_target)) + t_target."""
    if active < t_target:
        raise DomainError(f"cannot refine {active} streams down toward target {t_target}")
    return _floor(alpha * (active - t_target)) + t_target


def optimal_k(budget_s: float, max_refines: int, alpha: float) -> int:
    """Refinement count that maximizes the stopping round: all of them or none.

    Refining pays off exactly when alpha <= 1 - 1/S (boundary inclusive);
    otherwise each refinement costs more rounds than it frees.
    """
    if budget_s < 1.0:
        raise DomainError(f"budget must be >= 1, got {budget_s}")
    return max_refines if alpha <= 1.0 - 1.0 / budget_s + _FLOAT_SLACK else 0


def s_of_k(budget_s: float, k: int, alpha: float) -> int:
    """Observation rounds fundable after k refinements: floor(S*alpha^-k + (1-alpha^-k)/(1-alpha))."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"survival fraction must lie in (0, 1), got {alpha}")
    if k < 0:
        raise DomainError(f"refinement count must be nonnegative, got {k}")
    scale = alpha ** (-k)
    s = _floor(budget_s * scale + (1.0 - scale) / (1.0 - alpha))
    if s < 1:
        raise ScheduleInfeasibleError(
            f"budget S={budget_s} cannot fund an observation round after {k} refinements"
        )
    return s


def active_sizes_for_psi(
    n: int, t_target: int, alpha: float, psi: Sequence[int]
) -> list[int]:
    """Active-set sizes for an arbitrary refine/observe sequence.

    Entry t is floor(alpha^(number of refinements before round t) * (n - t_target)) + t_target.
    """
    sizes = [n]
    refines = 0
    for flag in psi:
        if flag:
            refines += 1
        sizes.append(_floor(alpha**refines * (n - t_target)) + t_target)
    return sizes


def build_schedule(cfg: SearchConfig) -> Schedule:
    """Synthesize the budget-feasible schedule for a problem instance.

    The stopping round starts at its large-n optimum k* + s(k*); because the
    floor arithmetic at finite n can overshoot the hard budget by O(K*t_target)
    samples, trailing observation rounds are dropped until the total sample
    count fits.  Raises ScheduleInfeasibleError when even k*+1 rounds exceed
    the budget.
    """
    k_star = optimal_k(cfg.budget_s, cfg.max_refines, cfg.alpha)
    tau = k_star + s_of_k(cfg.budget_s, k_star, cfg.alpha)
    if tau < k_star + 1:
        raise ScheduleInfeasibleError(f"stopping round {tau} cannot fit {k_star} refinements")

    budget = cfg.budget_s * cfg.n + _FLOAT_SLACK * cfg.n
    # Rounds after the last refinement all share one size, so the budget trim
    # (drop trailing observation rounds until the total fits) is closed-form.
    head = active_sizes_for_psi(cfg.n, cfg.t_target, cfg.alpha, [1] * k_star)
    head_total = sum(head)
    if head_total > budget:
        raise ScheduleInfeasibleError(
            f"budget S={cfg.budget_s} cannot fund {k_star} refinements at n={cfg.n}, "
            f"t_target={cfg.t_target}"
        )
    final_size = head[-1]
    tail_rounds = min(tau - (k_star + 1), int((budget - head_total) // final_size))
    tau = k_star + 1 + tail_rounds

    psi = [1] * k_star + [0] * (tau - 1 - k_star)
    sizes = head + [final_size] * tail_rounds
    return Schedule(
        k_star=k_star,
        tau=tau,
        psi=tuple(psi),
        active_sizes=tuple(sizes),
        total_samples=head_total + final_size * tail_rounds,
    )
