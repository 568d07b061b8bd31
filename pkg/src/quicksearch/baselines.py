"""Comparator procedures: non-adaptive search, per-stream SPRT, repeated CUSUM.

The repeated-CUSUM scanner examines streams one at a time in index order,
declaring a stream rare when its one-sided CUSUM statistic crosses a threshold
and abandoning it after a fixed per-stream sample cap.  Its budget at a matched
error target is the comparison point for the scheduled search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Iterator

import numpy as np

from .analysis import variance_error_closed_form_expected
from .errors import DomainError, ScheduleInfeasibleError
from .model import HypothesisPair, MeanTest, VarianceTest, llr_increment
from .policy import SearchConfig, build_schedule
from . import engine

__all__ = [
    "SprtConfig",
    "CusumConfig",
    "ScanResult",
    "rare_vs_normal_kl",
    "per_stream_cap",
    "run_nonadaptive",
    "run_sprt_per_stream",
    "run_repeated_cusum",
    "calibrate_cusum_threshold",
    "required_adaptive_budget",
    "crossover_curves",
]

_TAG_SCAN = 0x5343414E
_TAG_PILOT = 0x50494C54
_TAG_POP = 0x504F5053


@dataclass(frozen=True)
class SprtConfig:
    """Per-stream sequential test targets and the derived Wald boundaries."""

    alpha_err: float
    beta_err: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha_err < 0.5 and 0.0 < self.beta_err < 0.5):
            raise DomainError("error targets must lie in (0, 1/2)")

    @property
    def thresholds(self) -> tuple[float, float]:
        """(ln((1-beta)/alpha), ln(beta/(1-alpha)))."""
        return (
            math.log((1.0 - self.beta_err) / self.alpha_err),
            math.log(self.beta_err / (1.0 - self.alpha_err)),
        )


@dataclass(frozen=True)
class CusumConfig:
    threshold: float
    target_error: float

    def __post_init__(self) -> None:
        if self.threshold <= 0.0:
            raise DomainError(f"threshold must be positive, got {self.threshold}")


@dataclass(frozen=True)
class ScanResult:
    """Outcome of one stream-by-stream scanning pass over a population."""

    identified: tuple[int, ...]
    samples_used: int
    complete: bool
    false_declared: int
    n1: int


def rare_vs_normal_kl(pair: HypothesisPair) -> float:
    """KL divergence of the rare density from the normal one, E_rare[ln(f1/f0)]."""
    if isinstance(pair, MeanTest):
        return 0.5 * (pair.mu0 - pair.mu1) ** 2
    r = pair.a0 / pair.a1
    return 0.5 * (1.0 / r - 1.0 + math.log(r))


def per_stream_cap(pair: HypothesisPair, threshold: float) -> int:
    """Samples granted to one stream before it is abandoned: ceil(4*threshold/KL)."""
    return int(math.ceil(4.0 * threshold / rare_vs_normal_kl(pair)))


def run_nonadaptive(
    cfg: SearchConfig, pair: HypothesisPair, trials: int, seed
) -> engine.MonteCarloReport:
    """Scheduled search with refinements forced off: floor(S) plain observation rounds."""
    flat = replace(cfg, max_refines=0)
    return engine.monte_carlo(flat, pair, build_schedule(flat), trials, seed)


def run_sprt_per_stream(
    pair: HypothesisPair,
    sprt: SprtConfig,
    stream: Iterable[float],
    max_samples: int,
) -> tuple[str, int]:
    """Sequential test of one stream; returns ('rare'|'normal', samples consumed).

    The running statistic is the cumulative ln(f0/f1): the rare decision fires
    at the lower boundary ln(alpha/(1-beta)), the normal decision at the upper
    boundary ln((1-alpha)/beta).  Truncation at max_samples decides by sign
    (negative means rare).
    """
    upper_store, lower_store = sprt.thresholds
    rare_boundary = -upper_store
    normal_boundary = -lower_store
    llr = 0.0
    used = 0
    it: Iterator[float] = iter(stream)
    for x in it:
        used += 1
        llr += llr_increment(pair, x)
        if llr <= rare_boundary:
            return "rare", used
        if llr >= normal_boundary:
            return "normal", used
        if used >= max_samples:
            break
    return ("rare", used) if llr < 0.0 else ("normal", used)


def _scan_increments(pair: HypothesisPair, labels: np.ndarray, draws: np.ndarray) -> np.ndarray:
    """Rare-evidence increments ln(f1/f0) for a (streams, samples) draw block."""
    if isinstance(pair, MeanTest):
        x = np.where(labels[:, None], pair.mu1, pair.mu0) + draws
        return (pair.mu1 - pair.mu0) * x + 0.5 * (pair.mu0**2 - pair.mu1**2)
    x2 = np.where(labels[:, None], pair.a1, pair.a0) * draws * draws
    return 0.5 * (1.0 / pair.a0 - 1.0 / pair.a1) * x2 + 0.5 * math.log(pair.a0 / pair.a1)


def _cusum_paths(inc: np.ndarray) -> np.ndarray:
    """Reflected-walk statistic W_t = max(0, W_{t-1} + inc_t) along axis 1."""
    s = np.cumsum(inc, axis=1)
    return s - np.minimum(np.minimum.accumulate(s, axis=1), 0.0)


def run_repeated_cusum(
    cfg: SearchConfig,
    pair: HypothesisPair,
    cusum: CusumConfig,
    t_target: int,
    seed,
    block: int = 256,
) -> ScanResult:
    """Scan streams in index order until t_target are declared rare.

    Each scanned stream is sampled until its CUSUM statistic reaches the
    threshold (declared) or the per-stream cap is exhausted (abandoned);
    abandoned-stream samples count toward the budget.  A pass that runs out of
    streams returns complete=False.
    """
    labels = engine.generate_population(cfg, seed).labels
    cap = per_stream_cap(pair, cusum.threshold)
    declared: list[int] = []
    total = 0
    start = 0
    while start < cfg.n and len(declared) < t_target:
        stop = min(cfg.n, start + block)
        draws = engine.keyed_generator(seed, _TAG_SCAN, start).standard_normal(
            (stop - start, cap)
        )
        w = _cusum_paths(_scan_increments(pair, labels[start:stop], draws))
        hit = w >= cusum.threshold
        has_hit = hit.any(axis=1)
        first = np.where(has_hit, hit.argmax(axis=1) + 1, cap)
        for local in range(stop - start):
            total += int(first[local])
            if has_hit[local]:
                declared.append(start + local)
                if len(declared) == t_target:
                    break
        start = stop
    false_declared = int(sum(not labels[i] for i in declared))
    return ScanResult(
        identified=tuple(declared),
        samples_used=total,
        complete=len(declared) == t_target,
        false_declared=false_declared,
        n1=int(labels.sum()),
    )


def run_repeated_sprt(
    cfg: SearchConfig,
    pair: HypothesisPair,
    sprt: SprtConfig,
    t_target: int,
    seed,
    max_samples: int | None = None,
    block: int = 256,
) -> ScanResult:
    """Scan streams in index order, testing each with an SPRT, until t_target are declared.

    A stream ends at whichever Wald boundary its cumulative ln(f0/f1) crosses
    first; truncation at max_samples decides by sign.
    """
    upper_store, lower_store = sprt.thresholds
    rare_boundary = -upper_store
    normal_boundary = -lower_store
    if max_samples is None:
        max_samples = int(math.ceil(4.0 * upper_store / rare_vs_normal_kl(pair)))
    labels = engine.generate_population(cfg, seed).labels
    declared: list[int] = []
    total = 0
    start = 0
    while start < cfg.n and len(declared) < t_target:
        stop = min(cfg.n, start + block)
        draws = engine.keyed_generator(seed, _TAG_SCAN, start).standard_normal(
            (stop - start, max_samples)
        )
        s = -np.cumsum(_scan_increments(pair, labels[start:stop], draws), axis=1)
        rare_hit = s <= rare_boundary
        normal_hit = s >= normal_boundary
        first_rare = np.where(rare_hit.any(axis=1), rare_hit.argmax(axis=1), max_samples)
        first_normal = np.where(normal_hit.any(axis=1), normal_hit.argmax(axis=1), max_samples)
        for local in range(stop - start):
            fr, fn = int(first_rare[local]), int(first_normal[local])
            used = min(fr, fn, max_samples - 1) + 1
            total += used
            is_rare_call = fr < fn or (fr == fn == max_samples and s[local, -1] < 0.0)
            if is_rare_call:
                declared.append(start + local)
                if len(declared) == t_target:
                    break
        start = stop
    return ScanResult(
        identified=tuple(declared),
        samples_used=total,
        complete=len(declared) == t_target,
        false_declared=int(sum(not labels[i] for i in declared)),
        n1=int(labels.sum()),
    )


def _expected_normals_scanned(cfg: SearchConfig, t_target: int, seed, reps: int = 2000) -> float:
    """Mean normals examined before the t_target-th rare, given enough rares exist."""
    rng = engine.keyed_generator(seed, _TAG_POP)
    counts = []
    attempts = 0
    while len(counts) < reps:
        attempts += 1
        if attempts > 50 * reps:
            raise DomainError("population rarely contains t_target rare streams")
        lab = rng.random(cfg.n) < cfg.epsilon
        idx = np.nonzero(lab)[0]
        if idx.size < t_target:
            continue
        counts.append(int(idx[t_target - 1]) + 1 - t_target)
    return float(np.mean(counts))


def calibrate_cusum_threshold(
    cfg: SearchConfig,
    pair: HypothesisPair,
    t_target: int,
    target_error: float,
    seed,
    pilot_streams: int = 30000,
    c_lo: float = 0.5,
    c_hi: float = 25.0,
    grid: int = 48,
) -> CusumConfig:
    """Pick the CUSUM threshold whose scan error matches the target.

    A pilot Monte Carlo of normal-class streams estimates the per-stream false
    alarm probability across a threshold grid; where the target sits below the
    pilot's resolution, the tail is extended by the exponential fit of the
    measured curve.  The returned threshold is found by bisection on the
    resulting error model 1 - (1 - p_false(c))^(mean normals scanned).
    """
    if not 0.0 < target_error < 1.0:
        raise DomainError(f"target error must lie in (0, 1), got {target_error}")
    kl = rare_vs_normal_kl(pair)
    cs = np.geomspace(c_lo, c_hi, grid)
    caps = np.ceil(4.0 * cs / kl).astype(int)
    cap_max = int(caps[-1])

    hits = np.zeros(grid)
    done = 0
    chunk_index = 0
    block = max(1, int(2_000_000 // cap_max))
    no_labels = np.zeros(block, dtype=bool)
    while done < pilot_streams:
        take = min(block, pilot_streams - done)
        draws = engine.keyed_generator(seed, _TAG_PILOT, chunk_index).standard_normal(
            (take, cap_max)
        )
        w = _cusum_paths(_scan_increments(pair, no_labels[:take], draws))
        runmax = np.maximum.accumulate(w, axis=1)
        for j in range(grid):
            hits[j] += np.count_nonzero(runmax[:, caps[j] - 1] >= cs[j])
        done += take
        chunk_index += 1

    p_false = hits / pilot_streams
    # Exponential tail fit ln p = a + b*c on well-measured grid points.
    solid = hits >= 20
    if np.count_nonzero(solid) < 3:
        raise DomainError("pilot too small to resolve the false-alarm curve")
    coef_b, coef_a = np.polyfit(cs[solid], np.log(p_false[solid]), 1)
    if coef_b >= 0.0:
        raise DomainError("false-alarm curve is not decreasing; pilot unusable")

    def p_false_model(c: float) -> float:
        j = int(np.searchsorted(cs, c))
        if j < grid and hits[j] >= 20:
            return float(p_false[j])
        return float(math.exp(coef_a + coef_b * c))

    n0 = _expected_normals_scanned(cfg, t_target, seed)

    def err_model(c: float) -> float:
        return -math.expm1(n0 * math.log1p(-min(p_false_model(c), 1.0 - 1e-12)))

    lo, hi = c_lo, max(c_hi, (math.log(target_error / n0) - coef_a) / coef_b + 5.0)
    if err_model(lo) <= target_error:
        return CusumConfig(threshold=lo, target_error=target_error)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if err_model(mid) > target_error:
            lo = mid
        else:
            hi = mid
    return CusumConfig(threshold=hi, target_error=target_error)


def required_adaptive_budget(
    n: int,
    epsilon: float,
    ratio: float,
    t_target: int,
    k: int,
    alpha: float,
    target_error: float,
    max_rounds: int = 200_000,
) -> tuple[float, int]:
    """Smallest (budget S, stopping round) driving the closed-form error to the target.

    Scans stopping rounds upward until the variance-test closed form at the
    expected class counts meets the target, then inverts the round count into
    the minimal budget funding it with k refinements.
    """
    for tau in range(k + 1, max_rounds + 1):
        if variance_error_closed_form_expected(ratio, tau, n, epsilon, t_target) <= target_error:
            break
    else:
        raise ScheduleInfeasibleError("target error unreachable within the round cap")
    corr = (1.0 - alpha ** (-k)) / (1.0 - alpha) if k > 0 else 0.0
    s = alpha**k * ((tau - k) - corr)
    return max(s, 1.0), tau


def _conditioned_seed(cfg: SearchConfig, t_target: int, seed, attempts: int = 1000):
    """First derived seed whose population holds at least t_target rare streams."""
    base = seed if isinstance(seed, tuple) else (seed,)
    for a in range(attempts):
        candidate = base + (a,)
        if engine.generate_population(cfg, candidate).labels.sum() >= t_target:
            return candidate
    raise DomainError("could not draw a population with t_target rare streams")


def crossover_curves(
    n: int,
    eps_exponents: list[float],
    ratio_exponent: float,
    t_target: int,
    k_values: list[int],
    alpha: float,
    target_error: float,
    seed,
    cusum_trials: int = 40,
) -> list[dict]:
    """Budget-at-matched-error curves for the scheduled search and repeated CUSUM.

    For each rarity exponent: the scheduled search's budget is the closed-form
    requirement for each k in k_values; the CUSUM budget is the mean over
    simulated scans at a threshold calibrated to the same error target.
    Populations are conditioned on containing t_target rare streams.  Returns
    rows of {method, epsilon_exponent, mean_budget, error_rate}.
    """
    ratio = n**ratio_exponent
    rows: list[dict] = []
    for eps_exp in eps_exponents:
        epsilon = n ** (eps_exp - 1.0)
        cfg = SearchConfig(
            n=n, epsilon=epsilon, t_target=t_target, budget_s=1.0, max_refines=0, alpha=alpha
        )
        for k in k_values:
            s, tau = required_adaptive_budget(
                n, epsilon, ratio, t_target, k, alpha, target_error
            )
            err = variance_error_closed_form_expected(ratio, tau, n, epsilon, t_target)
            rows.append(
                {
                    "method": f"scheduled-k{k}",
                    "epsilon_exponent": eps_exp,
                    "mean_budget": s * n,
                    "error_rate": err,
                }
            )
        vpair = VarianceTest(ratio, 1.0)
        cusum = calibrate_cusum_threshold(cfg, vpair, t_target, target_error, (seed, 0))
        budgets = []
        errors = 0
        for trial in range(cusum_trials):
            s_seed = _conditioned_seed(cfg, t_target, (seed, 1, trial))
            result = run_repeated_cusum(cfg, vpair, cusum, t_target, s_seed)
            budgets.append(result.samples_used)
            errors += int(result.false_declared > 0 or not result.complete)
        rows.append(
            {
                "method": "cusum",
                "epsilon_exponent": eps_exp,
                "mean_budget": float(np.mean(budgets)),
                "error_rate": errors / cusum_trials,
            }
        )
    return rows
