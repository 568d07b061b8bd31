"""Trial execution and Monte Carlo estimation.

A trial generates a hidden labeling of n streams, runs the scheduled
observe/refine rounds, then selects the t_target streams with the smallest
ordering statistic.  All randomness comes from counter-based (Philox)
generators keyed by (seed, purpose, round), so every sample is a pure function
of (master seed, trial, stream, round): trials replay bitwise identically and
are safe to run in parallel in any order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import HypothesisPair, MeanTest
from .policy import Schedule, SearchConfig, retained_count

__all__ = [
    "SearchState",
    "TrialOutcome",
    "MonteCarloReport",
    "keyed_generator",
    "generate_population",
    "observe_round",
    "refine_round",
    "detect",
    "run_trial",
    "monte_carlo",
]

_MASK64 = (1 << 64) - 1

# Purpose tags keeping the label draw and each round's draws on disjoint keys.
_TAG_LABELS = 0x4C42454C
_TAG_ROUND = 0x524E44


def _key(seed, *parts: int) -> list[int]:
    base = seed if isinstance(seed, tuple) else (seed,)
    return [int(p) & _MASK64 for p in (*base, *parts)]


def keyed_generator(seed, *parts: int) -> np.random.Generator:
    """Philox generator keyed by an arbitrary tuple of integers."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_key(seed, *parts))))


@dataclass
class SearchState:
    """Mutable per-trial state: hidden labels, cumulative statistics, active set, ledger."""

    seed: object
    labels: np.ndarray
    stats: np.ndarray
    counts: np.ndarray
    active: np.ndarray
    round: int = 0
    samples_used: int = 0
    rare_retained: list[int] = field(default_factory=list)

    @property
    def n1(self) -> int:
        """Number of rare streams in the full population."""
        return int(self.labels.sum())


@dataclass(frozen=True)
class TrialOutcome:
    """Final selection of one trial plus its error flag and bookkeeping."""

    selected: tuple[int, ...]
    error: bool
    rare_retained_per_refine: tuple[int, ...]
    samples_used: int
    n1: int


@dataclass(frozen=True)
class MonteCarloReport:
    """Aggregate over independent trials."""

    trials: int
    error_rate: float
    wilson_ci95: tuple[float, float]
    mean_samples: float
    mean_rare_retention: float


def generate_population(cfg: SearchConfig, seed) -> SearchState:
    """Label each stream rare independently with probability cfg.epsilon.

    Stream i's label depends only on (seed, i): it is the i-th variate of the
    label-purpose generator for that seed.
    """
    labels = keyed_generator(seed, _TAG_LABELS).random(cfg.n) < cfg.epsilon
    return SearchState(
        seed=seed,
        labels=labels,
        stats=np.zeros(cfg.n),
        counts=np.zeros(cfg.n, dtype=np.int64),
        active=np.arange(cfg.n, dtype=np.int64),
        round=0,
        samples_used=0,
    )


def observe_round(state: SearchState, pair: HypothesisPair) -> SearchState:
    """Accumulate one fresh sample into every active stream's statistic.

    Draws are generated for all n streams keyed by (seed, round) and only the
    active ones are folded in, so the value a stream would observe at round t
    never depends on the policy's past decisions.
    """
    if state.active.size == 0:
        raise RuntimeError("no active streams to observe")
    t = state.round + 1
    draws = keyed_generator(state.seed, _TAG_ROUND, t).standard_normal(state.labels.size)
    if isinstance(pair, MeanTest):
        inc = np.where(state.labels, pair.mu1, pair.mu0) + draws
    else:
        inc = np.where(state.labels, pair.a1, pair.a0) * draws * draws
    idx = state.active
    state.stats[idx] += inc[idx]
    state.counts[idx] += 1
    state.samples_used += int(idx.size)
    state.round = t
    return state


def refine_round(state: SearchState, t_target: int, alpha: float) -> SearchState:
    """Permanently discard the active streams with the largest statistics.

    Keeps the floor(alpha*(l - t_target)) + t_target smallest, ties broken by
    stream index; discarded streams never rejoin.  Records how many rare
    streams survived, for diagnostics only.
    """
    if state.active.size < t_target:
        raise RuntimeError(
            f"refinement invoked with {state.active.size} active streams, below target {t_target}"
        )
    keep = retained_count(int(state.active.size), t_target, alpha)
    order = np.argsort(state.stats[state.active], kind="stable")
    state.active = np.sort(state.active[order[:keep]])
    state.rare_retained.append(int(state.labels[state.active].sum()))
    return state


def detect(state: SearchState, t_target: int) -> TrialOutcome:
    """Select the t_target active streams with the smallest statistics.

    The error flag (a normal stream was selected) is computed from set
    membership and cross-checked against the equivalent order-statistic
    comparison: with at least t_target rare streams active, an error occurs
    iff the t_target-th smallest rare statistic exceeds the smallest normal
    one; with fewer, an error is forced.
    """
    if state.active.size < t_target:
        raise RuntimeError(
            f"detection invoked with {state.active.size} active streams, below target {t_target}"
        )
    values = state.stats[state.active]
    order = np.argsort(values, kind="stable")
    selected = np.sort(state.active[order[:t_target]])
    error = bool(np.any(~state.labels[selected]))

    active_rare = state.labels[state.active]
    rare_vals = values[active_rare]
    normal_vals = values[~active_rare]
    if normal_vals.size == 0:
        error_by_order = False
    elif rare_vals.size < t_target:
        error_by_order = True
    else:
        t_th_rare = np.partition(rare_vals, t_target - 1)[t_target - 1]
        error_by_order = bool(t_th_rare > normal_vals.min())
    assert error == error_by_order, "set-membership and order-statistic error tests disagree"

    return TrialOutcome(
        selected=tuple(int(i) for i in selected),
        error=error,
        rare_retained_per_refine=tuple(state.rare_retained),
        samples_used=state.samples_used,
        n1=state.n1,
    )


def run_trial(
    cfg: SearchConfig, pair: HypothesisPair, schedule: Schedule, seed
) -> TrialOutcome:
    """Execute one full trial of the scheduled search; deterministic in the seed."""
    state = generate_population(cfg, seed)
    for t in range(1, schedule.tau + 1):
        observe_round(state, pair)
        assert state.active.size == schedule.active_sizes[t - 1]
        if t <= schedule.tau - 1 and schedule.psi[t - 1]:
            refine_round(state, cfg.t_target, cfg.alpha)
    return detect(state, cfg.t_target)


def _wilson_ci95(successes: int, trials: int) -> tuple[float, float]:
    z = 1.959963984540054
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _retention(outcome: TrialOutcome) -> float | None:
    if outcome.n1 == 0:
        return None
    if not outcome.rare_retained_per_refine:
        return 1.0
    return outcome.rare_retained_per_refine[-1] / outcome.n1


def monte_carlo(
    cfg: SearchConfig,
    pair: HypothesisPair,
    schedule: Schedule,
    trials: int,
    master_seed,
    threads: int | None = None,
) -> MonteCarloReport:
    """Estimate the detection error rate over independent trials.

    Trial i runs with seed (master_seed, i); the aggregate is identical for any
    thread count.  Rare retention averages the surviving-rare fraction over
    trials that contain at least one rare stream (1.0 when nothing is refined).
    """
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    base = master_seed if isinstance(master_seed, tuple) else (master_seed,)

    def one(i: int) -> TrialOutcome:
        return run_trial(cfg, pair, schedule, base + (i,))

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, range(trials)))
    else:
        outcomes = [one(i) for i in range(trials)]

    errors = sum(o.error for o in outcomes)
    retentions = [r for r in (_retention(o) for o in outcomes) if r is not None]
    return MonteCarloReport(
        trials=trials,
        error_rate=errors / trials,
        wilson_ci95=_wilson_ci95(errors, trials),
        mean_samples=sum(o.samples_used for o in outcomes) / trials,
        mean_rare_retention=(sum(retentions) / len(retentions)) if retentions else math.nan,
    )
