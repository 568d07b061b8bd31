"""Command-line front end.

Subcommands: schedule | simulate | region | extremes | gains | baseline.
All CSV output uses a header row, LF line endings, '.' as the decimal
separator and 9-significant-digit floats.  Every command honors --seed
(default 12345, never wall clock), so default runs are reproducible; commands
that write a CSV file also write a JSON manifest with the resolved
configuration and a digest of the CSV body.

Exit codes: 0 success, 2 usage/config error, 3 infeasible schedule,
4 numeric domain error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from importlib import metadata

import numpy as np

from . import analysis, baselines, engine, extremes, gains
from .errors import ConfigError, DomainError, ScheduleInfeasibleError
from .model import MeanTest, VarianceTest
from .policy import SearchConfig, build_schedule

DEFAULT_SEED = 12345

_CONFIG_KEYS = (
    "test",
    "n",
    "epsilon",
    "eps_exponent",
    "t_target",
    "budget_s",
    "max_refines",
    "alpha",
    "mu0",
    "mu1",
    "a0",
    "a1",
)


def _version() -> str:
    try:
        return metadata.version("quicksearch")
    except metadata.PackageNotFoundError:
        return "0.0.0"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def _emit_csv(args, command: str, header: list[str], rows, config: dict) -> None:
    body = ",".join(header) + "\n"
    body += "".join(",".join(_fmt(v) for v in row) + "\n" for row in rows)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(body)
        manifest = {
            "tool": f"quicksearch {_version()}",
            "command": command,
            "config": config,
            "master_seed": args.seed,
            "outputs": {os.path.basename(out): hashlib.sha256(body.encode()).hexdigest()},
        }
        with open(out + ".manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.write(body)


def _args_snapshot(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func",) and v is not None}


def _threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("QUICKSEARCH_THREADS")
    return int(env) if env else None


def _load_config(args) -> dict:
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed config {args.config}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(_CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in _CONFIG_KEYS:  # flags win over file values
        override = getattr(args, key, None)
        if override is not None:
            raw[key] = override
    if "epsilon" not in raw:
        if "eps_exponent" not in raw:
            raise ConfigError("config needs either epsilon or eps_exponent")
        raw["epsilon"] = float(raw["n"]) ** (float(raw["eps_exponent"]) - 1.0)
    for key in ("test", "n", "t_target", "budget_s", "max_refines", "alpha"):
        if key not in raw:
            raise ConfigError(f"config key {key!r} is required")
    return raw


def _pair_from_config(raw: dict):
    try:
        if raw["test"] == "mean":
            return MeanTest(float(raw["mu0"]), float(raw["mu1"]))
        if raw["test"] == "variance":
            return VarianceTest(float(raw["a0"]), float(raw["a1"]))
    except KeyError as exc:
        raise ConfigError(f"config key {exc.args[0]!r} is required for test={raw['test']!r}")
    raise ConfigError(f"test must be 'mean' or 'variance', got {raw['test']!r}")


def _cfg_from_config(raw: dict) -> SearchConfig:
    return SearchConfig(
        n=int(raw["n"]),
        epsilon=float(raw["epsilon"]),
        t_target=int(raw["t_target"]),
        budget_s=float(raw["budget_s"]),
        max_refines=int(raw["max_refines"]),
        alpha=float(raw["alpha"]),
    )


def cmd_schedule(args) -> int:
    cfg = SearchConfig(
        n=args.n,
        epsilon=args.epsilon if args.epsilon is not None else 0.5,
        t_target=args.Tn,
        budget_s=args.S,
        max_refines=args.K,
        alpha=args.alpha,
    )
    schedule = build_schedule(cfg)
    print(f"k_star  {schedule.k_star}")
    print(f"tau     {schedule.tau}")
    print(f"psi     {' '.join(str(p) for p in schedule.psi)}")
    print(f"sizes   {' '.join(str(s) for s in schedule.active_sizes)}")
    print(f"total   {schedule.total_samples}")
    print(f"budget  {_fmt(args.S * args.n)}")
    return 0


def cmd_simulate(args) -> int:
    if args.trials < 1:
        raise ConfigError(f"--trials must be >= 1, got {args.trials}")
    raw = _load_config(args)
    cfg = _cfg_from_config(raw)
    pair = _pair_from_config(raw)
    schedule = build_schedule(cfg)
    threads = _threads(args)
    base = (args.seed,)

    def one(i: int) -> tuple:
        outcome = engine.run_trial(cfg, pair, schedule, base + (i,))
        retained = (
            outcome.rare_retained_per_refine[-1]
            if outcome.rare_retained_per_refine
            else outcome.n1
        )
        return (i, outcome.error, outcome.samples_used, outcome.n1, retained)

    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(args.trials)))
    else:
        rows = [one(i) for i in range(args.trials)]
    _emit_csv(
        args,
        "simulate",
        ["trial", "error", "samples_used", "n1", "rare_retained_final"],
        rows,
        {"config": raw, "trials": args.trials},
    )
    return 0


def cmd_region(args) -> int:
    axis1 = list(np.linspace(args.axis1_min, args.axis1_max, args.axis1_count))
    axis2 = list(np.linspace(args.axis2_min, args.axis2_max, args.axis2_count))
    grid = analysis.build_region(
        test=args.test,
        n=args.n,
        t_target=args.Tn,
        budget_s=args.S,
        k=args.K,
        alpha=args.alpha,
        axis1=axis1,
        axis2=axis2,
        trials=args.trials,
        master_seed=args.seed,
    )
    header = ["axis1", "axis2", "threshold", "detectable"]
    if grid.empirical is not None:
        header.append("empirical_error")
    _emit_csv(args, "region", header, grid.rows(), _args_snapshot(args))
    return 0


def cmd_extremes(args) -> int:
    rng = engine.keyed_generator(args.seed, 0x455654)
    if args.family == "gaussian-min":
        sample = extremes.sample_gaussian_min(args.m, args.samples, rng)
        limit = extremes.gaussian_min_limit_cdf
    elif args.family == "chi2-min":
        sample = extremes.sample_chi2_min(args.k, args.m, args.samples, rng)
        limit = lambda w: extremes.chi2_min_limit_cdf(args.k, max(w, 0.0))
    else:
        sample = extremes.sample_chi2_max(args.k, args.m, args.samples, rng)
        limit = lambda w: extremes.chi2_max_limit_cdf(args.k, w)
    sample = np.sort(sample)
    grid = np.linspace(sample[0], sample[-1], args.grid_points)
    empirical = np.searchsorted(sample, grid, side="right") / sample.size
    rows = [(w, e, limit(w)) for w, e in zip(grid, empirical)]
    _emit_csv(args, "extremes", ["w", "empirical_cdf", "limit_cdf"], rows, _args_snapshot(args))
    return 0


def cmd_gains(args) -> int:
    rows = []
    for k in range(args.max_k + 1):
        if args.kind == "agility":
            b = gains.agility_gain_bounds(args.S, args.alpha, k)
        else:
            b = gains.scaling_gain_bounds(args.S, args.alpha, k)
        rows.append((k, b.lower, b.upper, b.asymptotic_k))
    _emit_csv(args, "gains", ["K", "lower", "upper", "asymptotic"], rows, _args_snapshot(args))
    return 0


def cmd_baseline(args) -> int:
    eps_grid = [float(x) for x in args.eps_exponents.split(",")]
    rows: list[tuple] = []
    if args.method in ("crossover", "cusum"):
        k_values = [] if args.method == "cusum" else [int(x) for x in args.K.split(",")]
        data = baselines.crossover_curves(
            n=args.n,
            eps_exponents=eps_grid,
            ratio_exponent=args.ratio_exponent,
            t_target=args.Tn,
            k_values=k_values,
            alpha=args.alpha,
            target_error=args.target_error,
            seed=args.seed,
            cusum_trials=args.trials,
        )
        rows = [
            (d["method"], d["epsilon_exponent"], d["mean_budget"], d["error_rate"]) for d in data
        ]
    elif args.method == "nonadaptive":
        for e in eps_grid:
            cfg = SearchConfig(
                n=args.n,
                epsilon=args.n ** (e - 1.0),
                t_target=args.Tn,
                budget_s=args.S,
                max_refines=0,
                alpha=args.alpha,
            )
            pair = VarianceTest(args.n**args.ratio_exponent, 1.0)
            report = baselines.run_nonadaptive(cfg, pair, args.trials, (args.seed, 2))
            rows.append(("nonadaptive", e, report.mean_samples, report.error_rate))
    else:  # sprt
        sprt = baselines.SprtConfig(args.target_error, args.target_error)
        for e in eps_grid:
            cfg = SearchConfig(
                n=args.n,
                epsilon=args.n ** (e - 1.0),
                t_target=args.Tn,
                budget_s=1.0,
                max_refines=0,
                alpha=args.alpha,
            )
            pair = VarianceTest(args.n**args.ratio_exponent, 1.0)
            budgets, errors = [], 0
            for trial in range(args.trials):
                result = baselines.run_repeated_sprt(
                    cfg, pair, sprt, args.Tn, (args.seed, 3, trial)
                )
                budgets.append(result.samples_used)
                errors += int(result.false_declared > 0 or not result.complete)
            rows.append(("sprt", e, float(np.mean(budgets)), errors / args.trials))
    _emit_csv(
        args,
        "baseline",
        ["method", "epsilon_exponent", "mean_budget", "error_rate"],
        rows,
        _args_snapshot(args),
    )
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master seed (default 12345)")
    p.add_argument("--out", type=str, default=None, help="CSV output path (default stdout)")
    p.add_argument("--threads", type=int, default=None, help="worker cap; results identical")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quicksearch",
        description="Budget-constrained adaptive search for rare events",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="print the budget-feasible sampling schedule")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--S", type=float, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--Tn", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("simulate", help="Monte Carlo trials from a JSON config")
    p.add_argument("config", type=str, help="JSON config file")
    p.add_argument("--trials", type=int, required=True)
    for key in _CONFIG_KEYS:
        if key == "test":
            p.add_argument("--test", type=str, default=None, choices=("mean", "variance"))
        elif key in ("n", "t_target", "max_refines"):
            p.add_argument(f"--{key}", type=int, default=None)
        else:
            p.add_argument(f"--{key}", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("region", help="detectability grid over (signal, rarity) exponents")
    p.add_argument("--test", type=str, required=True, choices=("mean", "variance"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--S", type=float, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--Tn", type=int, default=1)
    p.add_argument("--axis1-min", type=float, required=True)
    p.add_argument("--axis1-max", type=float, required=True)
    p.add_argument("--axis1-count", type=int, default=50)
    p.add_argument("--axis2-min", type=float, default=0.1)
    p.add_argument("--axis2-max", type=float, default=0.9)
    p.add_argument("--axis2-count", type=int, default=50)
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo overlay trials per cell")
    _add_common(p)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("extremes", help="empirical vs limit cdf of normalized extremes")
    p.add_argument(
        "--family", type=str, required=True, choices=("gaussian-min", "chi2-min", "chi2-max")
    )
    p.add_argument("--m", type=int, required=True, help="extreme of how many variates")
    p.add_argument("--k", type=int, default=2, help="chi-squared degrees of freedom")
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--grid-points", type=int, default=200)
    _add_common(p)
    p.set_defaults(func=cmd_extremes)

    p = sub.add_parser("gains", help="refinement gain bounds per K")
    p.add_argument("--kind", type=str, required=True, choices=("agility", "scaling"))
    p.add_argument("--S", type=float, required=True, help="reference budget")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--max-k", type=int, default=10)
    _add_common(p)
    p.set_defaults(func=cmd_gains)

    p = sub.add_parser("baseline", help="comparator budgets at a matched error target")
    p.add_argument(
        "--method",
        type=str,
        required=True,
        choices=("crossover", "cusum", "nonadaptive", "sprt"),
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps-exponents", type=str, default="0.1,0.2,0.3,0.8,0.9")
    p.add_argument("--ratio-exponent", type=float, default=0.05)
    p.add_argument("--Tn", type=int, default=1)
    p.add_argument("--K", type=str, default="0,2", help="comma list of refinement counts")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--S", type=float, default=4.0, help="budget for method=nonadaptive")
    p.add_argument("--target-error", type=float, default=1e-2)
    p.add_argument("--trials", type=int, default=40)
    _add_common(p)
    p.set_defaults(func=cmd_baseline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ScheduleInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
