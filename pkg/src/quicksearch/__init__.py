"""Budget-constrained adaptive search for rare events among many observation streams."""

from .errors import ConfigError, DomainError, ScheduleInfeasibleError
from .model import (
    HypothesisPair,
    MeanTest,
    SufficientStat,
    VarianceTest,
    log_likelihood_ratio,
    ordering_statistic,
    posterior_rare,
    sample_increment,
)
from .policy import Schedule, SearchConfig, build_schedule
from .engine import MonteCarloReport, TrialOutcome, monte_carlo, run_trial

__all__ = [
    "ConfigError",
    "DomainError",
    "ScheduleInfeasibleError",
    "HypothesisPair",
    "MeanTest",
    "VarianceTest",
    "SufficientStat",
    "sample_increment",
    "log_likelihood_ratio",
    "posterior_rare",
    "ordering_statistic",
    "SearchConfig",
    "Schedule",
    "build_schedule",
    "TrialOutcome",
    "MonteCarloReport",
    "run_trial",
    "monte_carlo",
]

__version__ = "0.1.0"
