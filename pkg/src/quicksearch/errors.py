"""Shared exception types."""


class DomainError(ValueError):
    """A numeric argument lies outside the mathematically valid domain."""


class ScheduleInfeasibleError(RuntimeError):
    """No sampling schedule can satisfy the hard budget constraint."""


class ConfigError(ValueError):
    """A configuration file or flag set is malformed or inconsistent."""
