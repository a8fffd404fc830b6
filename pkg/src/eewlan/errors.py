class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class WarmupError(RuntimeError):
    """Cumulative counters are not yet positive, so the slot weights are undefined."""


class InvariantViolation(AssertionError):
    """A computed result broke an invariant that should hold by construction."""


class ConfigError(DomainError):
    """An experiment configuration file is malformed or inconsistent."""
