"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Bad user input: unknown environment, malformed model file, invalid counts."""


class InvariantViolation(RuntimeError):
    """An internal consistency guarantee failed (bad row sums, infeasible intervals, ...)."""


class InfeasibleRow(InvariantViolation):
    """An interval row admits no probability distribution (sum(lb) > 1 or sum(ub) < 1)."""


class Infeasible(InvariantViolation):
    """Linear program has no feasible point."""


class Unbounded(InvariantViolation):
    """Linear program objective is unbounded."""


class ScaleExceeded(ConfigError):
    """Full mechanism enumeration was requested beyond its supported size."""
