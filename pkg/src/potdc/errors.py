"""Exception types shared across the package."""


class PotdcError(Exception):
    """Base class for all library errors."""


class InvalidInput(PotdcError, ValueError):
    """Input violates a documented precondition."""


class NotPositiveSemidefinite(InvalidInput):
    """Matrix has an eigenvalue too far below zero to be treated as PSD."""


class ConfigError(PotdcError):
    """Experiment configuration is malformed; message names the field."""


class Infeasible(PotdcError):
    """The optimization problem (or a subproblem) has no feasible point."""


class BranchError(PotdcError):
    """A closed-form branch condition does not hold for the given inputs."""


class RecoveryError(PotdcError):
    """Rank-one primal recovery failed to meet the constraint residual tolerance."""
