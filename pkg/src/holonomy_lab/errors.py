class HolonomyLabError(Exception):
    """Base class for library errors."""


class SingularMetricError(HolonomyLabError):
    """The metric is not positive definite at the requested point."""


class TransportError(HolonomyLabError):
    """An ODE solve could not meet its accuracy or unitarity targets."""


class IllConditionedFitError(HolonomyLabError):
    """The kernel-fit design matrix is too ill-conditioned to trust."""


class UnknownNameError(HolonomyLabError, KeyError):
    """A builtin name did not resolve; the message lists valid options."""

    def __init__(self, kind, name, options):
        self.kind, self.name, self.options = kind, name, tuple(options)
        super().__init__(f"unknown {kind} {name!r}; valid options: {', '.join(self.options)}")

    def __str__(self):
        return self.args[0]


class ConfigError(HolonomyLabError):
    """Config file could not be parsed or resolved."""


class NoiseFloorWarning(UserWarning):
    """Richardson residual of a finite-difference estimate exceeds the request."""


class DivergenceWarning(UserWarning):
    """Truncated action integral has a large tail estimate."""
