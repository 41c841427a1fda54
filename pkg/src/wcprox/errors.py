"""Exception hierarchy shared by all modules."""


class WCProxError(Exception):
    """Base class for every error raised by :mod:`wcprox`."""


class ConfigurationError(WCProxError, ValueError):
    """Malformed problem, region or experiment configuration."""


class ParameterError(WCProxError, ValueError):
    """A numeric parameter violates its admissible range."""


class ScheduleError(ParameterError):
    """A step-size schedule violates ``0 < λ̄ < 2γ < λ < 1/ρ``."""


class InstanceError(WCProxError):
    """A problem oracle returned something unusable (non-finite subgradient, ...)."""


class OutsideDomainError(InstanceError):
    """An oracle was queried outside the problem region."""


class UnsupportedDimensionError(WCProxError, ValueError):
    pass


class NonconvergenceError(WCProxError):
    """An iterative solver stopped before reaching its tolerance.

    The best iterate and its residual are kept so callers can report them.
    """

    def __init__(self, message, best=None, residual=None, iterations=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


class LocalityError(WCProxError):
    """An iterate left the ball on which the local theory applies."""

    def __init__(self, message, point=None, distance=None, radius=None):
        super().__init__(message)
        self.point = point
        self.distance = distance
        self.radius = radius


class PreconditionError(WCProxError, ValueError):
    pass
