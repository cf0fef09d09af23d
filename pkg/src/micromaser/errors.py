"""Exception hierarchy shared by all micromaser modules."""


class MicromaserError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(MicromaserError, ValueError):
    """A parameter violates its documented range."""


class DomainError(MicromaserError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NoMaserBranchError(DomainError):
    """No saddle-point branch exists (a <= 1/2 or |Delta| too large)."""


class NoTransitionError(MicromaserError):
    """The requested critical point does not exist for these parameters."""


class NoCrossingError(NoTransitionError):
    """Two maser branches do not meet at a common global minimum."""


class DivergenceError(MicromaserError):
    """A geometric series or closed form diverges (e.g. thermal form above threshold)."""


class TruncationError(MicromaserError):
    """The photon-number truncation could not be made accurate enough."""


class QuadratureError(MicromaserError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class QuadratureSingularityError(QuadratureError):
    """The integrand has a non-removable singularity inside the interval."""


class ThermalPhaseError(MicromaserError):
    """No maser minimum exists; use the thermal distribution instead."""


class NoBarrierError(MicromaserError):
    """Fewer than two competing minima, so there is no barrier to cross."""


class ConfigError(MicromaserError):
    """Malformed sweep configuration.

    Parameters
    ----------
    message : str
        What went wrong.
    line : int, optional
        1-based line number in the configuration text.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
