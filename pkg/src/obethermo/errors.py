"""Exception hierarchy. Every numerical failure is loud, none are silently patched."""


class ObeThermoError(Exception):
    """Base class for library errors."""


class DomainError(ObeThermoError, ValueError):
    """Argument outside the domain of a formula (e.g. T <= 0)."""


class StateError(ObeThermoError, ValueError):
    """Matrix fails the density-matrix checks."""


class FrameError(ObeThermoError):
    """Lab-frame and rotating-frame objects were mixed."""


class DegenerateBasisError(ObeThermoError):
    """Dressed basis undefined because g = delta = 0."""


class OutOfModelError(ObeThermoError):
    """Parameters outside the range where a generator is defined."""


class NonUniqueSteadyStateError(ObeThermoError):
    """Liouvillian kernel is not one-dimensional."""


class IntegrationError(ObeThermoError):
    """Time integration failed or drifted beyond tolerance."""


class PositivityError(IntegrationError):
    """An evolved state acquired eigenvalues below the positivity tolerance."""


class TruncationError(ObeThermoError):
    """Fock truncation too small or leaking weight."""


class QuadratureError(ObeThermoError):
    """Numerical integral failed to converge."""

    def __init__(self, msg, estimate=None, error=None):
        super().__init__(msg)
        self.estimate = estimate
        self.error = error


class ConfigError(ObeThermoError):
    """Bad configuration file or override."""
