"""Exception types shared across the package."""


class OrdertailError(Exception):
    """Base class for all package errors."""


class DomainError(OrdertailError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class QuadratureError(OrdertailError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    ``achieved`` carries the error estimate actually reached.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class BracketingError(OrdertailError, RuntimeError):
    """A monotone root could not be bracketed within the search budget."""


class InvalidModelError(OrdertailError, ValueError):
    """A joint risk model failed validation."""


class PlanError(OrdertailError, ValueError):
    """A simulation plan violates an estimator precondition."""


class SimulationError(OrdertailError, RuntimeError):
    """A Monte Carlo run could not produce a usable estimate."""


class RejectionCapError(SimulationError):
    """Rejection sampling exceeded its iteration cap."""


class ConfigError(OrdertailError, ValueError):
    """An experiment configuration is malformed."""
