"""Exception types shared across the package."""


class StragmitError(Exception):
    """Base class for all library-specific errors."""


class DomainError(StragmitError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested at a pole of the Gamma function."""


class DivergenceError(DomainError):
    """A requested integral diverges at an endpoint."""


class DegenerateError(DomainError):
    """A ratio or fit is degenerate (zero denominator, all-equal samples)."""


class InfiniteMomentError(DomainError):
    """A moment does not exist for the given tail index."""


class UnsupportedPolicyError(StragmitError):
    """No closed form is available for this policy; use the Monte-Carlo path."""


class ConvergenceError(StragmitError, RuntimeError):
    """A numerical solver failed to converge or bracket a root."""


class InstabilityError(StragmitError, RuntimeError):
    """The simulated cluster exceeded its backlog threshold.

    Carries a ``report`` dict with the state observed at termination.
    """

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}
