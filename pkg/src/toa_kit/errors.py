"""Exception hierarchy shared across the package.

Numerical failure modes carry the best available partial result where one
exists (see ``ToleranceNotMet.result``), so callers can degrade gracefully
instead of re-running.
"""


class ToaKitError(Exception):
    """Base class for all toa-kit errors."""


class DomainError(ToaKitError):
    """Input outside the operation's mathematical domain."""


class PoleError(DomainError):
    """Evaluation requested at a pole of the gamma function."""


class ParameterPole(DomainError):
    """Lower hypergeometric parameter is a nonpositive integer."""


class ConvergenceError(ToaKitError):
    """No evaluation regime reached the requested accuracy.

    ``report`` holds the best attempt, including its honest error estimate.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NormalizabilityError(DomainError):
    """State requested with Im(tau) <= 0, which is not normalizable."""


class QuadratureError(ToaKitError):
    """Base for integration failures; ``result`` is the best estimate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ToleranceNotMet(QuadratureError):
    """Panel budget exhausted before the error target was reached."""


class DepthExceeded(QuadratureError):
    """Bisection depth limit hit on a panel that still dominates the error."""


class TailModelError(QuadratureError):
    """Fitted tail model disagrees with the integrand beyond tolerance."""


class StencilError(ToaKitError):
    """Finite-difference stencil malformed (wrong length or step)."""


class PeakNotFound(ToaKitError):
    """Density is flat within tolerance; no peak to report."""


class NonMonotoneError(ToaKitError):
    """Interval masses move against the predicted limit."""


class ConfigError(ToaKitError):
    """Invalid run configuration."""
