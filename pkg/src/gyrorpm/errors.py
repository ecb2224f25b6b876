"""Exception hierarchy shared across the package.

Two families matter for the CLI exit codes: bad inputs (exit code 2)
and numerical failures encountered mid-computation (exit code 1).
"""


class GyrostatError(Exception):
    """Base class for all package errors."""


class InvalidInputError(GyrostatError):
    """Input outside the documented domain of an operation."""


class NumericalError(GyrostatError):
    """A numerical procedure failed to converge or broke down."""


class NonGenericParamsError(InvalidInputError):
    """Parameters violate the genericity assumptions (distinct inverse
    inertias, gyrostatic moment off all principal planes)."""


class PoleError(InvalidInputError):
    """Curve parameter hit one of the inverse-inertia poles."""


class OutOfRangeError(InvalidInputError):
    """Requested value lies outside a branch image."""


class DomainError(InvalidInputError):
    """A square-root factor left its domain.

    `factor` names the offending part: "numerator" or "denominator".
    """

    def __init__(self, factor, message):
        super().__init__(message)
        self.factor = factor


class NonMonotoneError(NumericalError):
    """Branch inversion pre-scan found a non-monotone parametrization."""


class StepFailure(NumericalError):
    """Adaptive integrator step size underflowed.

    `t` is the time at which the step controller gave up.
    """

    def __init__(self, t, message=None):
        super().__init__(message or f"step size underflow at t={t}")
        self.t = t


class SolveFailure(NumericalError):
    """Root polishing diverged for a candidate fiber solution."""


class EmptyLevelError(NumericalError):
    """No seed converged onto the requested level set."""


class TraceStall(NumericalError):
    """Curve tracing stalled (degenerate tangent or budget exhausted)."""
