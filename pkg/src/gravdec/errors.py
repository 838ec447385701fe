"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: configuration problems exit with 2,
numerical or validity failures with 3 and out-of-range physics with 4.
"""


class GravdecError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class ConfigurationError(GravdecError, ValueError):
    exit_code = 2


class DomainError(GravdecError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResourceError(GravdecError):
    """A request would exceed the configured memory budget."""


class NumericalError(GravdecError, ArithmeticError):
    """Quadrature or iteration failed to converge."""


class LightConeError(NumericalError):
    """Pointwise kernel evaluation requested inside the light-cone guard band."""


class DivergenceError(NumericalError):
    """The requested quantity is UV divergent (e.g. equal-point equal-time variance)."""


class RegularizationError(GravdecError, ValueError):
    """A point-like density needs a finite size for this model."""


class PerturbativityError(GravdecError):
    """The metric perturbation left the regime |gamma| < 1."""


class StabilityError(GravdecError, ValueError):
    """Time step violates the integrator stability precondition."""


class OutOfRangeError(GravdecError):
    """A physical root could not be bracketed inside the configured range."""

    exit_code = 4
