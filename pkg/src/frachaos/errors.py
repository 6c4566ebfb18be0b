"""Exception and warning types shared across the package."""


class FrachaosError(Exception):
    """Base class for all package errors."""


class PoleError(FrachaosError, ValueError):
    """An argument sits on a pole of a Gamma factor or of the series."""


class NonConvergence(FrachaosError, ArithmeticError):
    """A series exhausted its term budget before meeting the tolerance."""


class DomainError(FrachaosError, ValueError):
    """An argument is outside the domain where the operation is defined."""


class GridMismatch(FrachaosError, ValueError):
    """A quadrature grid was built for a different kind or time scale."""


class NotOrthogonal(FrachaosError, ValueError):
    """An order set fails the pairwise orthogonality condition."""


class MissingDerivative(FrachaosError, ValueError):
    """A kernel lacks the derivative an operator needs."""


class DivergentIntegral(FrachaosError, ArithmeticError):
    """A quadrature does not settle as its truncation box grows."""


class TruncationWarning(UserWarning):
    """The neglected tail of a semi-infinite integral may be significant."""


class AccuracyWarning(UserWarning):
    """A result relies on finite differences with a large error estimate."""
