"""Exception hierarchy shared by all axiblow modules."""


class AxiblowError(Exception):
    """Base class for library errors."""


class DomainError(AxiblowError, ValueError):
    """Argument outside the admissible domain of an operation."""


class ConvergenceError(AxiblowError, ArithmeticError):
    """A series or iteration did not reach tolerance within its cap."""


class BracketError(AxiblowError):
    """Root bracket does not contain a sign change."""


class GammaPoleError(AxiblowError, ArithmeticError):
    """Gamma function evaluated at a nonpositive integer."""


class CaseMismatchError(AxiblowError, ValueError):
    """Blow-up case inconsistent with the zero pattern of the center."""


class ZeroDenominatorError(AxiblowError, ZeroDivisionError):
    """Normalizing boundary integral vanishes (field is zero near the center)."""


class IntegrandError(AxiblowError, ArithmeticError):
    """Quadrature integrand evaluated to a non-finite value."""
