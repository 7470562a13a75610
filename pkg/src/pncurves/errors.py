"""Exception hierarchy shared by all modules."""


class PnCurvesError(Exception):
    """Base class for every error raised by this package."""


class PresentationMismatch(PnCurvesError, ValueError):
    """Operands live in different quotient rings, or a name is unknown."""


class UnsupportedOperation(PnCurvesError, ValueError):
    pass


class UndecidableHere(PnCurvesError, ValueError):
    """The question needs a finite-rank ring but the element involves free variables."""


class NotInvertible(PnCurvesError, ArithmeticError):
    pass


class OutOfDomain(PnCurvesError, ValueError):
    pass


class ResourceBudgetExceeded(PnCurvesError, MemoryError):
    pass


class ConsistencyError(PnCurvesError, AssertionError):
    """An internal identity that must hold did not; signals a bug."""


class NotNumericalSemigroup(PnCurvesError, ValueError):
    pass


class GluingHypothesisError(PnCurvesError, ValueError):
    pass


class ExtensionViolation(PnCurvesError, ValueError):
    pass
