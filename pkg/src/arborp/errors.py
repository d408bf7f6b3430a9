"""Exception hierarchy.

Every error carries a message naming the violated precondition.  The CLI maps
the three families to exit codes 2 (precondition), 3 (precision or
enumeration bound exhausted) and 4 (internal invariant breach).
"""


class ArborError(Exception):
    exit_code = 4


class PreconditionError(ArborError, ValueError):
    exit_code = 2


class ResourceError(ArborError, ArithmeticError):
    exit_code = 3


class InvariantBreach(ArborError, AssertionError):
    exit_code = 4


class PrecisionExhausted(ResourceError):
    pass


class EnumerationBoundExceeded(ResourceError):
    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class NoSquareRoot(PreconditionError):
    pass


class DivisionByZero(PreconditionError, ZeroDivisionError):
    pass


class SingularMatrix(PreconditionError):
    pass


class EqualBoundaryPoints(PreconditionError):
    pass


class BadDiscriminant(PreconditionError):
    pass


class NotSplit(PreconditionError):
    pass


class NotInert(PreconditionError):
    pass


class NotSplitOrInert(PreconditionError):
    pass


class ConductorDivisibleByP(PreconditionError):
    pass


class RamifiedUnsupported(PreconditionError):
    pass


class SplitAtP(PreconditionError):
    pass


class BadGcd(PreconditionError):
    pass


class UnsupportedUnits(PreconditionError):
    pass
