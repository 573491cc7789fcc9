"""Exception types raised across the package."""


class ZonoestError(Exception):
    """Base class for all errors raised by zonoest."""


class DimensionMismatch(ZonoestError, ValueError):
    pass


class EmptyInterval(ZonoestError, ValueError):
    pass


class DivisionByIntervalContainingZero(ZonoestError, ZeroDivisionError):
    pass


class DomainError(ZonoestError, ValueError):
    """Point evaluation left the domain of an elementary function."""


class IntervalDomainError(DomainError):
    """Interval evaluation touched a point outside an elementary function's domain."""


class NumericalFailure(ZonoestError, RuntimeError):
    pass


class InfeasibleProgram(ZonoestError):
    pass


class UnboundedProgram(ZonoestError):
    pass


class EmptySet(ZonoestError):
    pass


class UnboundedPolytope(ZonoestError, ValueError):
    pass


class ExhaustiveTooLarge(ZonoestError, ValueError):
    pass


class HNotInX(ZonoestError, ValueError):
    pass


class X0NotInPrior(ZonoestError, ValueError):
    pass


class ParseError(ZonoestError, ValueError):
    pass


class ModelNotFound(ZonoestError, KeyError):
    pass


class RejectionBudgetExceeded(ZonoestError, RuntimeError):
    pass
