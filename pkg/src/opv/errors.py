"""Exception hierarchy shared by every module."""

from __future__ import annotations


class OpvError(Exception):
    """Base class for all library errors."""


class InvalidMatrix(OpvError, ValueError):
    pass


class NonHermitian(InvalidMatrix):
    pass


class DimensionMismatch(OpvError, ValueError):
    pass


class NumericalFailure(OpvError, ArithmeticError):
    pass


class SpectrumOutOfDomain(OpvError, ValueError):
    def __init__(self, offending, dom=None):
        self.offending = list(offending)
        self.dom = dom
        where = f" outside {dom}" if dom is not None else ""
        super().__init__(f"eigenvalues {self.offending}{where}")


class SingularT(OpvError, ArithmeticError):
    pass


class SingularV(OpvError, ArithmeticError):
    pass


class NotPositiveDefinite(OpvError, ValueError):
    pass


class WeightOutOfRange(OpvError, ValueError):
    pass


class ZeroParameter(OpvError, ValueError):
    pass


class NonPositiveInput(OpvError, ValueError):
    pass


class UnknownFunction(OpvError, KeyError):
    def __str__(self):  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class InvalidParameter(OpvError, ValueError):
    pass


class DomainViolation(OpvError, ValueError):
    pass


class AnchorOutOfDomain(DomainViolation):
    pass


class NotDifferentiable(OpvError, ValueError):
    pass


class ZeroVector(OpvError, ValueError):
    pass


class GenerationExhausted(OpvError, RuntimeError):
    pass


class UnboundName(OpvError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class RequirementViolated(OpvError, ValueError):
    pass


class UnknownRecord(OpvError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""
