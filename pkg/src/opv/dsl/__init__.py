"""Expression language for operator inequalities."""

from .ast import free_names, print_canonical
from .evaluator import DslTypeError, Evaluator, RelationVerdict, evaluate
from .functions import FUNCTIONS
from .parser import ArityMismatch, DslError, DslSyntaxError, DslUnknownFunction, parse, parse_expr

__all__ = [
    "ArityMismatch",
    "DslError",
    "DslSyntaxError",
    "DslTypeError",
    "DslUnknownFunction",
    "Evaluator",
    "FUNCTIONS",
    "RelationVerdict",
    "evaluate",
    "free_names",
    "parse",
    "parse_expr",
    "print_canonical",
]
