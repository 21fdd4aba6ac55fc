"""Expression tree and canonical printer.

Source offsets are carried on every node for error reporting but take no
part in equality, so two trees parsed from differently spaced text compare
equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

REL_OPS = ("<=", ">=", "==")


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = field(default=-1, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"numeric literals are finite and unsigned, got {self.value!r}")


@dataclass(frozen=True)
class Name:
    id: str
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: Expr
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: Expr
    right: Expr
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Inv:
    operand: Expr
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Relation:
    """A chain ``e0 op0 e1 op1 e2 ...``; only ever the root of a tree."""

    ops: tuple
    operands: tuple
    pos: int = field(default=-1, compare=False)

    def __post_init__(self):
        if len(self.operands) != len(self.ops) + 1 or not self.ops:
            raise ValueError("relation needs n operands and n - 1 >= 1 operators")
        if any(op not in REL_OPS for op in self.ops):
            raise ValueError(f"unknown relation in {self.ops}")


Expr = Union[Num, Name, Call, Neg, BinOp, Inv]
Node = Union[Expr, Relation]

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Relation):
        return 0
    return 4


def format_number(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def to_text(node: Node) -> str:
    """Canonical text with the minimum parentheses needed to reparse ``node``."""
    if isinstance(node, Num):
        return format_number(node.value)
    if isinstance(node, Name):
        return node.id
    if isinstance(node, Call):
        return f"{node.fn}({', '.join(to_text(a) for a in node.args)})"
    if isinstance(node, Inv):
        return f"inv({to_text(node.operand)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        return f"-({inner})" if _prec(node.operand) < 3 else f"-{inner}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = to_text(node.left)
        right = to_text(node.right)
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    if isinstance(node, Relation):
        parts = [to_text(node.operands[0])]
        for op, operand in zip(node.ops, node.operands[1:]):
            parts.append(f"{op} {to_text(operand)}")
        return " ".join(parts)
    raise TypeError(f"not an expression node: {node!r}")


def print_canonical(node: Node) -> str:
    return to_text(node)


def free_names(node: Node) -> set[str]:
    if isinstance(node, Name):
        return {node.id}
    if isinstance(node, Num):
        return set()
    children = ()
    if isinstance(node, Call):
        children = node.args
    elif isinstance(node, (Neg, Inv)):
        children = (node.operand,)
    elif isinstance(node, BinOp):
        children = (node.left, node.right)
    elif isinstance(node, Relation):
        children = node.operands
    out: set[str] = set()
    for c in children:
        out |= free_names(c)
    return out
