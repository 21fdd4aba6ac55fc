"""Evaluation of expression trees against name bindings.

Arithmetic rules: matrices add to matrices and scalars to scalars; ``*``
needs at least one scalar factor and ``/`` a scalar divisor. A scalar is
never promoted to a matrix, so a constant ``c`` next to a matrix must be
written ``c * abs2(T)`` (or ``c * eye(T)``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import matfun as mf
from ..errors import DimensionMismatch, OpvError, UnboundName
from ..funcatalog import ScalarFunction
from .ast import BinOp, Call, Inv, Name, Neg, Num, Relation, free_names, to_text
from .functions import FUNCTION, FUNCTIONS, MATRIX, SCALAR, VECTOR, Context


class DslTypeError(OpvError, TypeError):
    def __init__(self, message: str, pos: int = -1):
        self.pos = pos
        super().__init__(message)


def kind_of(value) -> str:
    if isinstance(value, ScalarFunction):
        return FUNCTION
    if isinstance(value, np.ndarray):
        if value.ndim == 2:
            return MATRIX
        if value.ndim == 1:
            return VECTOR
        if value.ndim == 0:
            return SCALAR
    if isinstance(value, (int, float, np.floating, np.integer)):
        return SCALAR
    raise DslTypeError(f"unsupported value of type {type(value).__name__}")


def _normalize(value):
    kind = kind_of(value)
    if kind == SCALAR:
        return float(value)
    if kind == MATRIX:
        return mf.as_matrix(value)
    if kind == VECTOR:
        return np.asarray(value, dtype=complex)
    return value


@dataclass(frozen=True)
class RelationVerdict:
    """Outcome of a relation chain: one verdict per adjacent pair.

    ``verdict`` is the pair with the worst margin, so the chain holds
    exactly when every link holds.
    """

    ops: tuple
    pairs: tuple  # LoewnerVerdict per link

    @property
    def worst(self) -> mf.LoewnerVerdict:
        return min(self.pairs, key=lambda v: v.margin)

    @property
    def verdict(self) -> mf.Verdict:
        return self.worst.verdict

    @property
    def min_eig(self) -> float:
        return self.worst.min_eig

    @property
    def tol(self) -> float:
        return self.worst.tol

    @property
    def margin(self) -> float:
        return self.worst.margin

    @property
    def holds(self) -> bool:
        return all(p.holds for p in self.pairs)

    def to_json(self) -> dict:
        out = self.worst.to_json()
        out["links"] = [dict(op=op, **p.to_json()) for op, p in zip(self.ops, self.pairs)]
        return out


class Evaluator:
    def __init__(self, env: dict, *, atol: float = mf.ATOL, rtol: float = mf.RTOL,
                 kappa_max: float = mf.KAPPA_MAX, nodes: int | None = None, refine: bool = False):
        self.env = {k: _normalize(v) for k, v in env.items()}
        self.atol = atol
        self.rtol = rtol
        self.refine = refine
        ctx = {"kappa_max": kappa_max}
        if nodes is not None:
            ctx["nodes"] = nodes
        self.ctx = Context(**ctx)
        self._cache: dict = {}

    def rebind(self, **values) -> None:
        """Change some bindings, keeping cached values that do not depend on them."""
        names = set(values)
        self.env.update({k: _normalize(v) for k, v in values.items()})
        self._cache = {k: v for k, v in self._cache.items() if not (free_names(k) & names)}

    def value(self, node):
        try:
            return self._cache[node]
        except KeyError:
            pass
        out = self._eval(node)
        self._cache[node] = out
        return out

    def _eval(self, node):
        if isinstance(node, Num):
            return float(node.value)
        if isinstance(node, Name):
            if node.id not in self.env:
                raise UnboundName(f"name {node.id!r} is not bound")
            return self.env[node.id]
        if isinstance(node, Neg):
            v = self.value(node.operand)
            if kind_of(v) in (MATRIX, SCALAR):
                return -v
            raise DslTypeError(f"cannot negate a {kind_of(v)}", node.pos)
        if isinstance(node, Inv):
            v = self.value(node.operand)
            k = kind_of(v)
            if k == SCALAR:
                if v == 0:
                    raise ZeroDivisionError("inverse of zero")
                return 1.0 / v
            if k == MATRIX:
                return self._guarded(node, lambda: mf.hermitian_part(np.linalg.inv(mf.as_hermitian(v))))
            raise DslTypeError(f"cannot invert a {k}", node.pos)
        if isinstance(node, BinOp):
            return self._binop(node)
        if isinstance(node, Call):
            return self._call(node)
        raise DslTypeError(f"cannot evaluate {node!r}")

    def _guarded(self, node, thunk):
        try:
            return thunk()
        except (OpvError, np.linalg.LinAlgError, ArithmeticError) as exc:
            if getattr(exc, "dsl_pos", None) is None:
                exc.dsl_pos = node.pos
                exc.dsl_expr = to_text(node)
            raise

    def _binop(self, node: BinOp):
        a = self.value(node.left)
        b = self.value(node.right)
        ka, kb = kind_of(a), kind_of(b)
        op = node.op
        if op in "+-":
            if ka != kb or ka not in (MATRIX, SCALAR):
                raise DslTypeError(f"cannot combine {ka} {op} {kb}", node.pos)
            if ka == MATRIX:
                _same_dim(a, b)
            return a + b if op == "+" else a - b
        if op == "*":
            if ka == SCALAR and kb in (MATRIX, SCALAR):
                return a * b
            if kb == SCALAR and ka == MATRIX:
                return a * b
            raise DslTypeError(f"cannot multiply {ka} * {kb}; one factor must be a scalar", node.pos)
        if op == "/":
            if kb != SCALAR or ka not in (MATRIX, SCALAR):
                raise DslTypeError(f"cannot divide {ka} / {kb}; the divisor must be a scalar", node.pos)
            if b == 0:
                raise ZeroDivisionError(f"division by zero at offset {node.pos}")
            return a / b
        raise DslTypeError(f"unknown operator {op!r}", node.pos)

    def _call(self, node: Call):
        fdef = FUNCTIONS[node.fn]
        args = [self.value(a) for a in node.args]
        for i, (want, got) in enumerate(zip(fdef.params, args)):
            k = kind_of(got)
            if k != want:
                raise DslTypeError(
                    f"argument {i + 1} of {node.fn} must be a {want}, got a {k}", node.args[i].pos
                )
        out = self._guarded(node, lambda: fdef.impl(self.ctx, *args))
        return _normalize(out)

    # relations

    def compare(self, a, b, pos: int = -1) -> mf.LoewnerVerdict:
        """Verdict for ``a >= b`` (matrices in the Loewner order, or scalars)."""
        ka, kb = kind_of(a), kind_of(b)
        if ka != kb or ka not in (MATRIX, SCALAR):
            raise DslTypeError(f"cannot compare a {ka} with a {kb}", pos)
        if ka == SCALAR:
            tol = self.atol + self.rtol * max(abs(a), abs(b))
            return mf.LoewnerVerdict.from_min_eig(a - b, tol)
        _same_dim(a, b)
        verdict = mf.loewner_compare(a, b, atol=self.atol, rtol=self.rtol)
        if self.refine and verdict.verdict is mf.Verdict.BORDERLINE:
            verdict = mf.LoewnerVerdict.from_min_eig(mf.min_eig_refined(a - b), verdict.tol)
        return verdict

    def relation(self, node: Relation) -> RelationVerdict:
        vals = [self.value(x) for x in node.operands]
        pairs = []
        for op, a, b in zip(node.ops, vals[:-1], vals[1:]):
            if op == ">=":
                pairs.append(self.compare(a, b, node.pos))
            elif op == "<=":
                pairs.append(self.compare(b, a, node.pos))
            else:
                up = self.compare(a, b, node.pos)
                down = self.compare(b, a, node.pos)
                pairs.append(min(up, down, key=lambda v: v.margin))
        return RelationVerdict(tuple(node.ops), tuple(pairs))

    def run(self, node):
        if isinstance(node, Relation):
            return self.relation(node)
        out = self.value(node)
        k = kind_of(out)
        if k == MATRIX:
            if not mf.is_hermitian(out):
                raise DslTypeError("expression does not evaluate to a Hermitian matrix")
            return mf.hermitian_part(out)
        if k == SCALAR:
            return out
        raise DslTypeError(f"expression evaluates to a {k}, expected a matrix or scalar")


def _same_dim(a, b) -> None:
    if np.shape(a) != np.shape(b):
        raise DimensionMismatch(f"dimension mismatch {np.shape(a)} vs {np.shape(b)}")


def evaluate(node, env: dict, **options):
    """Evaluate a tree: a matrix or scalar for an expression, a
    :class:`RelationVerdict` for a relation chain."""
    return Evaluator(env, **options).run(node)
