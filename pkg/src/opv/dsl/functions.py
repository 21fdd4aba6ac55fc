"""Registry of the functions callable from DSL text.

Values flowing through the evaluator are square matrices (2-D arrays),
real scalars (floats), vectors (1-D arrays) and scalar functions
(:class:`~opv.funcatalog.ScalarFunction`). Each registered function
declares its arity and the kind of every argument; the evaluator checks
kinds before calling the implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import bounds as bd
from .. import funcatalog as fc
from .. import matfun as mf
from .. import perspectives as ps
from ..errors import DomainViolation, NonPositiveInput

MATRIX = "matrix"
SCALAR = "scalar"
VECTOR = "vector"
FUNCTION = "function"


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple  # kinds of the arguments
    returns: str
    impl: Callable
    doc: str = ""

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class Context:
    kappa_max: float = mf.KAPPA_MAX
    nodes: int = bd.DEFAULT_NODES


FUNCTIONS: dict[str, FunctionDef] = {}


def _register(name, params, returns, doc=""):
    def deco(impl):
        FUNCTIONS[name] = FunctionDef(name, tuple(params), returns, impl, doc)
        return impl

    return deco


M, S, F, X = MATRIX, SCALAR, FUNCTION, VECTOR

# matrix-valued


@_register("abs2", [M], M, "|T|^2 = T* T")
def _abs2(ctx, t):
    return mf.abs2(t)


@_register("nabla", [M, M, S], M, "weighted arithmetic mean")
def _nabla(ctx, a, b, nu):
    return ps.arith_mean(a, b, nu)


@_register("sharp", [M, M, S], M, "weighted geometric mean")
def _sharp(ctx, a, b, nu):
    return ps.geo_mean(a, b, nu)


@_register("bang", [M, M, S], M, "weighted harmonic mean")
def _bang(ctx, a, b, nu):
    return ps.harm_mean(a, b, nu)


@_register("geoQ", [M, M, S], M, "quadratic geometric mean T* |V T^-1|^(2 nu) T")
def _geoq(ctx, t, v, nu):
    return ps.quad_geo_mean(t, v, nu, ctx.kappa_max)


@_register("geoQmod", [M, M, S], M, "quadratic geometric mean through ||V T^-1|^nu T|^2")
def _geoq_mod(ctx, t, v, nu):
    return ps.quad_geo_mean_modulus_form(t, v, nu, ctx.kappa_max)


@_register("S", [M, M], M, "relative operator entropy S(A|B)")
def _s(ctx, a, b):
    return ps.rel_entropy(a, b)


@_register("entQ", [M, M], M, "quadratic relative entropy T* ln(|V T^-1|^2) T")
def _entq(ctx, t, v):
    return ps.quad_rel_entropy(t, v, ctx.kappa_max)


@_register("tsallisQ", [M, M, S], M, "quadratic Tsallis entropy T* T_t(|V T^-1|^2) T")
def _tsallisq(ctx, t, v, tt):
    return ps.quad_tsallis(t, v, tt, ctx.kappa_max)


@_register("persp", [F, M, M], M, "perspective A^1/2 f(A^-1/2 B A^-1/2) A^1/2 of f at (B, A)")
def _persp(ctx, f, b, a):
    return ps.perspective(f, b, a)


@_register("perspQ", [F, M, M], M, "quadratic perspective T* f(|V T^-1|^2) T")
def _perspq(ctx, f, t, v):
    return ps.quad_perspective(f, t, v, ctx.kappa_max)


@_register("absPersp", [M, M, S], M, "T* |(T*)^-1 (|V|^2 - s|T|^2) T^-1| T")
def _abspersp(ctx, t, v, s):
    return ps.abs_perspective(t, v, s, ctx.kappa_max)


@_register("absPerspInner", [M, M, S], M, "T* ||V T^-1|^2 - s| T")
def _abspersp_inner(ctx, t, v, s):
    return ps.abs_perspective_inner_form(t, v, s, ctx.kappa_max)


@_register("absPerspMean", [M, M, S, S], M, "average of absPersp(T, V, s) over s in [a, b]")
def _abspersp_mean(ctx, t, v, a, b):
    return bd.abs_perspective_mean(t, v, a, b, ctx.nodes, ctx.kappa_max)


@_register("fapply", [F, M], M, "functional calculus f(X) for Hermitian X")
def _fapply(ctx, f, x):
    return mf.apply_fun(x, f.eval, f.dom)


@_register("sandwich", [M, M], M, "X Y X")
def _sandwich(ctx, x, y):
    xm = mf.as_hermitian(x)
    return mf.hermitian_part(xm @ mf.as_hermitian(y) @ xm)


@_register("invadj", [M], M, "(T*)^-1, the inverse of the adjoint")
def _invadj(ctx, t):
    tm = mf.check_invertible(t, ctx.kappa_max)
    return np.linalg.inv(tm.conj().T)


@_register("eye", [M], M, "identity matrix of the same size as the argument")
def _eye(ctx, x):
    return np.eye(np.shape(x)[0], dtype=complex)


# scalar-valued


def _real(x) -> float:
    return float(np.real(x))


def _check_positive(x) -> None:
    if not x > 0:
        raise NonPositiveInput(f"expected a positive argument, got {x}")


@_register("Lp", [S, S, S], S, "generalized logarithmic mean")
def _lp(ctx, x, y, p):
    return fc.p_log_mean(x, y, p)


@_register("identric", [S, S], S, "identric mean")
def _identric(ctx, x, y):
    return fc.identric(x, y)


@_register("logmean", [S, S], S, "logarithmic mean")
def _logmean(ctx, x, y):
    return fc.log_mean(x, y)


@_register("ln", [S], S, "natural logarithm of a positive scalar")
def _ln(ctx, x):
    _check_positive(x)
    return math.log(x)


@_register("exp", [S], S, "exponential of a scalar")
def _exp(ctx, x):
    return math.exp(x)


@_register("rpow", [S, S], S, "x^p for positive x")
def _rpow(ctx, x, p):
    _check_positive(x)
    return float(x) ** float(p)


@_register("Tt", [S, S], S, "Tsallis map (x^t - 1)/t")
def _tt(ctx, x, t):
    return fc.t_fun(x, t)


@_register("qf", [M, X], S, "quadratic form <X x, x>")
def _qf(ctx, a, x):
    return _real(np.vdot(x, mf.as_hermitian(a) @ x))


@_register("fval", [F, S], S, "f(x) for a scalar x")
def _fval(ctx, f, x):
    if not f.dom.contains(x):
        raise DomainViolation(f"{x} outside the domain {f.dom} of {f.name}")
    return _real(f(float(x)))


@_register("imean", [F, S, S], S, "integral mean of f over [a, b]")
def _imean(ctx, f, a, b):
    return fc.integral_mean(f, a, b)


# function-valued


@_register("fder", [F], F, "derivative f'")
def _fder(ctx, f):
    return fc.derivative_of(f)


@_register("fderl", [F], F, "s -> s f'(s)")
def _fderl(ctx, f):
    return fc.derivative_times_identity(f)


@_register("fsub", [F], F, "the subgradient selection of f")
def _fsub(ctx, f):
    return fc.ScalarFunction(f"fsub({f.name})", f.dom, f.subgrad)


@_register("fneg", [F], F, "-f")
def _fneg(ctx, f):
    return fc.negate(f)


def _catalog_builder(cid: str):
    arity = fc.catalog_arity(cid)

    def impl(ctx, *params):
        return fc.make_catalog_function(cid, params)

    FUNCTIONS[cid] = FunctionDef(cid, (S,) * arity, F, impl, f"catalog function {cid}")


for _cid in fc.CATALOG_IDS:
    _catalog_builder(_cid)
