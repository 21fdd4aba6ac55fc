"""Scalar convex/concave functions, their subgradients, and scalar means.

Every catalog entry is a :class:`ConvexFunctionSpec`. Functions derived
from a catalog entry (its derivative, ``s -> s * f'(s)``, its negation)
are plain :class:`ScalarFunction` objects: they carry a domain and a
vectorized evaluator, which is all the functional calculus needs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DomainViolation,
    InvalidParameter,
    NonPositiveInput,
    NotDifferentiable,
    UnknownFunction,
    ZeroParameter,
)
from .matfun import Interval

POSITIVE = Interval(0.0, np.inf)
NONNEGATIVE = Interval(0.0, np.inf, lo_closed=True)
REAL_LINE = Interval()

_SINGULAR_P = 1e-6


@dataclass(frozen=True)
class ScalarFunction:
    name: str
    dom: Interval
    eval: Callable[[np.ndarray], np.ndarray] = field(compare=False)

    def __call__(self, x):
        return self.eval(x)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ConvexFunctionSpec(ScalarFunction):
    """A convex (or concave) function with its first-order data.

    ``subgrad`` is a selection from the subdifferential of the convex
    function (the superdifferential when ``convexity == "concave"``).
    """

    subgrad: Callable = field(default=None, compare=False)
    left_deriv: Callable = field(default=None, compare=False)
    right_deriv: Callable = field(default=None, compare=False)
    deriv: Callable | None = field(default=None, compare=False)
    antideriv: Callable | None = field(default=None, compare=False)
    convexity: str = "convex"

    @property
    def is_convex(self) -> bool:
        return self.convexity == "convex"

    def negated(self) -> ConvexFunctionSpec:
        neg = lambda g: (None if g is None else (lambda x: -g(x)))  # noqa: E731
        return ConvexFunctionSpec(
            name=negated_name(self.name),
            dom=self.dom,
            eval=neg(self.eval),
            subgrad=neg(self.subgrad),
            left_deriv=neg(self.right_deriv),
            right_deriv=neg(self.left_deriv),
            deriv=neg(self.deriv),
            antideriv=neg(self.antideriv),
            convexity="concave" if self.is_convex else "convex",
        )


def negated_name(name: str) -> str:
    return name[len("fneg(") : -1] if name.startswith("fneg(") else f"fneg({name})"


def _spec(name, dom, f, df, antideriv, convexity) -> ConvexFunctionSpec:
    return ConvexFunctionSpec(
        name=name,
        dom=dom,
        eval=f,
        subgrad=df,
        left_deriv=df,
        right_deriv=df,
        deriv=df,
        antideriv=antideriv,
        convexity=convexity,
    )


def _fmt(p: float) -> str:
    p = float(p)
    return str(int(p)) if p.is_integer() and abs(p) < 1e15 else repr(p)


def _pow(p: float) -> ConvexFunctionSpec:
    dom = NONNEGATIVE if p >= 0 else POSITIVE
    if p == -1:
        anti = np.log
    else:
        anti = lambda x: np.power(x, p + 1) / (p + 1)  # noqa: E731
    convexity = "convex" if (p <= 0 or p >= 1) else "concave"
    return _spec(
        f"pow({_fmt(p)})",
        dom,
        lambda x: np.power(x, p),
        lambda x: p * np.power(x, p - 1),
        anti,
        convexity,
    )


def _neg_pow(nu: float) -> ConvexFunctionSpec:
    if not 0.0 <= nu <= 1.0:
        raise InvalidParameter(f"neg_pow needs nu in [0, 1], got {nu}")
    # nu in {0, 1} gives an affine function, convex either way
    return _rename(_pow(nu).negated(), f"neg_pow({_fmt(nu)})", "convex")


def _rename(spec: ConvexFunctionSpec, name: str, convexity: str) -> ConvexFunctionSpec:
    return ConvexFunctionSpec(
        name=name,
        dom=spec.dom,
        eval=spec.eval,
        subgrad=spec.subgrad,
        left_deriv=spec.left_deriv,
        right_deriv=spec.right_deriv,
        deriv=spec.deriv,
        antideriv=spec.antideriv,
        convexity=convexity,
    )


def _log() -> ConvexFunctionSpec:
    return _spec(
        "log()",
        POSITIVE,
        np.log,
        lambda x: 1.0 / x,
        lambda x: x * np.log(x) - x,
        "concave",
    )


def _neg_log() -> ConvexFunctionSpec:
    return _rename(_log().negated(), "neg_log()", "convex")


def _tsallis(t: float) -> ConvexFunctionSpec:
    if t == 0:
        raise ZeroParameter("tsallis needs t != 0")
    if t == -1:
        anti = lambda x: (np.log(x) - x) / t  # noqa: E731
    else:
        anti = lambda x: (np.power(x, t + 1) / (t + 1) - x) / t  # noqa: E731
    # second derivative (t - 1) x^(t - 2)
    convexity = "convex" if t >= 1 else "concave"
    return _spec(
        f"tsallis({_fmt(t)})",
        NONNEGATIVE if t > 0 else POSITIVE,
        lambda x: np.expm1(t * np.log(x)) / t,
        lambda x: np.power(x, t - 1),
        anti,
        convexity,
    )


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x == 0.0, 0.0, x * np.log(np.where(x == 0.0, 1.0, x)))


def _xlogx_spec() -> ConvexFunctionSpec:
    return _spec(
        "xlogx()",
        POSITIVE,
        _xlogx,
        lambda x: np.log(x) + 1.0,
        lambda x: x * x * np.log(x) / 2 - x * x / 4,
        "convex",
    )


def _identity() -> ConvexFunctionSpec:
    return _spec(
        "identity()",
        REAL_LINE,
        lambda x: np.asarray(x, dtype=float) * 1.0,
        lambda x: np.ones_like(np.asarray(x, dtype=float)),
        lambda x: np.asarray(x, dtype=float) ** 2 / 2,
        "convex",
    )


_BUILDERS: dict[str, tuple[int, Callable[..., ConvexFunctionSpec]]] = {
    "pow": (1, _pow),
    "neg_pow": (1, _neg_pow),
    "neg_log": (0, _neg_log),
    "log": (0, _log),
    "tsallis": (1, _tsallis),
    "xlogx": (0, _xlogx_spec),
    "identity": (0, _identity),
}

CATALOG_IDS = tuple(_BUILDERS)


def catalog_arity(id: str) -> int:
    try:
        return _BUILDERS[id][0]
    except KeyError:
        raise UnknownFunction(f"unknown catalog function {id!r}") from None


def make_catalog_function(id: str, params=()) -> ConvexFunctionSpec:
    """Build a catalog function, e.g. ``make_catalog_function("pow", [2])``."""
    arity = catalog_arity(id)
    params = [float(p) for p in params]
    if len(params) != arity:
        raise InvalidParameter(f"{id} takes {arity} parameter(s), got {len(params)}")
    if not all(math.isfinite(p) for p in params):
        raise InvalidParameter(f"{id} parameters must be finite")
    return _BUILDERS[id][1](*params)


_NAME_RE = re.compile(r"^\s*(\w+)\s*(?:\(\s*([^()]*?)\s*\))?\s*$")


def parse_function_name(text: str) -> ConvexFunctionSpec:
    """Parse ``"pow(2)"``, ``"neg_log()"`` or ``"neg_log"`` into a catalog function."""
    m = _NAME_RE.match(text)
    if not m:
        raise UnknownFunction(f"cannot parse function name {text!r}")
    args = [a for a in (m.group(2) or "").split(",") if a.strip()]
    try:
        params = [float(a) for a in args]
    except ValueError:
        raise InvalidParameter(f"non-numeric parameter in {text!r}") from None
    return make_catalog_function(m.group(1), params)


def derivative_of(f: ConvexFunctionSpec) -> ScalarFunction:
    if f.deriv is None:
        raise NotDifferentiable(f"{f.name} has no continuous derivative")
    return ScalarFunction(f"fder({f.name})", f.dom, f.deriv)


def derivative_times_identity(f: ConvexFunctionSpec) -> ScalarFunction:
    """``s -> s * f'(s)``."""
    d = derivative_of(f).eval
    return ScalarFunction(f"fderl({f.name})", f.dom, lambda x: np.asarray(x, dtype=float) * d(x))


def negate(f: ScalarFunction) -> ScalarFunction:
    if isinstance(f, ConvexFunctionSpec):
        return f.negated()
    g = f.eval
    return ScalarFunction(negated_name(f.name), f.dom, lambda x: -g(x))


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    atol: float = 1e-12,
    rtol: float = 1e-10,
    max_depth: int = 40,
) -> float:
    """Adaptive Simpson quadrature of a scalar function over ``[a, b]``."""

    def simpson(fa, fm, fb, h):
        return h * (fa + 4 * fm + fb) / 6

    fa, fb = f(a), f(b)
    m = (a + b) / 2
    fm = f(m)
    whole = simpson(fa, fm, fb, b - a)
    tol = max(atol, rtol * abs(whole))

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = (a + b) / 2
        lm, rm = (a + m) / 2, (m + b) / 2
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15 * tol:
            return left + right + delta / 15
        return recurse(a, m, fa, flm, fm, left, tol / 2, depth - 1) + recurse(
            m, b, fm, frm, fb, right, tol / 2, depth - 1
        )

    return recurse(a, b, fa, fm, fb, whole, tol, max_depth)


def integral_mean(f: ScalarFunction, a: float, b: float) -> float:
    """``(1/(b - a)) * integral of f over [a, b]``."""
    if not a < b:
        raise DomainViolation(f"need a < b, got [{a}, {b}]")
    if not (f.dom.contains(a) and f.dom.contains(b)):
        raise DomainViolation(f"[{a}, {b}] not inside the domain {f.dom} of {f.name}")
    anti = getattr(f, "antideriv", None)
    if anti is not None:
        return float((anti(b) - anti(a)) / (b - a))
    g = lambda s: float(f(s))  # noqa: E731
    return adaptive_simpson(g, a, b) / (b - a)


def _check_positive(*xs) -> None:
    for x in xs:
        if not x > 0:
            raise NonPositiveInput(f"means need positive arguments, got {x}")


def identric(x: float, y: float) -> float:
    """Identric mean ``(1/e) (y^y / x^x)^(1/(y - x))``; equal arguments give ``x``."""
    _check_positive(x, y)
    if x == y:
        return float(x)
    lo, hi = min(x, y), max(x, y)
    h = hi / lo - 1.0
    # ln I = ln lo + (1 + h) ln(1 + h) / h - 1, stable as h -> 0
    return float(lo * math.exp((1.0 + h) * math.log1p(h) / h - 1.0))


def log_mean(x: float, y: float) -> float:
    """Logarithmic mean ``(y - x) / (ln y - ln x)``; equal arguments give ``x``."""
    _check_positive(x, y)
    if x == y:
        return float(x)
    lo, hi = min(x, y), max(x, y)
    h = hi / lo - 1.0
    return float(lo * h / math.log1p(h))


def p_log_mean(x: float, y: float, p: float) -> float:
    """Generalized logarithmic mean ``L_p(x, y)`` with its continuous extensions."""
    _check_positive(x, y)
    if x == y:
        return float(x)
    if abs(p) < _SINGULAR_P:
        return identric(x, y)
    if abs(p + 1) < _SINGULAR_P:
        return log_mean(x, y)
    lo, hi = min(x, y), max(x, y)
    u = math.log(hi / lo)
    ratio = math.expm1((p + 1) * u) / ((p + 1) * math.expm1(u))
    return float(lo * ratio ** (1.0 / p))


def t_fun(x: float, t: float) -> float:
    """``T_t(x) = (x^t - 1) / t``."""
    if t == 0:
        raise ZeroParameter("T_t needs t != 0")
    _check_positive(x)
    return float(math.expm1(t * math.log(x)) / t)
