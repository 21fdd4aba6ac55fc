"""Spectral windows and lower/upper bounds for the quadratic perspective.

Every constructor takes a catalog function ``f`` and an invertible pair
``(T, V)``. For a convex ``f`` lower bounds sit below ``T* f(|VT^{-1}|^2) T``
and upper bounds above it. A concave ``f`` is handled by building the
bounds for ``-f`` and negating them, which swaps the sides.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matfun as mf
from . import perspectives as ps
from .errors import AnchorOutOfDomain, DomainViolation, NotDifferentiable, ZeroVector
from .funcatalog import ConvexFunctionSpec, derivative_of, derivative_times_identity, integral_mean
from .matfun import KAPPA_MAX, LoewnerVerdict

DEGENERATE_DELTA = 1e-6
DEFAULT_PAD = 0.01
DEFAULT_NODES = 129


@dataclass(frozen=True)
class SpectralWindow:
    """Constants ``0 < m < M`` with ``m^2 <= |V T^{-1}|^2 <= M^2``."""

    m: float
    M: float
    padded: bool = False

    def __post_init__(self):
        if not 0 < self.m < self.M:
            raise DomainViolation(f"window needs 0 < m < M, got m={self.m}, M={self.M}")

    @property
    def m2(self) -> float:
        return self.m * self.m

    @property
    def M2(self) -> float:
        return self.M * self.M

    @property
    def mid(self) -> float:
        return (self.m2 + self.M2) / 2

    def to_json(self) -> dict:
        return {"m": self.m, "M": self.M, "padded": self.padded}


def spectral_window(t, v, pad: float = 0.0, kappa_max: float = KAPPA_MAX) -> SpectralWindow:
    """Tightest window from the spectrum of ``|V T^{-1}|^2``, inflated by ``pad``.

    A degenerate spectrum (``V`` a multiple of ``T``) is widened by the
    relative amount ``1e-6`` on each side and flagged ``padded``.
    """
    if pad < 0:
        raise ValueError("pad must be nonnegative")
    w = np.linalg.eigvalsh(mf.quotient_square(t, v, kappa_max))
    lo, hi = float(w[0]), float(w[-1])
    if not lo > 0:
        raise DomainViolation("|V T^-1|^2 is singular; V must be invertible")
    m = (1 - pad) * np.sqrt(lo)
    M = (1 + pad) * np.sqrt(hi)
    padded = pad > 0
    if hi - lo <= DEGENERATE_DELTA * hi:
        m *= 1 - DEGENERATE_DELTA
        M *= 1 + DEGENERATE_DELTA
        padded = True
    return SpectralWindow(float(m), float(M), padded)


@dataclass(frozen=True)
class BoundReport:
    bound: np.ndarray
    side: str
    anchor: float | None
    eq_id: str
    verdict: LoewnerVerdict | None = None
    extras: dict = field(default_factory=dict)

    def negated(self) -> BoundReport:
        return BoundReport(
            bound=-self.bound,
            side="upper" if self.side == "lower" else "lower",
            anchor=self.anchor,
            eq_id=self.eq_id,
            verdict=self.verdict,
            extras=self.extras,
        )

    def to_json(self) -> dict:
        out = {
            "paper_eq": self.eq_id,
            "side": self.side,
            "anchor": self.anchor,
            "bound": mf.to_json(self.bound),
        }
        if self.verdict is not None:
            out["verdict"] = self.verdict.to_json()
        return out


def _judge(report: BoundReport, persp: np.ndarray) -> BoundReport:
    if report.side == "lower":
        verdict = mf.loewner_compare(persp, report.bound)
    else:
        verdict = mf.loewner_compare(report.bound, persp)
    return BoundReport(report.bound, report.side, report.anchor, report.eq_id, verdict, report.extras)


def _convex_part(f: ConvexFunctionSpec) -> tuple[ConvexFunctionSpec, bool]:
    return (f, False) if f.is_convex else (f.negated(), True)


def _finish(reports, f_orig, t, v, flipped: bool, kappa_max: float):
    persp = ps.quad_perspective(f_orig, t, v, kappa_max)
    out = []
    for r in reports:
        if flipped:
            r = r.negated()
        out.append(_judge(r, persp))
    return out


def _check_anchor(f: ConvexFunctionSpec, s: float) -> float:
    s = float(s)
    if not f.dom.interior_contains(s):
        raise AnchorOutOfDomain(f"anchor {s} not in the interior of {f.dom}")
    return s


def _check_window(f: ConvexFunctionSpec, win: SpectralWindow, t, v, kappa_max: float) -> None:
    if not (f.dom.interior_contains(win.m2) and f.dom.interior_contains(win.M2)):
        raise DomainViolation(f"[{win.m2}, {win.M2}] not inside the interior of {f.dom}")
    w = np.linalg.eigvalsh(mf.quotient_square(t, v, kappa_max))
    slack = 1e-12 * win.M2
    if w[0] < win.m2 - slack or w[-1] > win.M2 + slack:
        raise DomainViolation(
            f"spectrum [{w[0]}, {w[-1]}] of |V T^-1|^2 escapes [{win.m2}, {win.M2}]"
        )


def rayleigh_anchor(t, v, x) -> float:
    """``||V x||^2 / ||T x||^2``."""
    x = np.asarray(x, dtype=complex).ravel()
    if not np.any(x):
        raise ZeroVector("x must be nonzero")
    tx = np.asarray(t) @ x
    vx = np.asarray(v) @ x
    return float(np.vdot(vx, vx).real / np.vdot(tx, tx).real)


def _tangent(g: ConvexFunctionSpec, s: float, a2t, a2v) -> np.ndarray:
    return float(g(s)) * a2t + float(g.subgrad(s)) * (a2v - s * a2t)


def lower_bound_tangent(f: ConvexFunctionSpec, s: float, t, v, kappa_max: float = KAPPA_MAX) -> BoundReport:
    """Supporting-line bound ``f(s)|T|^2 + phi(s)(|V|^2 - s|T|^2)`` at anchor ``s``."""
    g, flipped = _convex_part(f)
    s = _check_anchor(g, s)
    rep = BoundReport(_tangent(g, s, mf.abs2(t), mf.abs2(v)), "lower", s, "e.2.1")
    return _finish([rep], f, t, v, flipped, kappa_max)[0]


def lower_bound_midpoint(f: ConvexFunctionSpec, t, v, win: SpectralWindow, kappa_max: float = KAPPA_MAX) -> BoundReport:
    g, flipped = _convex_part(f)
    _check_window(g, win, t, v, kappa_max)
    s = _check_anchor(g, win.mid)
    rep = BoundReport(_tangent(g, s, mf.abs2(t), mf.abs2(v)), "lower", s, "e.2.1.a")
    return _finish([rep], f, t, v, flipped, kappa_max)[0]


def lower_bound_rayleigh(f: ConvexFunctionSpec, t, v, x, kappa_max: float = KAPPA_MAX) -> BoundReport:
    """Tangent bound anchored at the Rayleigh quotient of ``x``.

    ``extras`` carries the scalar Jensen pair: ``jensen_lhs`` is
    ``<P x, x> / ||T x||^2`` for the perspective ``P`` of ``f`` and
    ``jensen_rhs`` is ``f(anchor)``. For convex ``f`` the first dominates.
    """
    g, flipped = _convex_part(f)
    r = _check_anchor(g, rayleigh_anchor(t, v, x))
    rep = BoundReport(_tangent(g, r, mf.abs2(t), mf.abs2(v)), "lower", r, "e.2.6")
    out = _finish([rep], f, t, v, flipped, kappa_max)[0]
    x = np.asarray(x, dtype=complex).ravel()
    persp = ps.quad_perspective(f, t, v, kappa_max)
    tx = np.asarray(t) @ x
    extras = {
        "anchor": r,
        "jensen_lhs": float(np.vdot(x, persp @ x).real / np.vdot(tx, tx).real),
        "jensen_rhs": float(f(r)),
    }
    return BoundReport(out.bound, out.side, out.anchor, out.eq_id, out.verdict, extras)


def two_vector_bound(f: ConvexFunctionSpec, t, v, x, y, kappa_max: float = KAPPA_MAX) -> tuple[float, float]:
    """``(<P y, y>, f(r)||Ty||^2 + phi(r)(||Vy||^2 - r||Ty||^2))`` with ``r`` the anchor of ``x``.

    For convex ``f`` the first value dominates the second.
    """
    r = _check_anchor(f, rayleigh_anchor(t, v, x))
    y = np.asarray(y, dtype=complex).ravel()
    persp = ps.quad_perspective(f, t, v, kappa_max)
    ty = np.asarray(t) @ y
    vy = np.asarray(v) @ y
    nty = np.vdot(ty, ty).real
    nvy = np.vdot(vy, vy).real
    rhs = float(f(r)) * nty + float(f.subgrad(r)) * (nvy - r * nty)
    return float(np.vdot(y, persp @ y).real), float(rhs)


def _integral_mean_lower(g: ConvexFunctionSpec, win: SpectralWindow, a2t, a2v) -> np.ndarray:
    m2, M2 = win.m2, win.M2
    mean = integral_mean(g, m2, M2)
    ends = float(g(M2)) * (M2 * a2t - a2v) + float(g(m2)) * (a2v - m2 * a2t)
    return 2 * mean * a2t - ends / (M2 - m2)


def lower_bound_integral_mean(f: ConvexFunctionSpec, t, v, win: SpectralWindow, kappa_max: float = KAPPA_MAX) -> BoundReport:
    """Average of the tangent bounds over anchors in ``[m^2, M^2]``."""
    g, flipped = _convex_part(f)
    _check_window(g, win, t, v, kappa_max)
    rep = BoundReport(_integral_mean_lower(g, win, mf.abs2(t), mf.abs2(v)), "lower", None, "e.2.9")
    return _finish([rep], f, t, v, flipped, kappa_max)[0]


def _derivative_gap(g: ConvexFunctionSpec, win: SpectralWindow) -> float:
    d = derivative_of(g)
    return float(d(win.M2) - d(win.m2))


def _require_deriv(g: ConvexFunctionSpec) -> None:
    if g.deriv is None:
        raise NotDifferentiable(f"{g.name} is not continuously differentiable")


def _chain_first(g, s, t, v, a2t, kappa_max):
    dl = ps.quad_perspective(derivative_times_identity(g), t, v, kappa_max)
    d = ps.quad_perspective(derivative_of(g), t, v, kappa_max)
    return float(g(s)) * a2t + dl - s * d


def _chain_second(g, s, t, v, a2t, a2v, gap, kappa_max):
    return (
        float(g(s)) * a2t
        + float(g.deriv(s)) * (a2v - s * a2t)
        + gap * ps.abs_perspective(t, v, s, kappa_max)
    )


def upper_bound_chain(
    f: ConvexFunctionSpec, s: float, t, v, win: SpectralWindow | None = None, kappa_max: float = KAPPA_MAX
) -> tuple[BoundReport, BoundReport]:
    """Two increasing upper bounds at anchor ``s``.

    The first replaces the gradient inequality by its reverse form using
    the perspectives of ``f'`` and ``s f'(s)``; the second estimates the
    remaining term with the derivative gap over the window and the absolute
    perspective at ``s``. Without ``win`` the unpadded window is used.
    """
    g, flipped = _convex_part(f)
    _require_deriv(g)
    s = _check_anchor(g, s)
    if win is None:
        win = spectral_window(t, v, 0.0, kappa_max)
    _check_window(g, win, t, v, kappa_max)
    a2t, a2v = mf.abs2(t), mf.abs2(v)
    gap = _derivative_gap(g, win)
    b1 = BoundReport(_chain_first(g, s, t, v, a2t, kappa_max), "upper", s, "e.2.11")
    b2 = BoundReport(_chain_second(g, s, t, v, a2t, a2v, gap, kappa_max), "upper", s, "e.2.11")
    return tuple(_finish([b1, b2], f, t, v, flipped, kappa_max))


def upper_bound_midpoint(
    f: ConvexFunctionSpec, t, v, win: SpectralWindow, kappa_max: float = KAPPA_MAX
) -> tuple[BoundReport, BoundReport, BoundReport]:
    """The chain at the midpoint anchor plus a constant closing bound."""
    g, flipped = _convex_part(f)
    _require_deriv(g)
    _check_window(g, win, t, v, kappa_max)
    c = _check_anchor(g, win.mid)
    a2t, a2v = mf.abs2(t), mf.abs2(v)
    gap = _derivative_gap(g, win)
    b1 = BoundReport(_chain_first(g, c, t, v, a2t, kappa_max), "upper", c, "e.2.11.a")
    b2 = BoundReport(_chain_second(g, c, t, v, a2t, a2v, gap, kappa_max), "upper", c, "e.2.11.a")
    b3_mat = float(g(c)) * a2t + float(g.deriv(c)) * (a2v - c * a2t) + 0.5 * (win.M2 - win.m2) * gap * a2t
    b3 = BoundReport(b3_mat, "upper", c, "e.2.11.a")
    return tuple(_finish([b1, b2, b3], f, t, v, flipped, kappa_max))


def upper_bound_rayleigh(
    f: ConvexFunctionSpec, t, v, x, win: SpectralWindow | None = None, kappa_max: float = KAPPA_MAX
) -> tuple[BoundReport, BoundReport]:
    """:func:`upper_bound_chain` at the Rayleigh anchor of ``x``.

    Both reports carry the scalar chain for ``x`` in ``extras``:
    ``<P x, x> <= first <= second``.
    """
    g, _ = _convex_part(f)
    r = _check_anchor(g, rayleigh_anchor(t, v, x))
    if win is None:
        win = spectral_window(t, v, 0.0, kappa_max)
    b1, b2 = upper_bound_chain(f, r, t, v, win, kappa_max)
    x = np.asarray(x, dtype=complex).ravel()
    tx = np.asarray(t) @ x
    ntx = np.vdot(tx, tx).real
    persp = ps.quad_perspective(f, t, v, kappa_max)
    g_sign = 1.0 if f.is_convex else -1.0
    gap = _derivative_gap(g, win)
    absp = ps.abs_perspective(t, v, r, kappa_max)
    extras = {
        "anchor": r,
        "quadratic_form": float(np.vdot(x, persp @ x).real),
        "first": float(np.vdot(x, b1.bound @ x).real),
        "second": float(g_sign * (float(g(r)) * ntx + gap * np.vdot(x, absp @ x).real)),
    }
    b1 = BoundReport(b1.bound, b1.side, r, "e.2.16", b1.verdict, extras)
    b2 = BoundReport(b2.bound, b2.side, r, "e.2.16", b2.verdict, extras)
    return b1, b2


def _simpson_nodes(a: float, b: float, count: int) -> tuple[np.ndarray, np.ndarray]:
    if count % 2 == 0:
        count += 1
    count = max(count, 3)
    nodes = np.linspace(a, b, count)
    h = (b - a) / (count - 1)
    w = np.ones(count)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return nodes, w * h / 3


def abs_perspective_mean(
    t, v, a: float, b: float, nodes: int = DEFAULT_NODES, kappa_max: float = KAPPA_MAX
) -> np.ndarray:
    """``(1/(b - a)) * integral over s in [a, b]`` of the absolute perspective at ``s``.

    Composite Simpson applied to the spectral form
    ``T* U diag(|lambda_i - s|) U* T`` of the integrand, with ``U, lambda``
    the eigensystem of ``|V T^{-1}|^2``, so one eigendecomposition serves
    every node. The integrand is piecewise linear in ``s`` with kinks at the
    eigenvalues, so ``[a, b]`` is split there and about ``nodes`` points are
    shared among the pieces.
    """
    if not a < b:
        raise DomainViolation(f"need a < b, got [{a}, {b}]")
    dec = mf.eig_herm(mf.quotient_square(t, v, kappa_max))
    lam = dec.eigenvalues
    cuts = [a] + sorted(float(e) for e in lam if a < e < b) + [b]
    acc = np.zeros_like(lam)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 0:
            continue
        share = int(round(nodes * (hi - lo) / (b - a)))
        pts, wts = _simpson_nodes(lo, hi, share)
        acc += np.abs(lam[:, None] - pts[None, :]) @ wts
    u = dec.eigenvectors
    return mf.congruence(t, (u * (acc / (b - a))) @ u.conj().T)


def upper_bound_integral_mean(
    f: ConvexFunctionSpec, t, v, win: SpectralWindow, nodes: int = DEFAULT_NODES, kappa_max: float = KAPPA_MAX
) -> tuple[BoundReport, BoundReport]:
    """Average of :func:`upper_bound_chain` over anchors in ``[m^2, M^2]``."""
    g, flipped = _convex_part(f)
    _require_deriv(g)
    _check_window(g, win, t, v, kappa_max)
    a2t, a2v = mf.abs2(t), mf.abs2(v)
    mean = integral_mean(g, win.m2, win.M2)
    dl = ps.quad_perspective(derivative_times_identity(g), t, v, kappa_max)
    d = ps.quad_perspective(derivative_of(g), t, v, kappa_max)
    b1 = BoundReport(mean * a2t + dl - win.mid * d, "upper", None, "e.2.18")
    absmean = abs_perspective_mean(t, v, win.m2, win.M2, nodes, kappa_max)
    b2_mat = _integral_mean_lower(g, win, a2t, a2v) + _derivative_gap(g, win) * absmean
    b2 = BoundReport(b2_mat, "upper", None, "e.2.18")
    return tuple(_finish([b1, b2], f, t, v, flipped, kappa_max))
