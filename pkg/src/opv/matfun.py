"""Hermitian functional calculus and Loewner-order comparison.

Matrices are plain ``numpy`` complex arrays of shape ``(n, n)``. Functions
that return a mathematically Hermitian result symmetrize it as
``(X + X^*) / 2`` before returning, so downstream invariants can be asserted
without fighting rounding drift.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidMatrix,
    NonHermitian,
    NumericalFailure,
    SingularT,
    SpectrumOutOfDomain,
)

ATOL = 1e-10
RTOL = 1e-9
KAPPA_MAX = 1e6
HERMITIAN_TOL = 1e-12
PSD_CLAMP = 1e-12
EIG_RESIDUAL = 1e-10


def as_matrix(a) -> np.ndarray:
    """Validate and return ``a`` as a square, finite complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InvalidMatrix(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidMatrix("matrix has non-finite entries")
    return m


def adjoint(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def hermitian_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(a)
    scale = 1.0 + (float(np.max(np.abs(m))) if m.size else 0.0)
    return hermitian_defect(m) <= tol * scale


def as_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate the symmetry invariant and return the symmetrized matrix."""
    m = as_matrix(a)
    if not is_hermitian(m, tol):
        raise NonHermitian(
            f"matrix is not Hermitian (defect {hermitian_defect(m):.3e})"
        )
    return hermitian_part(m)


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u, w = self.eigenvectors, self.eigenvalues
        return hermitian_part((u * w) @ u.conj().T)


def _fix_phases(u: np.ndarray) -> np.ndarray:
    # largest-magnitude component of each column made real positive
    idx = np.argmax(np.abs(u), axis=0)
    pivots = u[idx, np.arange(u.shape[1])]
    return u * (np.abs(pivots) / pivots)


def eig_herm(a) -> SpectralDecomposition:
    """Eigendecomposition with ascending eigenvalues and fixed eigenvector phases."""
    h = as_hermitian(a)
    try:
        w, u = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    u = _fix_phases(u)
    dec = SpectralDecomposition(w, u)
    scale = 1.0 + np.linalg.norm(h)
    if np.linalg.norm(dec.reconstruct() - h) > EIG_RESIDUAL * scale:
        raise NumericalFailure("eigendecomposition residual above tolerance")
    return dec


@dataclass(frozen=True)
class Interval:
    """Real interval with optionally closed endpoints."""

    lo: float = -np.inf
    hi: float = np.inf
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo_ok = x >= self.lo if self.lo_closed else x > self.lo
        hi_ok = x <= self.hi if self.hi_closed else x < self.hi
        return lo_ok & hi_ok

    def interior_contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x > self.lo) & (x < self.hi)

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


def apply_fun(
    a,
    f: Callable[[np.ndarray], np.ndarray],
    dom: Interval | None = None,
    *,
    clamp_psd: bool = False,
    decomposition: SpectralDecomposition | None = None,
) -> np.ndarray:
    """Return ``U diag(f(w)) U*`` for the Hermitian matrix ``a``.

    With ``clamp_psd`` eigenvalues within ``1e-12 * ||a||`` of zero are
    rounding noise: negative ones are set to zero, and so are positive ones
    when ``f`` is defined at zero (a singular PSD matrix then has exact zero
    eigenvalues, which matters for fractional powers). Use it only for
    matrices that are PSD by construction.
    """
    dec = decomposition if decomposition is not None else eig_herm(a)
    w = dec.eigenvalues
    if clamp_psd and w.size:
        eps = PSD_CLAMP * float(np.max(np.abs(w)))
        zero_ok = dom is None or bool(dom.contains(0.0))
        noise = np.abs(w) <= eps if zero_ok else (w < 0) & (w >= -eps)
        w = np.where(noise, 0.0, w)
    if dom is not None:
        bad = ~dom.contains(w)
        if np.any(bad):
            raise SpectrumOutOfDomain(w[bad].tolist(), dom)
    with np.errstate(divide="ignore", invalid="ignore"):
        fw = np.asarray(f(w), dtype=float)
    if not np.all(np.isfinite(fw)):
        raise SpectrumOutOfDomain(w[~np.isfinite(fw)].tolist(), dom)
    u = dec.eigenvectors
    return hermitian_part((u * fw) @ u.conj().T)


def abs2(u) -> np.ndarray:
    """``|U|^2 = U* U``."""
    m = as_matrix(u)
    return hermitian_part(m.conj().T @ m)


def modulus(u) -> np.ndarray:
    """Operator modulus ``|U| = sqrt(U* U)``."""
    return apply_fun(abs2(u), np.sqrt, Interval(0.0, np.inf, lo_closed=True), clamp_psd=True)


def condition_number(t) -> float:
    s = np.linalg.svd(as_matrix(t), compute_uv=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def check_invertible(t, kappa_max: float = KAPPA_MAX, exc=SingularT, name: str = "T") -> np.ndarray:
    m = as_matrix(t)
    kappa = condition_number(m)
    if not kappa <= kappa_max:
        raise exc(f"{name} has condition number {kappa:.3e} > {kappa_max:.3e}")
    return m


def right_divide(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``V T^{-1}`` via a linear solve."""
    return np.linalg.solve(t.T, v.T).T


def quotient_square(t, v, kappa_max: float = KAPPA_MAX) -> np.ndarray:
    """``|V T^{-1}|^2 = (T*)^{-1} V* V T^{-1}``."""
    tm = check_invertible(t, kappa_max)
    vm = as_matrix(v)
    _check_same_dim(tm, vm)
    return abs2(right_divide(vm, tm))


def congruence(t, x) -> np.ndarray:
    """``T* X T``."""
    tm = as_matrix(t)
    xm = as_matrix(x)
    _check_same_dim(tm, xm)
    return hermitian_part(tm.conj().T @ xm @ tm)


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    BORDERLINE = "borderline"


@dataclass(frozen=True)
class LoewnerVerdict:
    min_eig: float
    tol: float
    verdict: Verdict

    @classmethod
    def from_min_eig(cls, min_eig: float, tol: float) -> LoewnerVerdict:
        if min_eig >= -tol:
            v = Verdict.HOLDS
        elif min_eig < -10 * tol:
            v = Verdict.FAILS
        else:
            v = Verdict.BORDERLINE
        return cls(float(min_eig), float(tol), v)

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    @property
    def margin(self) -> float:
        """``min_eig / tol``; below -1 means the comparison does not hold."""
        return self.min_eig / self.tol

    def to_json(self) -> dict:
        return {"min_eig": self.min_eig, "tol": self.tol, "verdict": self.verdict.value}


def loewner_tol(a_norm: float, b_norm: float, atol: float = ATOL, rtol: float = RTOL) -> float:
    return atol + rtol * max(a_norm, b_norm)


def loewner_compare(
    a, b, tol: float | None = None, *, atol: float = ATOL, rtol: float = RTOL
) -> LoewnerVerdict:
    """Check ``A >= B`` through the smallest eigenvalue of ``A - B``.

    Without an explicit ``tol`` the scale-free model
    ``atol + rtol * max(||A||_F, ||B||_F)`` is used.
    """
    am = as_matrix(a)
    bm = as_matrix(b)
    _check_same_dim(am, bm)
    if tol is None:
        tol = loewner_tol(np.linalg.norm(am), np.linalg.norm(bm), atol, rtol)
    elif tol <= 0:
        raise ValueError("tol must be positive")
    min_eig = float(np.linalg.eigvalsh(hermitian_part(am - bm))[0])
    return LoewnerVerdict.from_min_eig(min_eig, tol)


def min_eig_refined(d: np.ndarray, dps: int = 32) -> float:
    """Smallest eigenvalue of the Hermitian part of ``d`` at extended precision."""
    import mpmath

    h = hermitian_part(np.asarray(d, dtype=complex))
    with mpmath.workdps(dps):
        m = mpmath.matrix(h.tolist())
        # exact symmetrization at working precision
        for i in range(m.rows):
            m[i, i] = mpmath.re(m[i, i])
            for j in range(i + 1, m.cols):
                m[j, i] = mpmath.conj(m[i, j])
        w = mpmath.eighe(m, eigvals_only=True)
        return float(min(mpmath.re(x) for x in w))


def rel_frobenius(a, b) -> float:
    """``||A - B||_F / max(||A||_F, ||B||_F)``, zero when both vanish."""
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(a - b) / scale)


def to_json(a) -> dict:
    """Matrix JSON: ``{"n": n, "entries": [[[re, im], ...], ...]}``, row-major."""
    m = as_matrix(a)
    return {
        "n": int(m.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def from_json(obj: dict) -> np.ndarray:
    try:
        n = int(obj["n"])
        rows = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise InvalidMatrix(f"malformed matrix JSON: {exc}") from exc
    if len(rows) != n or any(len(r) != n for r in rows):
        raise InvalidMatrix(f"matrix JSON entries do not form an {n}x{n} array")
    m = np.array([[complex(float(re), float(im)) for re, im in row] for row in rows], dtype=complex)
    return as_matrix(m.reshape(n, n))
