"""Operator means, perspectives and entropies.

``T`` is an invertible operator and ``V`` an arbitrary one, both given as
square complex arrays. The quadratic objects are built from
``X = |V T^{-1}|^2`` through functional calculus followed by the
congruence ``T* (.) T``.
"""

from __future__ import annotations

import numpy as np

from . import matfun as mf
from .errors import NotPositiveDefinite, SingularV, WeightOutOfRange, ZeroParameter
from .funcatalog import POSITIVE, ScalarFunction
from .matfun import KAPPA_MAX, Interval

_FRACTIONAL = Interval(0.0, np.inf, lo_closed=True)


def _check_weight(nu: float, lo: float = 0.0, hi: float = 1.0) -> float:
    nu = float(nu)
    if not lo <= nu <= hi:
        raise WeightOutOfRange(f"weight {nu} outside [{lo}, {hi}]")
    return nu


def _pd_decomposition(a, name: str = "A") -> mf.SpectralDecomposition:
    dec = mf.eig_herm(a)
    if not dec.eigenvalues[0] > 0:
        raise NotPositiveDefinite(f"{name} is not positive definite (min eig {dec.eigenvalues[0]:.3e})")
    return dec


def _psd_power(a, p: float) -> np.ndarray:
    return mf.apply_fun(a, lambda w: np.power(w, p), _FRACTIONAL, clamp_psd=True)


def _sqrt_and_inv_sqrt(a, name: str = "A") -> tuple[np.ndarray, np.ndarray]:
    dec = _pd_decomposition(a, name)
    root = mf.apply_fun(a, np.sqrt, decomposition=dec)
    inv_root = mf.apply_fun(a, lambda w: 1.0 / np.sqrt(w), decomposition=dec)
    return root, inv_root


def perspective(f: ScalarFunction, b, a) -> np.ndarray:
    """``A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}`` for positive definite ``A``."""
    bm = mf.as_hermitian(b)
    root, inv_root = _sqrt_and_inv_sqrt(a)
    inner = mf.congruence(inv_root, bm)
    return mf.congruence(root, mf.apply_fun(inner, f.eval, f.dom))


def quad_perspective(f: ScalarFunction, t, v, kappa_max: float = KAPPA_MAX) -> np.ndarray:
    """Quadratic perspective ``T* f(|V T^{-1}|^2) T``."""
    x = mf.quotient_square(t, v, kappa_max)
    return mf.congruence(t, mf.apply_fun(x, f.eval, f.dom, clamp_psd=True))


def arith_mean(a, b, nu: float) -> np.ndarray:
    nu = _check_weight(nu)
    return mf.hermitian_part((1 - nu) * mf.as_hermitian(a) + nu * mf.as_hermitian(b))


def geo_mean(a, b, nu: float) -> np.ndarray:
    """Kubo-Ando weighted geometric mean ``A #_nu B``; ``A`` PD, ``B`` PSD."""
    nu = _check_weight(nu)
    bm = mf.as_hermitian(b)
    root, inv_root = _sqrt_and_inv_sqrt(a)
    inner = mf.congruence(inv_root, bm)
    return mf.congruence(root, _psd_power(inner, nu))


def harm_mean(a, b, nu: float) -> np.ndarray:
    nu = _check_weight(nu)
    _pd_decomposition(a, "A")
    _pd_decomposition(b, "B")
    inv_a = np.linalg.inv(mf.as_hermitian(a))
    inv_b = np.linalg.inv(mf.as_hermitian(b))
    return mf.hermitian_part(np.linalg.inv(mf.hermitian_part((1 - nu) * inv_a + nu * inv_b)))


def quad_geo_mean(t, v, nu: float, kappa_max: float = KAPPA_MAX) -> np.ndarray:
    """Quadratic weighted geometric mean ``T* |V T^{-1}|^{2 nu} T``.

    Negative weights require ``V`` to pass the same conditioning guard as ``T``.
    """
    nu = float(nu)
    if nu < 0:
        mf.check_invertible(v, kappa_max, SingularV, "V")
        dom = POSITIVE
    else:
        dom = _FRACTIONAL
    x = mf.quotient_square(t, v, kappa_max)
    return mf.congruence(t, mf.apply_fun(x, lambda w: np.power(w, nu), dom, clamp_psd=True))


def quad_geo_mean_modulus_form(t, v, nu: float, kappa_max: float = KAPPA_MAX) -> np.ndarray:
    """The same mean through the double modulus ``||V T^{-1}|^nu T|^2``."""
    nu = float(nu)
    tm = mf.check_invertible(t, kappa_max)
    vm = mf.as_matrix(v)
    if nu < 0:
        mf.check_invertible(vm, kappa_max, SingularV, "V")
    w = mf.modulus(mf.right_divide(vm, tm))
    dom = POSITIVE if nu < 0 else _FRACTIONAL
    p = mf.apply_fun(w, lambda s: np.power(s, nu), dom, clamp_psd=True)
    return mf.abs2(p @ tm)


def rel_entropy(a, b) -> np.ndarray:
    """Relative operator entropy ``A^{1/2} ln(A^{-1/2} B A^{-1/2}) A^{1/2}``."""
    _pd_decomposition(b, "B")
    root, inv_root = _sqrt_and_inv_sqrt(a)
    inner = mf.congruence(inv_root, mf.as_hermitian(b))
    return mf.congruence(root, mf.apply_fun(inner, np.log, POSITIVE))


def quad_rel_entropy(t, v, kappa_max: float = KAPPA_MAX) -> np.ndarray:
    """``T* ln(|V T^{-1}|^2) T``."""
    mf.check_invertible(v, kappa_max, SingularV, "V")
    x = mf.quotient_square(t, v, kappa_max)
    return mf.congruence(t, mf.apply_fun(x, np.log, POSITIVE))


def _tsallis_map(t: float):
    return lambda w: np.expm1(t * np.log(w)) / t


def quad_tsallis(t, v, tt: float, kappa_max: float = KAPPA_MAX) -> np.ndarray:
    """Quadratic Tsallis relative entropy ``T* T_t(|V T^{-1}|^2) T`` with ``T_t(x) = (x^t - 1)/t``."""
    tt = float(tt)
    if tt == 0:
        raise ZeroParameter("Tsallis parameter must be nonzero")
    mf.check_invertible(v, kappa_max, SingularV, "V")
    x = mf.quotient_square(t, v, kappa_max)
    return mf.congruence(t, mf.apply_fun(x, _tsallis_map(tt), POSITIVE))


def quad_geo_mean_inverse(t, v, nu: float, kappa_max: float = KAPPA_MAX) -> np.ndarray:
    """``(T Ⓢ_nu V)^{-1}`` factor by factor as ``T^{-1} |V T^{-1}|^{-2 nu} (T*)^{-1}``.

    Inverting the assembled mean loses accuracy in proportion to its
    condition number, which grows like ``cond(|V T^{-1}|^2)^nu``; inverting
    the factors keeps the error at the level of ``cond(T)``.
    """
    mf.check_invertible(v, kappa_max, SingularV, "V")
    x = mf.quotient_square(t, v, kappa_max)
    t_inv = np.linalg.inv(mf.as_matrix(t))
    return mf.congruence(t_inv.conj().T, mf.apply_fun(x, lambda w: np.power(w, -float(nu)), POSITIVE))


def tsallis_negative_identity(t, v, tt: float, kappa_max: float = KAPPA_MAX):
    """Both sides of the negative-parameter Tsallis identity.

    Returns ``(direct, product)`` where ``direct = T* T_{-t}(|V T^{-1}|^2) T``
    and ``product`` is the plain (non-symmetrized) product
    ``(entropy at t) (mean at t)^{-1} |T|^2``, with the inverse taken by
    :func:`quad_geo_mean_inverse`.
    """
    direct = quad_tsallis(t, v, -tt, kappa_max)
    product = quad_tsallis(t, v, tt, kappa_max) @ quad_geo_mean_inverse(t, v, tt, kappa_max) @ mf.abs2(t)
    return direct, product


def abs_perspective(t, v, s: float, kappa_max: float = KAPPA_MAX) -> np.ndarray:
    """``T* |(T*)^{-1} (|V|^2 - s |T|^2) T^{-1}| T``."""
    tm = mf.check_invertible(t, kappa_max)
    vm = mf.as_matrix(v)
    inner = mf.abs2(vm) - s * mf.abs2(tm)
    # (T*)^{-1} Y T^{-1} with two solves
    y = mf.right_divide(np.linalg.solve(tm.conj().T, inner), tm)
    return mf.congruence(tm, mf.apply_fun(mf.hermitian_part(y), np.abs))


def abs_perspective_inner_form(t, v, s: float, kappa_max: float = KAPPA_MAX) -> np.ndarray:
    """``T* ||V T^{-1}|^2 - s| T``, equal to :func:`abs_perspective`."""
    x = mf.quotient_square(t, v, kappa_max)
    return mf.congruence(t, mf.apply_fun(x - s * np.eye(x.shape[0]), np.abs))
