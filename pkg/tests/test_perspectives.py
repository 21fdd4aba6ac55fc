from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opv import funcatalog as fc
from opv import matfun as mf
from opv import perspectives as ps
from opv.errors import NotPositiveDefinite, SingularV, WeightOutOfRange, ZeroParameter

from conftest import crandn, rand_herm, rand_pd

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 5)
weights = st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0])
tsallis_t = st.sampled_from([0.25, 0.5, 1.0, 2.0])


def _well_conditioned(rng, n, kappa=30.0):
    while True:
        g = crandn(rng, n)
        if mf.condition_number(g) <= kappa:
            return g


def _holds(a, b):
    """a >= b at the default tolerance"""
    return mf.loewner_compare(a, b).holds


# classical perspective


def test_perspective_at_identity(rng):
    b = rand_pd(rng, 3)
    f = fc.make_catalog_function("pow", [2])
    assert mf.rel_frobenius(ps.perspective(f, b, np.eye(3)), b @ b) < 1e-12


def test_perspective_commuting_pair():
    f = fc.make_catalog_function("pow", [2])
    assert np.allclose(ps.perspective(f, np.diag([4.0]), np.diag([2.0])), [[8.0]])


def test_perspective_identity_function(rng):
    b = rand_herm(rng, 3)
    out = ps.perspective(fc.make_catalog_function("identity"), b, rand_pd(rng, 3))
    assert mf.rel_frobenius(out, b) < 1e-12


def test_perspective_needs_pd():
    with pytest.raises(NotPositiveDefinite):
        ps.perspective(fc.make_catalog_function("identity"), np.eye(2), np.diag([1.0, -1.0]))


# quadratic perspective


def test_quad_perspective_examples(rng):
    t, v = crandn(rng, 3), crandn(rng, 3)
    assert mf.rel_frobenius(ps.quad_perspective(fc.make_catalog_function("identity"), t, v), mf.abs2(v)) < 1e-12
    assert mf.rel_frobenius(ps.quad_perspective(fc.make_catalog_function("pow", [0]), t, v), mf.abs2(t)) < 1e-12
    out = ps.quad_perspective(fc.make_catalog_function("pow", [2]), np.eye(2), np.diag([1.0, 2.0]))
    assert np.allclose(out, np.diag([1, 16]))


# Kubo-Ando means


def test_arith_mean_examples(rng):
    a, b = rand_herm(rng, 2), rand_herm(rng, 2)
    assert np.allclose(ps.arith_mean(a, b, 0), a)
    assert np.allclose(ps.arith_mean(a, b, 1), b)
    assert np.allclose(ps.arith_mean(np.diag([2.0]), np.diag([4.0]), 0.5), [[3]])
    with pytest.raises(WeightOutOfRange):
        ps.arith_mean(a, b, 1.5)


def test_geo_mean_examples(rng):
    a, b = rand_pd(rng, 3), rand_pd(rng, 3)
    assert mf.rel_frobenius(ps.geo_mean(a, b, 0), a) < 1e-12
    bnu = mf.apply_fun(b, lambda w: w**0.3, mf.Interval(0, np.inf))
    assert mf.rel_frobenius(ps.geo_mean(np.eye(3), b, 0.3), bnu) < 1e-12
    assert np.allclose(ps.geo_mean(np.diag([1.0]), np.diag([9.0]), 0.5), [[3]])


def test_harm_mean_examples(rng):
    a, b = rand_pd(rng, 3), rand_pd(rng, 3)
    assert mf.rel_frobenius(ps.harm_mean(a, b, 0), a) < 1e-12
    assert mf.rel_frobenius(ps.harm_mean(a, b, 1), b) < 1e-12
    assert np.allclose(ps.harm_mean(np.diag([2.0]), np.diag([6.0]), 0.5), [[3]])


# quadratic geometric mean


def test_quad_geo_mean_examples(rng):
    assert np.allclose(ps.quad_geo_mean(np.eye(1), np.diag([4.0]), 0.5), [[4]])
    assert np.allclose(ps.quad_geo_mean([[2.0]], [[3.0]], 0.5), [[6]])
    t, v = crandn(rng, 3), crandn(rng, 3)
    assert mf.rel_frobenius(ps.quad_geo_mean(t, v, 0), mf.abs2(t)) < 1e-12
    assert mf.rel_frobenius(ps.quad_geo_mean(t, v, 1), mf.abs2(v)) < 1e-10


def test_quad_geo_mean_negative_weight_guard():
    with pytest.raises(SingularV):
        ps.quad_geo_mean(np.eye(2), np.diag([1.0, 0.0]), -0.5)
    # nonnegative weights accept a singular V
    out = ps.quad_geo_mean(np.eye(2), np.diag([1.0, 0.0]), 0.5)
    assert np.allclose(out, np.diag([1.0, 0.0]))


def test_psd_clamp_for_singular_v(rng):
    t = _well_conditioned(rng, 4)
    u, s, wh = np.linalg.svd(crandn(rng, 4))
    s[-1] = 0.0
    v = (u * s) @ wh
    a = ps.quad_geo_mean(t, v, 0.3)
    b = ps.quad_geo_mean_modulus_form(t, v, 0.3)
    assert mf.rel_frobenius(a, b) < 1e-9


# entropies


def test_rel_entropy_examples(rng):
    a = rand_pd(rng, 3)
    assert np.allclose(ps.rel_entropy(a, a), 0, atol=1e-12)
    assert np.allclose(ps.rel_entropy(np.eye(1), np.diag([math.e])), [[1]])
    assert np.allclose(ps.rel_entropy(np.diag([2.0]), np.diag([2 * math.e])), [[2]])


def test_quad_rel_entropy_examples(rng):
    t = crandn(rng, 3)
    assert np.allclose(ps.quad_rel_entropy(t, t), 0, atol=1e-12)
    assert np.allclose(ps.quad_rel_entropy([[1.0]], [[math.sqrt(math.e)]]), [[1]])
    a, b = rand_pd(rng, 3), rand_pd(rng, 3)
    ra = mf.apply_fun(a, np.sqrt, mf.Interval(0, np.inf))
    rb = mf.apply_fun(b, np.sqrt, mf.Interval(0, np.inf))
    assert mf.rel_frobenius(ps.quad_rel_entropy(ra, rb), ps.rel_entropy(a, b)) < 1e-9


def test_quad_tsallis_examples(rng):
    assert np.allclose(ps.quad_tsallis([[1.0]], [[2.0]], 1), [[3]])
    t = crandn(rng, 3)
    assert np.allclose(ps.quad_tsallis(t, t, 0.7), 0, atol=1e-12)
    with pytest.raises(ZeroParameter):
        ps.quad_tsallis(t, t, 0)


def test_negative_tsallis_identity_half(rng):
    t, v = _well_conditioned(rng, 4), _well_conditioned(rng, 4)
    direct, product = ps.tsallis_negative_identity(t, v, 0.5)
    assert mf.rel_frobenius(direct, product) < 1e-9


def test_geo_mean_inverse(rng):
    t, v = _well_conditioned(rng, 4), _well_conditioned(rng, 4)
    g = ps.quad_geo_mean(t, v, 0.4)
    assert mf.rel_frobenius(ps.quad_geo_mean_inverse(t, v, 0.4) @ g, np.eye(4)) < 1e-10


def test_abs_perspective_examples(rng):
    t = crandn(rng, 3)
    assert np.allclose(ps.abs_perspective(t, math.sqrt(2.5) * t, 2.5), 0, atol=1e-10)
    assert np.allclose(ps.abs_perspective(np.eye(2), np.diag([1.0, 3.0]), 2), np.diag([1, 7]))
    assert np.allclose(ps.abs_perspective([[1.0]], [[2.0]], 5), [[1]])


# properties


@given(seeds, dims, weights)
def test_reduction_to_kubo_ando(seed, n, nu):
    rng = np.random.default_rng(seed)
    a, b = rand_pd(rng, n), rand_pd(rng, n)
    half = mf.Interval(0, np.inf)
    ra = mf.apply_fun(a, np.sqrt, half)
    rb = mf.apply_fun(b, np.sqrt, half)
    assert mf.rel_frobenius(ps.quad_geo_mean(ra, rb, nu), ps.geo_mean(a, b, nu)) < 1e-9


@given(seeds, dims, weights)
def test_two_forms_of_geo_mean(seed, n, nu):
    rng = np.random.default_rng(seed)
    t, v = _well_conditioned(rng, n), crandn(rng, n)
    assert mf.rel_frobenius(ps.quad_geo_mean(t, v, nu), ps.quad_geo_mean_modulus_form(t, v, nu)) < 1e-9


@given(seeds, dims, weights)
def test_kubo_ando_chain(seed, n, nu):
    rng = np.random.default_rng(seed)
    a, b = rand_pd(rng, n), rand_pd(rng, n)
    g = ps.geo_mean(a, b, nu)
    assert _holds(ps.arith_mean(a, b, nu), g) and _holds(g, ps.harm_mean(a, b, nu))


@given(seeds, dims, weights)
def test_quadratic_young_chain(seed, n, nu):
    rng = np.random.default_rng(seed)
    t, v = _well_conditioned(rng, n), _well_conditioned(rng, n)
    at, av = mf.abs2(t), mf.abs2(v)
    g = ps.quad_geo_mean(t, v, nu)
    assert _holds(ps.arith_mean(at, av, nu), g) and _holds(g, ps.harm_mean(at, av, nu))


@given(seeds, dims, weights)
def test_inverse_and_flip_identities(seed, n, nu):
    rng = np.random.default_rng(seed)
    t, v = _well_conditioned(rng, n), _well_conditioned(rng, n)
    inv_adj = lambda m: np.linalg.inv(m.conj().T)  # noqa: E731
    lhs = np.linalg.inv(ps.quad_geo_mean(t, v, nu))
    assert mf.rel_frobenius(lhs, ps.quad_geo_mean(inv_adj(t), inv_adj(v), nu)) < 1e-9
    assert mf.rel_frobenius(ps.quad_geo_mean(t, v, 1 - nu), ps.quad_geo_mean(v, t, nu)) < 1e-9


@given(seeds, dims, tsallis_t)
def test_entropy_chain(seed, n, tt):
    rng = np.random.default_rng(seed)
    t, v = _well_conditioned(rng, n), _well_conditioned(rng, n)
    ent = ps.quad_rel_entropy(t, v)
    assert _holds(ent, ps.quad_tsallis(t, v, -tt)) and _holds(ps.quad_tsallis(t, v, tt), ent)


@given(seeds, dims, tsallis_t)
def test_tsallis_two_forms(seed, n, tt):
    rng = np.random.default_rng(seed)
    t, v = _well_conditioned(rng, n), _well_conditioned(rng, n)
    alt = (ps.quad_geo_mean(t, v, tt) - mf.abs2(t)) / tt
    assert mf.rel_frobenius(ps.quad_tsallis(t, v, tt), alt) < 1e-9


@given(seeds, dims)
def test_entropy_bracketing_chains(seed, n):
    rng = np.random.default_rng(seed)
    t, v = _well_conditioned(rng, n), _well_conditioned(rng, n)
    at, av = mf.abs2(t), mf.abs2(v)
    ent = ps.quad_rel_entropy(t, v)
    lower = at - at @ np.linalg.inv(av) @ at
    assert _holds(ent, mf.hermitian_part(lower)) and _holds(av - at, ent)
    g = ps.quad_geo_mean(t, v, 0.5)
    lower2 = 2 * (at - at @ np.linalg.inv(g) @ at)
    assert _holds(ent, mf.hermitian_part(lower2)) and _holds(2 * (g - at), ent)


@given(seeds, dims, weights, tsallis_t)
def test_quad_perspective_recaptures(seed, n, nu, tt):
    rng = np.random.default_rng(seed)
    t, v = _well_conditioned(rng, n), _well_conditioned(rng, n)
    qp = ps.quad_perspective
    assert mf.rel_frobenius(qp(fc.make_catalog_function("pow", [nu]), t, v), ps.quad_geo_mean(t, v, nu)) < 1e-12
    assert mf.rel_frobenius(qp(fc.make_catalog_function("log"), t, v), ps.quad_rel_entropy(t, v)) < 1e-12
    assert mf.rel_frobenius(qp(fc.make_catalog_function("tsallis", [tt]), t, v), ps.quad_tsallis(t, v, tt)) < 1e-12


@given(seeds, dims, st.floats(0.05, 20))
def test_abs_perspective_two_forms(seed, n, s):
    rng = np.random.default_rng(seed)
    t, v = _well_conditioned(rng, n), crandn(rng, n)
    a = ps.abs_perspective(t, v, s)
    b = ps.abs_perspective_inner_form(t, v, s)
    assert mf.rel_frobenius(a, b) < 1e-9
    assert np.linalg.eigvalsh(a)[0] >= -1e-10 * np.linalg.norm(a)
