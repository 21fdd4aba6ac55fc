"""Seeded random instances.

Every trial draws from its own generator seeded by
``(campaign seed, crc32(record id), dim, trial index)``, so a trial can be
replayed in isolation and the schedule of a campaign cannot change its
results.
"""

from __future__ import annotations

import zlib

import numpy as np

from .. import matfun as mf
from ..errors import GenerationExhausted

MAX_RESAMPLES = 100
# Conditioning cap used when generating campaign instances. The library
# guard (matfun.KAPPA_MAX) is far looser; see the decisions ledger.
GEN_KAPPA = 30.0


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trial_seed(seed: int, record_id: str, dim: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), zlib.crc32(record_id.encode("utf-8")), int(dim), int(index)])


def trial_rng(seed: int, record_id: str, dim: int, index: int) -> np.random.Generator:
    return np.random.default_rng(trial_seed(seed, record_id, dim, index))


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def gen_invertible(n: int, seed, kappa_max: float = GEN_KAPPA, diagonal: bool = False) -> np.ndarray:
    """Complex Gaussian matrix with condition number at most ``kappa_max``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = as_generator(seed)
    for _ in range(MAX_RESAMPLES):
        if diagonal:
            g = np.diag(_complex_gaussian(rng, n))
        else:
            g = _complex_gaussian(rng, (n, n))
        if np.all(np.isfinite(g)) and mf.condition_number(g) <= kappa_max:
            return g
    raise GenerationExhausted(f"no {n}x{n} matrix with condition <= {kappa_max} after {MAX_RESAMPLES} draws")


def gen_singular(n: int, seed, diagonal: bool = False) -> np.ndarray:
    """A rank ``n - 1`` matrix (the zero matrix when ``n == 1``)."""
    rng = as_generator(seed)
    g = gen_invertible(n, rng, diagonal=diagonal)
    if diagonal:
        d = np.diag(g).copy()
        d[rng.integers(n)] = 0.0
        return np.diag(d)
    u, s, wh = np.linalg.svd(g)
    s[-1] = 0.0
    return (u * s) @ wh


def gen_pd(n: int, seed, diagonal: bool = False) -> np.ndarray:
    """``G* G + eps 1`` with ``eps = 1e-3 ||G* G||`` and ``G`` complex Gaussian."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = as_generator(seed)
    if diagonal:
        g = np.diag(_complex_gaussian(rng, n))
    else:
        g = _complex_gaussian(rng, (n, n))
    a = mf.abs2(g)
    eps = 1e-3 * float(np.linalg.eigvalsh(a)[-1])  # spectral norm of a PSD matrix
    return mf.hermitian_part(a + eps * np.eye(n))


def gen_unit_vector(n: int, seed) -> np.ndarray:
    rng = as_generator(seed)
    while True:
        x = _complex_gaussian(rng, n)
        nrm = np.linalg.norm(x)
        if nrm > 1e-8:
            return x / nrm
