from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "opv",
    max_examples=40,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("opv")


def crandn(rng, n):
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)


def rand_herm(rng, n):
    g = crandn(rng, n)
    return (g + g.conj().T) / 2


def rand_pd(rng, n, floor=0.1):
    g = crandn(rng, n)
    return g.conj().T @ g + floor * np.eye(n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# acceptance criteria record one line each here; printed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
