import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bohrepr import _kernels
from bohrepr.context import MeasurementContext
from bohrepr.eprbohm import build_spin_scenario

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_sessionstart(session):
    _kernels.warmup()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def spin():
    return build_spin_scenario()


@pytest.fixture(scope="session")
def ctx_x(spin):
    return spin.context("sx1")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_context(rng, n, levels=3):
    """Random observable with deliberately repeated eigenvalues and a random state."""
    vals = rng.integers(0, levels, size=n).astype(float)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, _ = np.linalg.qr(z)
    r = q @ np.diag(vals) @ q.conj().T
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return MeasurementContext(psi / np.linalg.norm(psi), (r + r.conj().T) / 2)
