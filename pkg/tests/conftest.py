"""Shared test fixtures for the C-DEIM toolkit test suite."""

import numpy as np
import pytest

import config.settings as _settings_mod
from reconstruction.basis import assemble_bundle, cpqr_select
from reconstruction.penalty import BoundsSpec


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run full-scale acceptance experiments")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-scale experiment, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Point output and log directories at a temp dir; reload settings per test."""
    monkeypatch.setenv("CDEIM_OUTPUT_DIR", str(tmp_path / "runs"))
    monkeypatch.setenv("LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("LOG_LEVEL", "WARNING")
    _settings_mod.invalidate_settings()
    yield
    _settings_mod.invalidate_settings()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def orthonormal_basis(rng):
    """30 x 6 basis with orthonormal columns."""
    q, _ = np.linalg.qr(rng.standard_normal((30, 6)))
    return q


@pytest.fixture
def square_bundle(orthonormal_basis):
    """Bundle with m = r = 6 sensors chosen by CPQR."""
    return assemble_bundle(orthonormal_basis, cpqr_select(orthonormal_basis, 6))


@pytest.fixture
def unit_bounds():
    return BoundsSpec(-1.0, 1.0)


def bounded_snapshots(rng, n: int = 40, n_snapshots: int = 60, modes: int = 8) -> np.ndarray:
    """Smooth random fields rescaled into [0, 1], one per column."""
    x = np.linspace(0.0, 1.0, n)
    k = np.arange(1, modes + 1)
    coeffs = rng.standard_normal((modes, n_snapshots)) / k[:, None]
    fields = np.sin(np.pi * np.outer(x, k)) @ coeffs
    lo, hi = fields.min(axis=0), fields.max(axis=0)
    return (fields - lo) / (hi - lo)


@pytest.fixture
def bounded_fields(rng):
    return bounded_snapshots(rng)
