import os
import sys

import numpy as np
import pytest

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from simulation import SimConfig  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running simulation tests")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_sim_config():
    """Two classes, 40 bins, 12 spectra: fast enough for full fits."""
    return SimConfig(
        length=40,
        num_spectra=12,
        num_classes=2,
        class_peak_positions=((8, 24), (16, 32)),
        spurious_count_per_spectrum=0,
        noise_sigma=0.05,
        min_width=3,
        seed=7,
    )


@pytest.fixture
def clean_env(monkeypatch):
    monkeypatch.delenv("SPARSEPICK_JOBS", raising=False)
    monkeypatch.delenv("SPARSEPICK_LOG_LEVEL", raising=False)
