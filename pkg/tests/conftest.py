import numpy as np
import pytest

from cdmadet.core import SystemParams
from cdmadet.montecarlo import derive_rng


def complex_randn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return derive_rng(20260810)


@pytest.fixture(scope="session")
def toy_params():
    """Small-dimension setting: window 8, channel-vector length 6."""
    return SystemParams(N=4, M=1, L=2, P=1, Q=16, K=3, alpha=0.3, fd=0.05,
                        snr=50.0, sir=1.0)


@pytest.fixture(scope="session")
def default_params():
    """Full-scale setting: window 60, channel-vector length 46."""
    return SystemParams(N=15, M=2, L=2, P=4, Q=120, K=3, alpha=0.3, fd=0.01,
                        snr=10.0 ** 1.8, sir=1.0)
