import numpy as np
import pytest

from dnlkg.ground_state import ModelParams, compute_constants
from dnlkg.spectrum import cached_spectral_data


@pytest.fixture(scope="session")
def spectral_p3():
    """Spectral data for the reference case p=3, alpha=1 on the stated grid."""
    return cached_spectral_data(3.0, 1.0, half_width=40.0, n=8192)


@pytest.fixture(scope="session")
def consts_p3():
    return compute_constants(ModelParams(alpha=1.0, p=3.0))


@pytest.fixture()
def rng():
    return np.random.default_rng(20260809)


def random_smooth_field(rng, x, n_bumps=6, width_range=(0.8, 3.0), span=12.0):
    """Sum of random Gaussian bumps, exponentially localized."""
    out = np.zeros_like(x)
    for _ in range(n_bumps):
        center = rng.uniform(-span, span)
        width = rng.uniform(*width_range)
        amp = rng.normal()
        out += amp * np.exp(-((x - center) / width) ** 2)
    return out
