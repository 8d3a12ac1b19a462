import numpy as np
import pytest

from bubblelab import torus as T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def band_limited(rng, n, kmax=4, comps=None):
    shape = (n, n) if comps is None else (n, n, comps)
    return T.lowpass(rng.standard_normal(shape), kmax)


def smooth_sphere_field(n, kmax=2, seed=0, amplitude=0.6):
    """A smooth degree-zero unit field with nontrivial gradients."""
    rng = np.random.default_rng(seed)
    u = np.zeros((n, n, 3))
    u[..., 2] = 1.0
    u += amplitude * band_limited(rng, n, kmax, 3) / 0.3
    return u / np.linalg.norm(u, axis=-1, keepdims=True)
