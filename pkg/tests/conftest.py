import numpy as np
import pytest

from symevol.model import ModelParams


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def params12():
    """Canonical 1:2 coefficients at eps = 0.1, n = 2."""
    return ModelParams(a1=1.0, a2=1.0, a3=0.75, a4=1.5, omega=2.0, epsilon=0.1, n=2)


def random_polar(rng, tau_max=2.0):
    """Non-degenerate polar point [r1, psi1, r2, psi2, tau]."""
    return np.array([
        rng.uniform(0.2, 1.3),
        rng.uniform(-3.0, 3.0),
        rng.uniform(0.2, 1.3),
        rng.uniform(-3.0, 3.0),
        rng.uniform(0.0, tau_max),
    ])
