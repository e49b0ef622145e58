import numpy as np
import pytest

from qforge import Profile


def random_profile(rng, n, zero_prob=0.0, prefix="c"):
    """Dirichlet(1) profile; each entry independently zeroed with ``zero_prob``."""
    while True:
        w = rng.dirichlet(np.ones(n))
        if zero_prob:
            w[rng.random(n) < zero_prob] = 0.0
        if w.sum() > 0:
            return Profile.from_values(w / w.sum(), prefix=prefix)


def random_instance(rng, n_max=20, q_zero_prob=0.2):
    """A (q, p) pair with support(q) inside support(p) = everything."""
    n = int(rng.integers(2, n_max + 1))
    return random_profile(rng, n, q_zero_prob), random_profile(rng, n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def two_cat():
    return Profile.from_values([0.9, 0.1]), Profile.from_values([0.5, 0.5])
