import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd(rng, p, cond=10.0):
    q, _ = np.linalg.qr(rng.normal(size=(p, p)))
    vals = np.exp(rng.uniform(0.0, np.log(cond), p))
    a = (q * vals) @ q.T
    return 0.5 * (a + a.T)


def two_class_data(rng, n=200, p=4, shift=1.5):
    x1 = rng.normal(size=(n, p))
    x2 = rng.normal(size=(n, p)) * np.linspace(0.5, 2.0, p)
    x2[:, 0] += shift
    x = np.vstack([x1, x2])
    y = np.repeat([1, 2], n)
    return x, y
