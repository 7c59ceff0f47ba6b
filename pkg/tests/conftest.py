import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd_jet(rng, n, scale=0.2):
    """A random well-conditioned metric 2-jet (not integrable, fine for
    algebra-only tests that never differentiate the jet further)."""
    from rg2lab.geometry import MetricJet2

    a = rng.normal(size=(n, n))
    g = np.eye(n) + scale * (a + a.T)
    dg = scale * rng.normal(size=(n, n, n))
    dg = 0.5 * (dg + dg.transpose(0, 2, 1))
    d2g = scale * rng.normal(size=(n, n, n, n))
    d2g = 0.5 * (d2g + d2g.transpose(0, 1, 3, 2))
    d2g = 0.5 * (d2g + d2g.transpose(1, 0, 2, 3))
    return MetricJet2(g, dg, d2g)
