import numpy as np
import pytest

from metric_atlas.spaces import DiscreteDistribution, RealAtomicDistribution


def random_atomic(rng, max_atoms=8, scale=2.0, positions=None):
    m = int(rng.integers(1, max_atoms))
    if positions is None:
        positions = np.sort(rng.normal(size=m) * scale)
    else:
        m = len(positions)
    return RealAtomicDistribution(positions, rng.dirichlet(np.ones(m)))


def random_pair_on(space, rng, sparsity=0.0):
    def draw():
        p = rng.dirichlet(np.ones(space.n))
        if sparsity > 0:
            drop = rng.random(space.n) < sparsity
            drop[int(np.argmax(p))] = False
            p = np.where(drop, 0.0, p)
            p = p / p.sum()
        return DiscreteDistribution(space, p)
    return draw(), draw()


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
