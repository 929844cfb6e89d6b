import numpy as np
import pytest

from coreprune import PruneConfig, TokenGrid


@pytest.fixture
def line_grid():
    """Three 1-D tokens {0, 1, 2} on a 3x1 grid."""
    return TokenGrid(np.array([[0.0], [1.0], [2.0]]), 3, 1, 1)


@pytest.fixture
def constant_grid_2x2():
    return TokenGrid(np.full((4, 3), 5.0), 2, 2, 1)


@pytest.fixture
def corner_grid():
    """W=2, H=2 grid whose embeddings equal the unit-square corners."""
    emb = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    return TokenGrid(emb, 2, 2, 1)


@pytest.fixture
def full_config():
    return PruneConfig(ratio=1.0)


def random_grid(rng, m_choices=(4, 6, 8, 9, 12), d_max=4):
    """Small random grid with valid geometry, for property tests."""
    while True:
        w = int(rng.integers(1, 5))
        h = int(rng.integers(1, 5))
        f = int(rng.integers(1, 3))
        if w * h * f in m_choices or (2 <= w * h * f <= 14):
            break
    d = int(rng.integers(1, d_max + 1))
    emb = rng.normal(size=(w * h * f, d))
    return TokenGrid(emb, w, h, f)
