"""Shared fixtures."""

import numpy as np
import pytest

from halfpack.core.model import Configuration, ItemType, ModelParams


@pytest.fixture
def half_params():
    """r = 4, p1 = p2 = 1/2: p1 r = 2, (p1 + 2 p2) r = 6."""
    return ModelParams.from_p1(4, 0.5)


@pytest.fixture
def optimal_config():
    """Optimal layout for r = 4, p1 = p2 = 1/2: '11' then '2222'."""
    return Configuration.from_layout(
        [(ItemType.ONE, 0), (ItemType.ONE, 1), (ItemType.TWO, 2), (ItemType.TWO, 4)]
    )


def random_configuration(rng: np.random.Generator, cells: int, fill: float = 0.6):
    """Random layout over roughly ``cells`` cells, built left to right."""
    layout = []
    cell = 0
    while cell < cells:
        u = rng.random()
        if u < fill / 2:
            layout.append((ItemType.ONE, cell))
            cell += 1
        elif u < fill:
            layout.append((ItemType.TWO, cell))
            cell += 2
        else:
            cell += 1 + int(rng.integers(0, 3))
    return Configuration.from_layout(layout)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_random_config():
    return random_configuration
