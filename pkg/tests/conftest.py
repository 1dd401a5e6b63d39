import numpy as np
import pytest

from app.services.state import haar_random_state, make_bipartition


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def random_state():
    return haar_random_state(6, seed=7)


@pytest.fixture
def alternating_cut():
    """Sites 0, 2, 4 of a 6-site chain."""
    return make_bipartition(6, 0b010101)
