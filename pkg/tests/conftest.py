from functools import lru_cache

import pytest

from ramsey_locc.states import random_coloring, realize


@lru_cache(maxsize=None)
def realized(n: int, r: int, seed: int):
    return realize(random_coloring(n, r, seed), seed=seed)


@pytest.fixture
def make_set():
    return realized
