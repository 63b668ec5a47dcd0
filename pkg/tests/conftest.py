import itertools

import numpy as np
import pytest

from stinopt.graph import WeightedGraph


def random_graph(rng, n, p, wlo=0.0, whi=1.0, decimals=3):
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]
    weights = np.round(rng.uniform(wlo, whi, n), decimals)
    return WeightedGraph(n, weights, edges)


def cycle(n, weights=None):
    return WeightedGraph(n, weights if weights is not None else [1.0] * n,
                         [(i, (i + 1) % n) for i in range(n)])


def path(n, weights=None):
    return WeightedGraph(n, weights if weights is not None else [1.0] * n,
                         [(i, i + 1) for i in range(n - 1)])


def complete(n, weights=None):
    return WeightedGraph(n, weights if weights is not None else [1.0] * n,
                         list(itertools.combinations(range(n), 2)))


def ladder(k, weights=None):
    """2 x k grid: vertices 0..k-1 on the top row, k..2k-1 below."""
    edges = [(i, i + 1) for i in range(k - 1)] + [(k + i, k + i + 1) for i in range(k - 1)]
    edges += [(i, k + i) for i in range(k)]
    return WeightedGraph(2 * k, weights if weights is not None else [1.0] * (2 * k), edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
