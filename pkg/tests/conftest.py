import numpy as np
import pytest

from graphqft.graphs import Graph


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_multigraph(rng: np.random.Generator, n_max: int = 6, allow_loops: bool = True) -> Graph:
    n = int(rng.integers(1, n_max + 1))
    ids = [f"v{i}" for i in range(n)]
    edges = []
    for i in range(n):
        for j in range(i, n):
            if i == j:
                if allow_loops and rng.random() < 0.15:
                    edges.append((ids[i], ids[i]))
                continue
            r = rng.random()
            if r < 0.45:
                edges.append((ids[i], ids[j]))
            if r < 0.12:
                edges.append((ids[i], ids[j]))
    return Graph(ids, edges)


@pytest.fixture
def graph_corpus(rng):
    return [random_multigraph(rng) for _ in range(25)]
