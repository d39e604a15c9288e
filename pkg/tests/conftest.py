"""Shared fixtures: small frozen graphs and a seeded random-graph factory."""

import numpy as np
import pytest

from graphvar import VertexFunction, WeightedGraph


@pytest.fixture
def path3():
    """Unit path a - b - c: all weights and measures 1."""
    return WeightedGraph([("a", "b", 1.0), ("b", "c", 1.0)])


@pytest.fixture
def bump(path3):
    """The function (0, 1, 0) on the unit path."""
    return VertexFunction({"a": 0.0, "b": 1.0, "c": 0.0})


def random_graph(rng: np.random.Generator, n: int, extra_edges: int | None = None) -> WeightedGraph:
    """Connected graph on n vertices: random spanning tree plus extra edges.

    Weights in [0.5, 2], measures in [0.5, 2]; vertex ids g00, g01, ...
    """
    width = len(str(n - 1))
    ids = [f"g{i:0{width}d}" for i in range(n)]
    edges = {}
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges[(min(i, j), max(i, j))] = float(rng.uniform(0.5, 2.0))
    if extra_edges is None:
        extra_edges = int(rng.integers(0, n))
    for _ in range(extra_edges):
        i, j = rng.integers(0, n, size=2)
        if i != j:
            key = (min(int(i), int(j)), max(int(i), int(j)))
            edges.setdefault(key, float(rng.uniform(0.5, 2.0)))
    measure = {x: float(rng.uniform(0.5, 2.0)) for x in ids}
    return WeightedGraph([(ids[i], ids[j], w) for (i, j), w in edges.items()], measure)


def random_function(rng: np.random.Generator, graph: WeightedGraph, scale: float = 1.0):
    return VertexFunction.from_array(graph, scale * rng.standard_normal(len(graph)))
