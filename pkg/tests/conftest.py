"""
Shared fixtures: seeded random graphs and small matrices.
"""

import json

import numpy as np
import pytest

from core.graph import WeightedDigraph


def random_connected_graph(n: int, seed: int, p: float = 0.3) -> WeightedDigraph:
    """Undirected: random spanning tree plus extra edges with probability p, weights in (0.5, 2)."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    edges = {}
    for idx in range(1, n):
        i, j = int(order[idx]), int(order[rng.integers(idx)])
        edges[(min(i, j), max(i, j))] = rng.uniform(0.5, 2.0)
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < p:
                edges[(i, j)] = rng.uniform(0.5, 2.0)
    return WeightedDigraph.undirected(n, [(i, j, w) for (i, j), w in sorted(edges.items())])


def random_strongly_connected_digraph(n: int, seed: int, p: float = 0.3) -> WeightedDigraph:
    """Directed cycle plus extra directed edges with probability p, weights in (0.5, 2)."""
    rng = np.random.default_rng(seed)
    edges = {(i, (i + 1) % n): rng.uniform(0.5, 2.0) for i in range(n)}
    for i in range(n):
        for j in range(n):
            if i != j and (i, j) not in edges and rng.random() < p:
                edges[(i, j)] = rng.uniform(0.5, 2.0)
    return WeightedDigraph(n=n, edges=tuple((i, j, w) for (i, j), w in sorted(edges.items())))


def sweep(count: int, fast: int) -> list:
    """Seeds 0..count-1; seeds from `fast` on only run with -m slow."""
    return [seed if seed < fast else pytest.param(seed, marks=pytest.mark.slow) for seed in range(count)]


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def well_conditioned(n: int, rng: np.random.Generator) -> np.ndarray:
    """Q1 diag(s) Q2 with s in [0.5, 2], so the condition number is at most 4."""
    return random_orthogonal(n, rng) @ np.diag(rng.uniform(0.5, 2.0, n)) @ random_orthogonal(n, rng)


def invariant_kernel_instance(n: int, k: int, seed: int):
    """
    Random (A, R, M) with R of shape k x n, Ker(R) invariant under A and R A R† similar to M.

    In an orthonormal basis whose first k vectors span Ker(R)-perp, A is block
    lower triangular with leading block M.
    """
    rng = np.random.default_rng(seed)
    q = random_orthogonal(n, rng)
    blocks = rng.standard_normal((n, n))
    blocks[:k, k:] = 0.0
    a = q @ blocks @ q.T
    r = well_conditioned(k, rng) @ q[:, :k].T
    return a, r, blocks[:k, :k].copy()


@pytest.fixture
def k3():
    return WeightedDigraph.complete(3)


@pytest.fixture
def k2():
    return WeightedDigraph.complete(2)


@pytest.fixture
def write_json(tmp_path):
    """Write a JSON document under tmp_path and return its path as a string."""
    def _write(name, data):
        target = tmp_path / name
        target.write_text(json.dumps(data), encoding='utf-8')
        return str(target)
    return _write
