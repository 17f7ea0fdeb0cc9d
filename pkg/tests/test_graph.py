"""
Tests for weighted digraphs, Laplacians and the R_V / R_epsilon weights.
"""

import numpy as np
import pytest

from conftest import random_connected_graph, random_strongly_connected_digraph, sweep
from core.exceptions import Disconnected, InvalidGraph, NotReachable
from core.graph import (
    WeightedDigraph,
    algebraic_connectivity,
    build_R_epsilon,
    build_RV,
    dominant_left_eigenvector,
    globally_reachable,
    laplacian,
    laplacian_bundle,
)
from core.measures import SemiNormSpec, alpha_ess, semi_measure


class TestWeightedDigraph:
    def test_edge_convention(self):
        g = WeightedDigraph(n=2, edges=((0, 1, 2.5),))
        L = laplacian(g)
        assert np.allclose(L, [[2.5, -2.5], [0.0, 0.0]])

    def test_undirected_laplacian_is_symmetric(self):
        L = laplacian(random_connected_graph(6, seed=3))
        assert np.allclose(L, L.T)
        assert np.allclose(L @ np.ones(6), 0.0)

    @pytest.mark.parametrize("edges", [
        ((0, 0, 1.0),),
        ((0, 1, -1.0),),
        ((0, 5, 1.0),),
        ((0, 1, 1.0), (0, 1, 2.0)),
    ])
    def test_invalid_edges(self, edges):
        with pytest.raises(InvalidGraph):
            WeightedDigraph(n=3, edges=edges)

    def test_from_dict_round_trip(self):
        g = WeightedDigraph.from_dict({'n': 3, 'directed': False, 'edges': [[0, 1, 1.0], [1, 2, 2.0]]})
        assert WeightedDigraph.from_dict(g.to_dict()) == g


class TestReachability:
    def test_directed_path_is_reachable(self):
        g = WeightedDigraph(n=3, edges=((0, 1, 1.0), (1, 2, 1.0)))
        assert globally_reachable(g)

    def test_two_sinks_are_not_reachable(self):
        g = WeightedDigraph(n=3, edges=((0, 1, 1.0), (0, 2, 1.0)))
        assert not globally_reachable(g)
        with pytest.raises(NotReachable):
            laplacian_bundle(g)

    def test_left_eigenvector_of_leader_follower(self):
        # node 0 listens to node 1; node 1 listens to nobody
        v = dominant_left_eigenvector(laplacian(WeightedDigraph(n=2, edges=((0, 1, 1.0),))))
        assert np.allclose(v, [0.0, 1.0])

    def test_left_eigenvector_of_random_digraph(self):
        L = laplacian(random_strongly_connected_digraph(5, seed=7))
        v = dominant_left_eigenvector(L)
        assert np.all(v > 0)
        assert v.sum() == pytest.approx(1.0)
        assert np.allclose(v @ L, 0.0, atol=1e-10)


class TestSpectralWeights:
    def test_complete_graph_lambda2(self, k3):
        assert algebraic_connectivity(laplacian(k3)) == pytest.approx(3.0)

    def test_path_graph_lambda2(self):
        L = laplacian(WeightedDigraph.path(4))
        assert algebraic_connectivity(L) == pytest.approx(2.0 - np.sqrt(2.0))

    def test_rv_has_orthonormal_rows_and_kernel_ones(self):
        L = laplacian(random_connected_graph(5, seed=11))
        r = build_RV(L)
        assert r.shape == (4, 5)
        assert np.allclose(r @ r.T, np.eye(4), atol=1e-10)
        assert np.allclose(r @ np.ones(5), 0.0, atol=1e-10)

    @pytest.mark.parametrize("seed", sweep(200, 5))
    def test_rv_attains_minus_lambda2(self, seed):
        n = 2 + seed % 19
        L = laplacian(random_connected_graph(n, seed=seed))
        lam2 = algebraic_connectivity(L)
        for p in (1, 2, np.inf):
            value = semi_measure(-L, SemiNormSpec(p=p, weight=build_RV(L))).value
            assert value == pytest.approx(-lam2, abs=1e-8), f"p={p}: {value} != {-lam2}"

    def test_disconnected_graph_has_no_rv(self):
        g = WeightedDigraph.undirected(4, [(0, 1, 1.0), (2, 3, 1.0)])
        with pytest.raises(Disconnected):
            build_RV(laplacian(g))

    @pytest.mark.parametrize("eps", [1e-2, 1e-4])
    @pytest.mark.parametrize("seed", sweep(50, 3))
    def test_r_epsilon_on_digraph(self, seed, eps):
        n = 2 + seed % 9
        L = laplacian(random_strongly_connected_digraph(n, seed=seed))
        r = build_R_epsilon(L, epsilon=eps)
        assert r.shape == (n - 1, n)
        assert np.allclose(r @ np.ones(n), 0.0, atol=1e-9)
        value = semi_measure(-L, SemiNormSpec(p=np.inf, weight=r)).value
        assert value <= alpha_ess(-L) + eps + 1e-9

    @pytest.mark.parametrize("eps", [1e-2, 1e-4])
    @pytest.mark.parametrize("seed", sweep(200, 3))
    def test_r_epsilon_on_undirected_graph(self, seed, eps):
        n = 2 + seed % 19
        L = laplacian(random_connected_graph(n, seed=seed))
        r = build_R_epsilon(L, epsilon=eps)
        value = semi_measure(-L, SemiNormSpec(p=np.inf, weight=r)).value
        assert value <= alpha_ess(-L) + eps + 1e-9


def test_bundle_for_undirected_graph(k3):
    bundle = laplacian_bundle(k3)
    assert bundle.lambda2 == pytest.approx(3.0)
    assert bundle.alpha_ess == pytest.approx(-3.0)
    assert np.allclose(bundle.v, np.ones(3) / 3)
    assert bundle.R_V.shape == (2, 3)
