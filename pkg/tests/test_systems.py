"""
Tests for the model zoo: Jacobians, equilibria, conserved quantities,
trajectory rates and limits, and the JSON factory.
"""

import numpy as np
import pytest

from conftest import random_connected_graph, random_strongly_connected_digraph, sweep
from core.exceptions import (
    ConfigError,
    NonConvexCost,
    NonPositiveState,
    NotConnected,
    NotHurwitz,
    NotMetzler,
    UnknownName,
)
from core.graph import WeightedDigraph, algebraic_connectivity, laplacian
from core.integrator import integrate
from evaluation import distance_to, estimate_decay_rate, sync_metrics
from models import (
    affine_averaging,
    affine_flow,
    build_system,
    diffusive_network,
    linear_sync_threshold,
    lotka_volterra,
    primal_dual,
    toy_example,
)
from models.costs import LogSumExpCost, QuadraticCost, QuarticCost, cost_from_dict
from models.dyn_system import finite_difference_jacobian
from models.lotka_volterra import d_lv, log_weak_norm, lv_weight, monitors
from models.networks import nu_star_candidates
from models.toys import cubic_gradient, hopf_oscillator, internal_dynamics

LV_A = [[-2.0, 1.0], [1.0, -2.0]]
LV_R = [1.0, 1.0]


def _jacobian_matches(sys, points, rtol=1e-5, atol=1e-6):
    for x in points:
        exact = sys.jac(0.0, x)
        approx = finite_difference_jacobian(sys, 0.0, x)
        assert np.allclose(exact, approx, rtol=rtol, atol=atol), f"{sys.name}: Jacobian mismatch at {x}"


class TestAffineAveraging:
    def test_k2_limit_with_offset(self, k2):
        sys = affine_averaging(k2, b=[1.0, -1.0])
        assert sys.equilibria.kind == 'affine'
        assert np.allclose(sys.equilibria.point, [0.5, -0.5])
        limit = sys.equilibria.limit_point(np.array([2.0, 0.0]))
        assert np.allclose(limit, [1.5, 0.5])
        assert np.allclose(sys(0.0, limit), 0.0)

    def test_drift_means_no_equilibrium(self, k3):
        sys = affine_averaging(k3, b=[1.0, 1.0, 1.0])
        assert sys.equilibria.exists is False
        assert sys.conserved == {}

    def test_predicted_rate_is_lambda2(self, k3):
        assert affine_averaging(k3).predicted_rate.value == pytest.approx(3.0)

    def test_directed_conservation(self):
        g = random_strongly_connected_digraph(5, seed=2)
        sys = affine_averaging(g)
        x = np.random.default_rng(0).standard_normal(5)
        v = np.asarray(sys.params['v'])
        assert float(v @ sys(0.0, x)) == pytest.approx(0.0, abs=1e-12)

    def test_flow_mirror(self):
        g = random_strongly_connected_digraph(4, seed=9)
        sys = affine_flow(g)
        x = np.random.default_rng(1).standard_normal(4)
        assert float(np.sum(sys(0.0, x))) == pytest.approx(0.0, abs=1e-12)
        limit = sys.equilibria.limit_point(x)
        assert np.allclose(limit, x.sum() * np.asarray(sys.params['v']))


class TestPrimalDual:
    def _system(self):
        g = WeightedDigraph.path(3)
        costs = [QuadraticCost([1.0]), QuadraticCost([2.0], weight=2.0), QuadraticCost([4.0])]
        return primal_dual(g, costs, k=1)

    def test_minimizer(self):
        sys = self._system()
        # (1 + 2*2 + 4) / (1 + 2 + 1)
        assert sys.params['x_star'] == pytest.approx([2.25])

    def test_limit_is_equilibrium(self):
        sys = self._system()
        z0 = np.array([0.0, 1.0, -1.0, 0.3, -0.6, 0.9])
        limit = sys.equilibria.limit_point(z0)
        assert np.allclose(sys(0.0, limit), 0.0, atol=1e-10)
        assert np.allclose(limit[:3], 2.25)
        assert limit[3:].sum() == pytest.approx(z0[3:].sum())

    def test_dual_sum_conserved(self):
        sys = self._system()
        z = np.random.default_rng(3).standard_normal(6)
        assert float(np.sum(sys(0.0, z)[3:])) == pytest.approx(0.0, abs=1e-12)

    def test_jacobian(self):
        g = WeightedDigraph.path(2)
        sys = primal_dual(g, [QuarticCost([0.0], quad_weight=1.0), QuarticCost([1.0], quad_weight=1.0)], k=1)
        _jacobian_matches(sys, np.random.default_rng(4).standard_normal((3, 4)))

    def test_candidates(self):
        cands = nu_star_candidates(np.array([0.0, 0.0, 1.0, 3.0]), n=2, k=1)
        assert np.allclose(cands['sum'], [4.0, 4.0])
        assert np.allclose(cands['mean'], [2.0, 2.0])

    def test_nonconvex_cost_rejected(self):
        # the sum is convex, the first term is not
        costs = [QuadraticCost([0.0], weight=-1.0), QuadraticCost([1.0], weight=3.0)]
        with pytest.raises(NonConvexCost):
            primal_dual(WeightedDigraph.path(2), costs, k=1)

    def test_directed_graph_rejected(self):
        g = WeightedDigraph(n=2, edges=((0, 1, 1.0), (1, 0, 1.0)))
        with pytest.raises(NotConnected):
            primal_dual(g, [QuadraticCost([0.0]), QuadraticCost([1.0])], k=1)

    def test_single_node_is_gradient_flow(self):
        sys = primal_dual(WeightedDigraph(n=1, edges=()), [QuadraticCost([3.0], weight=2.0)], k=1)
        assert sys.params['x_star'] == pytest.approx([3.0])
        assert sys(0.0, np.array([1.0, 0.7])) == pytest.approx([4.0, 0.0])
        assert sys.predicted_rate.value == pytest.approx(2.0)
        assert sys.equilibria.limit_point(np.array([1.0, 0.7])) == pytest.approx([3.0, 0.7])


class TestDiffusiveNetwork:
    def test_sync_subspace_is_invariant(self, k3):
        sys = diffusive_network(k3, hopf_oscillator(1.0, 1.0))
        u = np.array([0.3, -0.2])
        x = np.tile(u, 3)
        fx = sys(0.0, x)
        assert np.allclose(fx.reshape(3, 2) - fx.reshape(3, 2)[0], 0.0)

    def test_jacobian(self):
        g = random_connected_graph(3, seed=5)
        sys = diffusive_network(g, hopf_oscillator(0.5, 2.0))
        _jacobian_matches(sys, np.random.default_rng(6).standard_normal((3, 6)))

    def test_linear_predicted_rate(self, k3):
        sys = diffusive_network(k3, internal_dynamics('linear', {'A': [[-0.5, 1.0], [-1.0, -0.5]]}))
        assert sys.predicted_rate.value == pytest.approx(3.0 - (-0.5))

    def test_hopf_bound(self):
        hopf = hopf_oscillator(beta=1.0, omega=3.0)
        rng = np.random.default_rng(7)
        for x in rng.uniform(-2.0, 2.0, (50, 2)):
            herm = 0.5 * (hopf.jac(0.0, x) + hopf.jac(0.0, x).T)
            assert np.max(np.linalg.eigvalsh(herm)) <= 1.0 + 1e-12

    def test_cubic_gradient(self):
        _jacobian_matches(cubic_gradient(2), np.random.default_rng(8).standard_normal((3, 2)))


class TestLotkaVolterra:
    def test_equilibrium_and_weight(self):
        sys = lotka_volterra(LV_A, LV_R)
        assert np.allclose(sys.params['x_star'], [1.0, 1.0])
        v = lv_weight(LV_A)
        assert np.allclose(v, [1.0, 1.0])
        assert np.allclose(v @ np.asarray(LV_A), [-1.0, -1.0])

    def test_jacobian(self):
        sys = lotka_volterra(LV_A, LV_R)
        _jacobian_matches(sys, np.random.default_rng(9).uniform(0.2, 3.0, (4, 2)))

    def test_log_chart(self):
        sys = lotka_volterra(LV_A, LV_R)
        x = np.array([0.5, 2.0])
        y = sys.chart.to_chart(x)
        assert np.allclose(sys.chart.from_chart(y), x)
        assert np.allclose(sys.chart.system(0.0, y), sys(0.0, x) / x)
        with pytest.raises(NonPositiveState):
            sys.chart.to_chart(np.array([1.0, -1.0]))

    def test_log_norm_is_weighted_l1(self):
        s = log_weak_norm(lotka_volterra(LV_A, LV_R))
        assert s.p == 1.0
        assert np.allclose(s.weight, np.eye(2))

    def test_monitors(self):
        sys = lotka_volterra(LV_A, LV_R)
        first, second = monitors(sys)
        assert first(np.array([1.0, 1.0])) == pytest.approx(0.0)
        assert second(np.array([1.0, 1.0])) == pytest.approx(0.0)
        assert d_lv([1.0, np.e], [1.0, 1.0], [1.0, 2.0]) == pytest.approx(2.0)

    def test_not_metzler(self):
        with pytest.raises(NotMetzler):
            lotka_volterra([[-1.0, -0.5], [0.0, -1.0]], [1.0, 1.0])

    def test_not_hurwitz(self):
        sys = lotka_volterra([[0.0, 1.0], [1.0, 0.0]], [1.0, 1.0])
        assert sys.equilibria.kind == 'unknown'
        with pytest.raises(NotHurwitz):
            log_weak_norm(sys)


class TestToys:
    def test_names(self):
        for name in ('semi_only', 'weak_only', 'linear_2x2'):
            assert toy_example(name).name == name
        with pytest.raises(UnknownName):
            toy_example('nope')

    def test_semi_only_jacobian(self):
        _jacobian_matches(toy_example('semi_only'), np.random.default_rng(10).standard_normal((4, 2)))

    def test_weak_only_conserves_norm(self):
        sys = toy_example('weak_only')
        x = np.array([0.6, -0.8])
        assert float(x @ sys(0.0, x)) == pytest.approx(0.0)


class TestLogSumExpCost:
    A_ROWS = [[1.0, 0.5], [-0.5, 2.0], [0.0, -1.0]]

    def test_value_at_origin(self):
        cost = LogSumExpCost(self.A_ROWS, b=[0.0, np.log(2.0), 0.0])
        # log(1 + 2 + 1)
        assert cost.value(np.zeros(2)) == pytest.approx(np.log(4.0))
        assert cost.grad(np.zeros(2)) == pytest.approx([0.0, 0.875])

    def test_derivatives_match_finite_differences(self):
        cost = LogSumExpCost(self.A_ROWS, b=[0.1, -0.2, 0.3], quad_weight=0.5)
        h = 1e-6
        for x in np.random.default_rng(11).standard_normal((5, 2)):
            fd_grad = [(cost.value(x + h * e) - cost.value(x - h * e)) / (2 * h) for e in np.eye(2)]
            fd_hess = np.column_stack([(cost.grad(x + h * e) - cost.grad(x - h * e)) / (2 * h) for e in np.eye(2)])
            assert cost.grad(x) == pytest.approx(fd_grad, abs=1e-6)
            assert np.allclose(cost.hess(x), fd_hess, atol=1e-6)
            assert np.min(np.linalg.eigvalsh(cost.hess(x))) >= 0.5 - 1e-12

    def test_round_trip(self):
        cost = LogSumExpCost(self.A_ROWS, quad_weight=1.0)
        again = cost_from_dict(cost.to_dict())
        assert isinstance(again, LogSumExpCost)
        x = np.array([0.4, -1.2])
        assert again.value(x) == pytest.approx(cost.value(x))

    def test_primal_dual_equilibrium(self):
        costs = [LogSumExpCost(self.A_ROWS, quad_weight=1.0), LogSumExpCost(self.A_ROWS, b=[1.0, 0.0, -1.0])]
        sys = primal_dual(WeightedDigraph.path(2), costs, k=2)
        x_star = np.asarray(sys.params['x_star'])
        assert np.allclose(costs[0].grad(x_star) + costs[1].grad(x_star), 0.0, atol=1e-10)
        z0 = np.random.default_rng(12).standard_normal(8)
        assert np.allclose(sys(0.0, sys.equilibria.limit_point(z0)), 0.0, atol=1e-9)
        _jacobian_matches(sys, np.random.default_rng(13).standard_normal((3, 8)))


class TestAveragingTrajectories:
    @staticmethod
    def _balanced(weights, rng):
        r = rng.standard_normal(weights.shape[0])
        return r - (weights @ r) / weights.sum()

    @pytest.mark.parametrize('seed', sweep(50, 3))
    def test_rate_and_limit_on_graphs(self, seed):
        rng = np.random.default_rng(seed)
        g = random_connected_graph(3 + seed % 6, seed=seed)
        n = g.n
        v = np.asarray(affine_averaging(g).params['v'])
        sys = affine_averaging(g, b=self._balanced(v, rng))
        rate = sys.predicted_rate.value
        fiedler = np.linalg.eigh(laplacian(g))[1][:, 1]
        # a dominant Fiedler component keeps faster modes out of the fit
        x0 = fiedler + 0.01 * rng.standard_normal(n) + rng.standard_normal()
        traj = integrate(sys, x0, 20.0 / rate, samples=400)
        limit = sys.equilibria.limit_point(x0)
        assert estimate_decay_rate(traj, distance_to(limit, 2)).matches(rate, 0.05)
        assert np.allclose(traj.final_state, limit, atol=1e-6)

    @pytest.mark.parametrize('seed', sweep(50, 3))
    def test_limits_on_digraphs(self, seed):
        rng = np.random.default_rng(seed)
        g = random_strongly_connected_digraph(3 + seed % 6, seed=seed)
        v = np.asarray(affine_averaging(g).params['v'])
        x0 = rng.standard_normal(g.n)
        for sys in (affine_averaging(g, b=self._balanced(v, rng)),
                    affine_flow(g, b=self._balanced(np.ones(g.n), rng))):
            assert sys.equilibria.kind == 'affine'
            traj = integrate(sys, x0, 30.0 / sys.predicted_rate.value)
            assert np.allclose(traj.final_state, sys.equilibria.limit_point(x0), atol=1e-6)

    @pytest.mark.parametrize('seed', sweep(50, 3))
    def test_drift_is_unbounded(self, seed):
        rng = np.random.default_rng(seed)
        n = 3 + seed % 6
        g = random_connected_graph(n, seed=seed) if seed % 2 else random_strongly_connected_digraph(n, seed=seed)
        v = np.asarray(affine_averaging(g).params['v'])
        sys = affine_averaging(g, b=self._balanced(v, rng) + 1.0)
        assert sys.equilibria.exists is False
        x0 = rng.standard_normal(n)
        traj = integrate(sys, x0, 1000.0)
        assert np.linalg.norm(traj.final_state) > 100 * np.linalg.norm(x0)


PD_GRAPHS = {'K2': WeightedDigraph.complete(2), 'K3': WeightedDigraph.complete(3), 'path4': WeightedDigraph.path(4)}


def _pd_costs(kind, n):
    if kind == 'quadratic':
        return [QuadraticCost([c], weight=w) for c, w in zip([0.0, 1.0, 2.0, 4.0], [1.0, 2.0, 1.0, 0.5][:n])]
    return [QuarticCost([c]) for c in [0.0, 1.0, 3.0, 4.0][:n]]


class TestPrimalDualTrajectories:
    @pytest.mark.parametrize('cost', ['quadratic', 'quartic'])
    @pytest.mark.parametrize('graph', sorted(PD_GRAPHS))
    def test_converges_at_saddle_rate(self, graph, cost):
        g = PD_GRAPHS[graph]
        n = g.n
        sys = primal_dual(g, _pd_costs(cost, n), k=1)
        z0 = sys.equilibria.point + 0.1 * np.random.default_rng(n).standard_normal(2 * n)
        limit = sys.equilibria.limit_point(z0)
        rate = sys.predicted_rate.value
        traj = integrate(sys, z0, 25.0 / rate, samples=1000)

        # modal coordinates of the saddle matrix remove the oscillation of complex modes
        _, vecs = np.linalg.eig(sys.jac(0.0, limit))
        modal = lambda z: float(np.linalg.norm(np.linalg.solve(vecs, z - limit)))
        fit = estimate_decay_rate(traj, modal, floor=1e-5 * modal(z0))
        assert fit.matches(rate, 0.10)
        assert np.allclose(traj.final_state[:n], sys.params['x_star'][0], atol=1e-5)
        sums = traj.states[:, n:].sum(axis=1)
        assert np.max(np.abs(sums - sums[0])) <= 1e-8


SYNC_GRAPHS = {'K3': WeightedDigraph.complete(3), 'path4': WeightedDigraph.path(4), 'star5': WeightedDigraph.star(5)}


class TestSynchronization:
    K = 2

    def _start(self, g, seed):
        rng = np.random.default_rng(seed)
        fiedler = np.linalg.eigh(laplacian(g))[1][:, 1]
        return (np.kron(fiedler, [1.0, -0.5]) + 0.01 * rng.standard_normal(g.n * self.K)
                + np.tile(rng.standard_normal(self.K), g.n))

    @pytest.mark.parametrize('fraction', [-0.5, 0.25])
    @pytest.mark.parametrize('graph', sorted(SYNC_GRAPHS))
    def test_linear_threshold_below(self, graph, fraction):
        g = SYNC_GRAPHS[graph]
        lambda2 = algebraic_connectivity(laplacian(g))
        a = fraction * lambda2 * np.eye(self.K)
        sys = diffusive_network(g, internal_dynamics('linear', {'A': a.tolist()}))
        rate = linear_sync_threshold(a, lambda2)
        assert rate == pytest.approx((1.0 - fraction) * lambda2)
        assert sys.predicted_rate.value == pytest.approx(rate)
        traj = integrate(sys, self._start(g, 1), 15.0 / rate, samples=600)
        series = sync_metrics(traj, g.n, self.K)
        assert estimate_decay_rate(traj, values=series.disagreement).matches(rate, 0.10)

    @pytest.mark.parametrize('graph', sorted(SYNC_GRAPHS))
    def test_linear_threshold_above(self, graph):
        g = SYNC_GRAPHS[graph]
        lambda2 = algebraic_connectivity(laplacian(g))
        a = (lambda2 + 0.5) * np.eye(self.K)
        assert linear_sync_threshold(a, lambda2) == pytest.approx(-0.5)
        sys = diffusive_network(g, internal_dynamics('linear', {'A': a.tolist()}))
        traj = integrate(sys, self._start(g, 2), 5.0)
        series = sync_metrics(traj, g.n, self.K)
        assert series.disagreement[-1] > 5.0 * series.disagreement[0]

    @pytest.mark.parametrize('seed', sweep(20, 3))
    def test_hopf_network_pairwise_rate(self, seed):
        rng = np.random.default_rng(seed)
        g = random_connected_graph(3 + seed % 4, seed=seed)
        lambda2 = algebraic_connectivity(laplacian(g))
        beta = 0.5 * lambda2
        c = lambda2 - beta
        sys = diffusive_network(g, hopf_oscillator(beta, 1.0 + seed % 3))
        traj = integrate(sys, rng.uniform(-1.0, 1.0, 2 * g.n), 12.0 / c, samples=600)
        series = sync_metrics(traj, g.n, 2)
        assert estimate_decay_rate(traj, values=series.max_pairwise).rate >= 0.9 * c


def _jacobian_models():
    rng = np.random.default_rng(11)
    quartic = [QuarticCost([0.0, 1.0], quad_weight=0.5), QuarticCost([1.0, -1.0]),
               LogSumExpCost([[1.0, 0.5], [-0.5, 2.0]], quad_weight=0.2)]
    return {
        'affine_flow': (affine_flow(random_strongly_connected_digraph(4, seed=3), b=[1.0, 0.0, -1.0, 0.0]),
                        rng.standard_normal((50, 4))),
        'primal_dual': (primal_dual(WeightedDigraph.path(3), quartic, k=2), 1.5 * rng.standard_normal((50, 12))),
        'hopf_network': (diffusive_network(random_connected_graph(4, seed=4), hopf_oscillator(0.7, 2.0)),
                         1.5 * rng.standard_normal((50, 8))),
        'cubic_network': (diffusive_network(WeightedDigraph.complete(3), cubic_gradient(2)),
                          1.5 * rng.standard_normal((50, 6))),
        'lotka_volterra': (lotka_volterra([[-2.0, 0.5, 0.2], [0.3, -1.5, 0.4], [0.1, 0.6, -2.5]], [1.0, 0.5, 2.0]),
                           rng.uniform(0.1, 3.0, (50, 3))),
        'semi_only': (toy_example('semi_only'), 2.0 * rng.standard_normal((50, 2))),
    }


JACOBIAN_MODELS = _jacobian_models()


@pytest.mark.parametrize('name', sorted(JACOBIAN_MODELS))
def test_jacobian_at_random_points(name):
    sys, points = JACOBIAN_MODELS[name]
    _jacobian_matches(sys, points)


class TestFactory:
    def test_averaging(self):
        sys = build_system({'model': 'affine_averaging', 'graph': {'n': 2, 'directed': False,
                                                                   'edges': [[0, 1, 1.0]]},
                            'params': {'b': [1.0, -1.0]}})
        assert sys.name == 'affine_averaging'
        assert np.allclose(sys.equilibria.point, [0.5, -0.5])

    def test_primal_dual_costs(self):
        costs = [{'type': 'quadratic', 'center': [0.0]}, {'type': 'quadratic', 'center': [2.0]}]
        sys = build_system({'model': 'primal_dual', 'graph': {'n': 2, 'directed': False, 'edges': [[0, 1, 1.0]]},
                            'params': {'costs': costs}})
        assert sys.dim == 4
        assert sys.params['x_star'] == pytest.approx([1.0])

    def test_toy_forms(self):
        assert build_system({'model': 'toy:weak_only'}).name == 'weak_only'
        assert build_system({'model': 'toy', 'name': 'semi_only'}).name == 'semi_only'

    def test_diffusive(self):
        sys = build_system({'model': 'diffusive_network',
                            'graph': {'n': 3, 'directed': False, 'edges': [[0, 1, 1.0], [1, 2, 1.0], [0, 2, 1.0]]},
                            'params': {'internal': {'name': 'hopf', 'params': {'beta': 1.0}}}})
        assert sys.dim == 6
        assert sys.params['lambda2'] == pytest.approx(3.0)

    def test_missing_pieces(self):
        with pytest.raises(ConfigError):
            build_system({'model': 'affine_averaging'})
        with pytest.raises(ConfigError):
            build_system({'model': 'lotka_volterra', 'params': {'A': LV_A}})
        with pytest.raises(UnknownName):
            build_system({'model': 'unknown_model'})

    def test_cost_from_dict(self):
        assert cost_from_dict({'type': 'quartic', 'center': [1.0, 2.0]}).dim == 2
        with pytest.raises(UnknownName):
            cost_from_dict({'type': 'cubic'})
