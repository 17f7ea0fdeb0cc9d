"""
Tests for trajectory-level verification: Coppel sandwich, pairwise
contraction, decay checks, Lyapunov monitors and the dichotomy check.
"""

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import invariant_kernel_instance, random_orthogonal, sweep, well_conditioned
from core.exceptions import ContraktInputError, KernelNotInvariant
from core.graph import build_RV, laplacian
from core.integrator import integrate, integrate_many
from core.measures import SemiNormSpec, seminorm
from evaluation import (
    contraction_pairwise_check,
    coppel_verify,
    dichotomy_probe,
    lyapunov_monitor,
    subspace_distance_check,
    vector_field_decay_check,
)
from models import affine_averaging, lotka_volterra, toy_example
from models.dyn_system import time_varying_linear_system
from models.lotka_volterra import d_lv, monitors

LV = ([[-2.0, 1.0], [1.0, -2.0]], [1.0, 1.0])
GRID = np.linspace(0.0, 3.0, 61)
SHORT_GRID = np.linspace(0.0, 1.0, 21)


def _rv_spec(g, p=2):
    return SemiNormSpec(p=p, weight=build_RV(laplacian(g)))


class TestCoppel:
    def test_k2_averaging_is_tight(self, k2):
        minus_l = -laplacian(k2)
        report = coppel_verify(lambda t: minus_l, _rv_spec(k2), [1.0, 0.0], GRID)
        assert report.holds
        assert np.allclose(report.upper, report.lower)
        assert np.allclose(report.values, report.values[0] * np.exp(-2.0 * GRID), rtol=1e-6)

    def test_defect_shrinks_with_tolerance(self, k2):
        minus_l = -laplacian(k2)
        coarse = coppel_verify(lambda t: minus_l, _rv_spec(k2), [1.0, 0.0], GRID, tol=1e-6)
        fine = coppel_verify(lambda t: minus_l, _rv_spec(k2), [1.0, 0.0], GRID, tol=1e-9)
        assert fine.max_defect <= 0.5 * coarse.max_defect + 1e-12

    def test_time_varying_plain_norm(self):
        amap = lambda t: np.array([[-1.0, np.sin(t)], [-np.sin(t), -2.0]])
        report = coppel_verify(amap, SemiNormSpec(p=2), [1.0, 1.0], GRID)
        assert report.holds
        assert np.all(report.lower <= report.upper + 1e-12)

    def test_kernel_must_be_invariant(self):
        amap = lambda t: np.array([[-1.0, 1.0], [0.0, -1.0]])
        with pytest.raises(KernelNotInvariant):
            coppel_verify(amap, SemiNormSpec(p=2, weight=[[1.0, 0.0]]), [1.0, 1.0], GRID)


class TestCoppelSweeps:
    @staticmethod
    def _spec(r, seed):
        return SemiNormSpec(p=(1, 2, np.inf)[seed % 3], weight=r)

    @pytest.mark.parametrize('seed', sweep(100, 5))
    def test_constant_invariant_kernel(self, seed):
        n = 2 + seed % 5
        a, r, _ = invariant_kernel_instance(n, 1 + seed % (n - 1), seed)
        s = self._spec(r, seed)
        x0 = np.random.default_rng(seed).standard_normal(n)
        report = coppel_verify(lambda t: a, s, x0, SHORT_GRID)
        assert report.holds
        assert np.all(report.lower <= report.upper + 1e-12)

    @pytest.mark.parametrize('seed', sweep(100, 5))
    def test_error_shrinks_with_tolerance(self, seed):
        n = 2 + seed % 5
        a, r, _ = invariant_kernel_instance(n, 1 + seed % (n - 1), seed)
        s = self._spec(r, seed)
        x0 = np.random.default_rng(seed).standard_normal(n)
        exact = np.array([seminorm(expm(t * a) @ x0, s) for t in SHORT_GRID])

        def error(tol):
            return np.max(np.abs(coppel_verify(lambda t: a, s, x0, SHORT_GRID, tol=tol).values - exact))

        assert error(1e-9) <= 0.5 * error(1e-6) + 1e-12

    @pytest.mark.parametrize('seed', sweep(20, 2))
    def test_time_varying_invariant_kernel(self, seed):
        rng = np.random.default_rng(seed)
        n = 2 + seed % 4
        k = 1 + seed % (n - 1)
        q = random_orthogonal(n, rng)
        base, wobble = rng.standard_normal((2, n, n))
        # zero upper-right blocks keep span(q[:, k:]) invariant at every t
        base[:k, k:] = 0.0
        wobble[:k, k:] = 0.0
        r = well_conditioned(k, rng) @ q[:, :k].T
        amap = lambda t: q @ (base + np.sin(3.0 * t) * wobble) @ q.T
        report = coppel_verify(amap, self._spec(r, seed), rng.standard_normal(n), SHORT_GRID)
        assert report.holds


class TestPairwise:
    def test_averaging_contracts_at_lambda2(self, k3):
        sys = affine_averaging(k3)
        report = contraction_pairwise_check(sys, [1.0, 0.0, -1.0], [0.0, 2.0, 0.5], _rv_spec(k3), 3.0, GRID)
        assert report.holds
        assert report.weak_holds
        assert not report.bound_level

    def test_too_fast_rate_is_violated(self, k3):
        sys = affine_averaging(k3)
        report = contraction_pairwise_check(sys, [1.0, 0.0, -1.0], [0.0, 2.0, 0.5], _rv_spec(k3), 4.0, GRID)
        assert not report.holds
        assert report.weak_holds
        assert report.max_violation > 0

    def test_rotation_is_only_weak(self):
        sys = toy_example('weak_only')
        report = contraction_pairwise_check(sys, [1.0, 0.0], [0.0, 1.0], SemiNormSpec(p=2), 0.5, GRID)
        assert report.weak_holds
        assert not report.holds

    def test_custom_distance_is_bound_level(self, k3):
        sys = affine_averaging(k3)
        report = contraction_pairwise_check(sys, [1.0, 0.0, -1.0], [0.0, 2.0, 0.5], _rv_spec(k3), 3.0, GRID,
                                            distance=lambda v: float(np.linalg.norm(v - v.mean())))
        assert report.bound_level
        assert report.holds


class TestDecayChecks:
    def test_vector_field_decay(self, k3):
        report = vector_field_decay_check(affine_averaging(k3), [1.0, 0.0, -2.0], SemiNormSpec(p=2), 3.0, GRID)
        assert report.holds
        assert report.check == 'vector_field_decay'

    def test_time_varying_rejected(self):
        sys = time_varying_linear_system(lambda t: np.array([[-1.0]]), 1)
        with pytest.raises(ContraktInputError):
            vector_field_decay_check(sys, [1.0], SemiNormSpec(p=2), 1.0, GRID)

    def test_subspace_distance(self, k3):
        report = subspace_distance_check(affine_averaging(k3), [1.0, 0.0, -2.0], np.zeros(3),
                                         _rv_spec(k3), 3.0, GRID)
        assert report.holds
        assert report.values[-1] < 1e-3


class TestLyapunov:
    def test_lotka_volterra_monitors_decrease(self):
        sys = lotka_volterra(*LV)
        traj = integrate(sys, [0.2, 3.0], 10.0)
        first, second = monitors(sys)
        assert lyapunov_monitor(traj, first).holds
        assert lyapunov_monitor(traj, second).holds

    def test_distance_between_trajectories(self):
        sys = lotka_volterra(*LV)
        v = np.asarray(sys.params['v'])
        tx, tz = integrate_many(sys, [[0.2, 3.0], [2.5, 0.4]], 10.0)
        report = lyapunov_monitor(tx, lambda x, z: d_lv(x, z, v), companion=tz)
        assert report.holds
        assert report.values[-1] < report.values[0]

    def test_growth_is_flagged(self):
        traj = integrate(time_varying_linear_system(lambda t: np.array([[1.0]]), 1), [1.0], 1.0, samples=20)
        report = lyapunov_monitor(traj, lambda x: float(abs(x[0])))
        assert not report.holds
        assert report.violations[0] == 1
        assert report.max_increase > 0

    @pytest.mark.parametrize('seed', sweep(50, 3))
    def test_random_lotka_volterra(self, seed):
        rng = np.random.default_rng(seed)
        n = 2 + seed % 3
        off = rng.uniform(0.0, 0.5, (n, n))
        np.fill_diagonal(off, 0.0)
        # strict row and column dominance makes the Metzler matrix Hurwitz
        dominance = np.maximum(off.sum(axis=0), off.sum(axis=1)) + rng.uniform(1.0, 2.0, n)
        sys = lotka_volterra(off - np.diag(dominance), rng.uniform(0.5, 2.0, n))
        x_star, v = np.asarray(sys.params['x_star']), np.asarray(sys.params['v'])
        rate = -float(np.max(np.linalg.eigvals(sys.jac(0.0, x_star)).real))
        x0 = rng.uniform(0.2, 3.0, n)
        first, second = monitors(sys)

        early = integrate(sys, x0, 10.0 / rate)
        assert np.all(early.states > 0)
        assert lyapunov_monitor(early, first).holds
        assert lyapunov_monitor(early, second).holds
        companion = integrate(sys, rng.uniform(0.2, 3.0, n), 10.0 / rate)
        assert lyapunov_monitor(early, lambda x, z: d_lv(x, z, v), companion=companion).holds

        late = integrate(sys, x0, 40.0 / rate)
        assert np.all(late.states > 0)
        assert np.allclose(late.final_state, x_star, atol=1e-6)


class TestDichotomy:
    def test_averaging_with_equilibria(self, k3):
        report = dichotomy_probe(affine_averaging(k3), [[1.0, 0.0, 0.0], [0.0, -2.0, 1.0]], 20.0)
        assert report.equilibrium_exists is True
        assert report.consistent is True
        assert all(e['bounded'] for e in report.entries)
        assert all(e['limit_error'] < 1e-6 for e in report.entries)

    def test_drift_means_unbounded(self, k3):
        report = dichotomy_probe(affine_averaging(k3, b=[1.0, 1.0, 1.0]), [[1.0, 0.0, 0.0]], 500.0)
        assert report.equilibrium_exists is False
        assert report.consistent is True
        assert not report.entries[0]['bounded']

    def test_rotation_has_no_rate(self):
        report = dichotomy_probe(toy_example('weak_only'), [[1.0, 0.0]], 10.0)
        assert report.holds
        assert report.equilibrium_rate is None
