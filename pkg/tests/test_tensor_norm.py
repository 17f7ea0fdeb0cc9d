"""
Tests for (2,p)-tensor representations and the brute-force norm search.
"""

import numpy as np
import pytest
import scipy.linalg as sla

from conftest import random_orthogonal, sweep
from core.exceptions import BadRepresentation, DimensionMismatch
from core.measures import matrix_measure, operator_norm
from core.tensor_norm import (
    TensorRepresentation,
    kron_seminorm_upper,
    mixed_norm,
    standard_representation,
    svd_representation,
    tensor_measure_bound,
    tensor_norm_bruteforce,
    tensor_norm_lower,
    tensor_norm_upper,
)

U = np.array([1.0, -2.0, 0.5, 3.0])  # n = 2, k = 2


class TestRepresentations:
    def test_svd_and_standard_reconstruct(self):
        for rep in (svd_representation(U, 2, 2), standard_representation(U, 2, 2)):
            assert np.allclose(rep.reconstruct(), U)

    def test_two_norm_costs_equal_euclidean_norm(self):
        assert svd_representation(U, 2, 2).cost(2) == pytest.approx(np.linalg.norm(U))
        assert mixed_norm(U, 2, 2, 2) == pytest.approx(np.linalg.norm(U))

    def test_wrong_representation_rejected(self):
        rep = TensorRepresentation(n=2, k=2, terms=((np.ones(2), np.ones(2)),))
        with pytest.raises(BadRepresentation):
            tensor_norm_upper(U, rep, 2)

    def test_shape_checked(self):
        with pytest.raises(DimensionMismatch):
            TensorRepresentation(n=2, k=2, terms=((np.ones(3), np.ones(2)),))

    def test_left_multiply(self):
        m = np.array([[1.0, 2.0], [0.0, -1.0]])
        rep = svd_representation(U, 2, 2).left_multiply(m)
        assert np.allclose(rep.reconstruct(), np.kron(m, np.eye(2)) @ U)

    def test_block_diagonal(self):
        blocks = [np.array([[0.0, 1.0], [-1.0, 0.0]]), np.array([[2.0, 0.0], [1.0, 1.0]])]
        rep = standard_representation(U, 2, 2).apply_block_diagonal(blocks)
        assert np.allclose(rep.reconstruct(), sla.block_diag(*blocks) @ U)


class TestBruteForce:
    def test_bounded_by_candidates_and_lower_bound(self):
        est = tensor_norm_bruteforce(U, 2, 2, np.inf, rank_cap=3, restarts=4)
        assert est.value <= svd_representation(U, 2, 2).cost(np.inf) + 1e-12
        assert est.value <= mixed_norm(U, 2, 2, np.inf) + 1e-12
        assert est.value >= tensor_norm_lower(U, 2, 2, np.inf, rank_cap=3) - 1e-9
        assert np.allclose(est.representation.reconstruct(), U, atol=1e-8)

    def test_nonincreasing_in_rank_cap_and_restarts(self):
        small = tensor_norm_bruteforce(U, 2, 2, 1, rank_cap=2, restarts=2)
        wider = tensor_norm_bruteforce(U, 2, 2, 1, rank_cap=3, restarts=2)
        longer = tensor_norm_bruteforce(U, 2, 2, 1, rank_cap=2, restarts=4)
        assert wider.value <= small.value + 1e-12
        assert longer.value <= small.value + 1e-12

    def test_deterministic_for_fixed_seed(self):
        first = tensor_norm_bruteforce(U, 2, 2, 1, rank_cap=2, restarts=3, seed=5)
        second = tensor_norm_bruteforce(U, 2, 2, 1, rank_cap=2, restarts=3, seed=5)
        assert first.value == second.value

    def test_warm_start_is_a_candidate(self):
        warm = standard_representation(U, 2, 2)
        est = tensor_norm_bruteforce(U, 2, 2, 2, rank_cap=2, restarts=1, warm_starts=[warm])
        assert est.value <= warm.cost(2) + 1e-12

    def test_size_limit(self):
        with pytest.raises(DimensionMismatch):
            tensor_norm_bruteforce(np.ones(20), 4, 5, 2)

    def test_zero_vector(self):
        assert tensor_norm_bruteforce(np.zeros(4), 2, 2, 2, restarts=1).value == 0.0


def test_measure_bound_is_worst_block():
    blocks = [np.array([[-1.0, 0.5], [0.0, -2.0]]), np.array([[-3.0, 0.0], [1.0, -1.0]])]
    expected = max(matrix_measure(b, 1) for b in blocks)
    assert tensor_measure_bound(blocks, 1) == pytest.approx(expected)


def test_kron_bound_with_orthonormal_rows():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    rows = q[:2]
    x = rng.standard_normal(6)
    assert kron_seminorm_upper(x, rows, np.eye(2), 2) <= np.linalg.norm(x) + 1e-12
    assert kron_seminorm_upper(x, np.eye(3), np.eye(2), np.inf) == pytest.approx(mixed_norm(x, 3, 2, np.inf))


P_VALUES = (1, 2, np.inf, 3)


def _search(u, n, k, p, warm_starts=()):
    return tensor_norm_bruteforce(u, n, k, p, restarts=2, warm_starts=warm_starts)


def _exact(rep, target):
    """rep plus an SVD representation of whatever it misses of target."""
    return rep + svd_representation(target - rep.reconstruct(), rep.n, rep.k)


def _shape(seed):
    return 2 + seed % 2, 3 - seed % 3


class TestNormProperties:
    @pytest.mark.parametrize("seed", sweep(50, 2))
    def test_orthonormal_rows_do_not_increase(self, seed):
        rng = np.random.default_rng(seed)
        n, k = _shape(seed)
        p = P_VALUES[seed % len(P_VALUES)]
        rows = random_orthogonal(n, rng)[:n - 1]
        u = rng.standard_normal(n * k)
        y = np.kron(rows, np.eye(k)) @ u
        back = np.kron(rows.T, np.eye(k)) @ y

        est_u = _search(u, n, k, p)
        est_y = _search(y, n - 1, k, p, [_exact(est_u.representation.left_multiply(rows), y)])
        est_back = _search(back, n, k, p, [_exact(est_y.representation.left_multiply(rows.T), back)])
        assert est_y.value <= est_u.value + 1e-6
        assert est_back.value <= est_y.value + 1e-6

        # SVD factors lie in the row space, where the rows act isometrically
        rep = svd_representation(back, n, k)
        assert rep.left_multiply(rows).cost(p) == pytest.approx(rep.cost(p), rel=1e-9)

    @pytest.mark.parametrize("seed", sweep(50, 2))
    def test_block_diagonal_bound(self, seed):
        rng = np.random.default_rng(seed)
        n, k = _shape(seed)
        p = P_VALUES[seed % 3]
        blocks = [rng.standard_normal((k, k)) for _ in range(n)]
        worst = max(operator_norm(b, p) for b in blocks)
        u = rng.standard_normal(n * k)
        image = sla.block_diag(*blocks) @ u

        est_u = _search(u, n, k, p)
        warm = _exact(est_u.representation.apply_block_diagonal(blocks), image)
        assert _search(image, n, k, p, [warm]).value <= worst * est_u.value + 1e-6

    @pytest.mark.parametrize("seed", sweep(50, 2))
    def test_measure_bound(self, seed):
        rng = np.random.default_rng(seed)
        n, k = _shape(seed)
        p = P_VALUES[seed % 3]
        h = 1e-4
        blocks = [rng.standard_normal((k, k)) for _ in range(n)]
        steps = [np.eye(k) + h * b for b in blocks]
        u = rng.standard_normal(n * k)
        stepped = sla.block_diag(*steps) @ u

        est_u = _search(u, n, k, p)
        warm = _exact(est_u.representation.apply_block_diagonal(steps), stepped)
        quotient = (_search(stepped, n, k, p, [warm]).value - est_u.value) / (h * est_u.value)
        slack = 2.0 * h * (1.0 + max(operator_norm(b, p) for b in blocks)) ** 2 + 1e-3
        assert quotient <= tensor_measure_bound(blocks, p) + slack

    @pytest.mark.parametrize("seed", sweep(50, 2))
    def test_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        n, k = _shape(seed)
        p = P_VALUES[seed % len(P_VALUES)]
        u, w = rng.standard_normal((2, n * k))
        est_u, est_w = _search(u, n, k, p), _search(w, n, k, p)
        joined = _exact(est_u.representation + est_w.representation, u + w)
        assert _search(u + w, n, k, p, [joined]).value <= est_u.value + est_w.value + 1e-6

    @pytest.mark.parametrize("seed", sweep(50, 2))
    def test_absolute_homogeneity(self, seed):
        rng = np.random.default_rng(seed)
        n, k = _shape(seed)
        p = P_VALUES[seed % len(P_VALUES)]
        c = rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 3.0)
        u = rng.standard_normal(n * k)

        est_u = _search(u, n, k, p)
        est_cu = _search(c * u, n, k, p, [_exact(est_u.representation.scaled(c), c * u)])
        est_back = _search(u, n, k, p, [_exact(est_cu.representation.scaled(1.0 / c), u)])
        assert est_cu.value <= abs(c) * est_u.value + 1e-6
        assert est_back.value <= est_cu.value / abs(c) + 1e-6

    @pytest.mark.parametrize("seed", sweep(50, 3))
    def test_two_norm_against_euclidean(self, seed):
        rng = np.random.default_rng(seed)
        n, k = _shape(seed)
        u = rng.standard_normal(n * k)
        svd_rep = svd_representation(u, n, k)
        (v, w), rest = svd_rep.terms[0], svd_rep.terms[1:]
        split = TensorRepresentation(n=n, k=k, terms=((v / np.sqrt(2), w / np.sqrt(2)),) * 2 + rest)
        sigma = np.linalg.norm(v) * np.linalg.norm(w)

        est = _search(u, n, k, 2, [split])
        assert split.cost(2) == pytest.approx(np.sqrt(u @ u - sigma ** 2 / 2))
        assert est.value <= split.cost(2) + 1e-12
        assert est.value < np.linalg.norm(u)
        assert est.value >= tensor_norm_lower(u, n, k, 2) - 1e-9
