"""
Network models built on a weighted digraph: affine averaging, affine flow,
primal-dual distributed optimization and diffusively coupled systems.
"""

import logging
from typing import Dict, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize

from config import SYSTEMS_CONFIG
from core.exceptions import DimensionMismatch, NonConvexCost, NotConnected, NotReachable
from core.graph import (
    WeightedDigraph,
    algebraic_connectivity,
    dominant_left_eigenvector,
    globally_reachable,
    is_connected,
    laplacian,
)
from core.linalg import pinv
from core.measures import alpha_ess
from models.costs import ScalarField
from models.dyn_system import DynSystem, EquilibriumInfo, PredictedRate

logger = logging.getLogger(__name__)


def _drift_is_zero(weights: np.ndarray, b: np.ndarray) -> bool:
    return abs(float(weights @ b)) <= SYSTEMS_CONFIG['conservation_tol'] * (1.0 + np.linalg.norm(b))


def _require_reachable(g: WeightedDigraph) -> None:
    if not globally_reachable(g):
        raise NotReachable("graph has no globally reachable node")


def _require_connected_undirected(g: WeightedDigraph) -> None:
    # a single node has no edge to orient
    if (g.directed and g.n > 1) or not is_connected(g):
        raise NotConnected("a connected undirected graph is required")


def _offset(b, n: int) -> np.ndarray:
    b = np.zeros(n) if b is None else np.asarray(b, dtype=float).ravel()
    if b.shape[0] != n:
        raise DimensionMismatch(f"b has length {b.shape[0]} for {n} nodes")
    return b


def affine_averaging(g: WeightedDigraph, b=None) -> DynSystem:
    """
    x' = -L x + b.

    v^T x is conserved when v^T b = 0; the trajectory from x0 then converges
    to L† b + v^T(x0 - L† b) 1. Otherwise every trajectory is unbounded.
    """
    _require_reachable(g)
    n = g.n
    L = laplacian(g)
    b = _offset(b, n)
    v = dominant_left_eigenvector(L)
    a_ess = alpha_ess(-L)
    ones = np.ones(n)

    conserved = {}
    if _drift_is_zero(v, b):
        particular = pinv(L) @ b
        equilibria = EquilibriumInfo(
            kind='affine', point=particular, direction=ones.reshape(-1, 1),
            limit=lambda x0: particular + float(v @ (x0 - particular)) * ones,
        )
        conserved['v^T x'] = lambda x: float(v @ x)
    else:
        logger.info(f"affine averaging with v^T b = {v @ b:.3e}: no equilibrium")
        equilibria = EquilibriumInfo(kind='none')

    minus_l = -L
    return DynSystem(
        name='affine_averaging',
        dim=n,
        f=lambda t, x: minus_l @ x + b,
        jacobian=lambda t, x: minus_l,
        constant_jacobian=True,
        known_kernel=ones.reshape(-1, 1),
        equilibria=equilibria,
        predicted_rate=PredictedRate(-a_ess, 'affine averaging: exponential rate -alpha_ess(-L)'),
        conserved=conserved,
        hypotheses={'piecewise_real_analytic': True},
        params={'L': L.tolist(), 'b': b.tolist(), 'v': v.tolist(), 'alpha_ess': a_ess},
    )


def affine_flow(g: WeightedDigraph, b=None) -> DynSystem:
    """
    x' = -L^T x + b.

    1^T x is conserved when 1^T b = 0; the limit is (L^T)† b + 1^T(x0 - (L^T)† b) v.
    """
    _require_reachable(g)
    n = g.n
    L = laplacian(g)
    b = _offset(b, n)
    v = dominant_left_eigenvector(L)
    a_ess = alpha_ess(-L)
    ones = np.ones(n)

    conserved = {}
    if _drift_is_zero(ones, b):
        particular = pinv(L.T) @ b
        equilibria = EquilibriumInfo(
            kind='affine', point=particular, direction=v.reshape(-1, 1),
            limit=lambda x0: particular + float(ones @ (x0 - particular)) * v,
        )
        conserved['1^T x'] = lambda x: float(np.sum(x))
    else:
        logger.info(f"affine flow with 1^T b = {b.sum():.3e}: no equilibrium")
        equilibria = EquilibriumInfo(kind='none')

    minus_lt = -L.T
    return DynSystem(
        name='affine_flow',
        dim=n,
        f=lambda t, x: minus_lt @ x + b,
        jacobian=lambda t, x: minus_lt,
        constant_jacobian=True,
        known_kernel=v.reshape(-1, 1),
        equilibria=equilibria,
        predicted_rate=PredictedRate(-a_ess, 'affine flow: exponential rate -alpha_ess(-L)'),
        conserved=conserved,
        hypotheses={'piecewise_real_analytic': True},
        params={'L': L.tolist(), 'b': b.tolist(), 'v': v.tolist(), 'alpha_ess': a_ess},
    )


def _minimize_total_cost(costs: Sequence[ScalarField], k: int) -> np.ndarray:
    def total(x):
        return sum(c.value(x) for c in costs)

    def grad(x):
        return sum(c.grad(x) for c in costs)

    def hess(x):
        return sum(c.hess(x) for c in costs)

    x0 = np.mean([getattr(c, 'center', np.zeros(k)) for c in costs], axis=0)
    res = minimize(total, x0, jac=grad, hess=hess, method='trust-exact', options={'gtol': 1e-13})
    x = res.x
    # Newton polish
    for _ in range(20):
        g = grad(x)
        if np.linalg.norm(g) < 1e-14:
            break
        try:
            x = x - np.linalg.solve(hess(x), g)
        except np.linalg.LinAlgError:
            break
    return x


def _check_convexity(costs: Sequence[ScalarField], x_star: np.ndarray) -> None:
    rng = np.random.default_rng(0)
    scale = 1.0 + np.linalg.norm(x_star)
    points = [x_star] + [x_star + scale * rng.standard_normal(x_star.shape[0])
                         for _ in range(SYSTEMS_CONFIG['convexity_samples'])]
    for i, cost in enumerate(costs):
        for x in points:
            lam_min = float(sla.eigvalsh(cost.hess(x))[0])
            if lam_min < -SYSTEMS_CONFIG['convexity_tol']:
                raise NonConvexCost(f"cost {i} has Hessian eigenvalue {lam_min:.3e} at {x}")


def nu_star_candidates(z0, n: int, k: int) -> Dict[str, np.ndarray]:
    """Consensus dual values built from the sum and from the mean of nu_i(0)."""
    z0 = np.asarray(z0, dtype=float)
    nu0 = z0[n * k:].reshape(n, k)
    return {
        'sum': np.tile(nu0.sum(axis=0), n),
        'mean': np.tile(nu0.mean(axis=0), n),
    }


def primal_dual(g: WeightedDigraph, costs: Sequence[ScalarField], k: int) -> DynSystem:
    """
    x' = -grad h(x) - (L (x) I_k) nu,  nu' = (L (x) I_k) x  on R^{2nk}.

    The primal part converges to 1 (x) x* with x* the minimizer of sum_i f_i;
    the dual part to 1 (x) mean(nu(0)) - (L† (x) I_k) grad h(1 (x) x*).
    """
    _require_connected_undirected(g)
    n = g.n
    if len(costs) != n:
        raise DimensionMismatch(f"{len(costs)} costs for {n} nodes")
    for i, cost in enumerate(costs):
        if cost.dim != k:
            raise DimensionMismatch(f"cost {i} has dimension {cost.dim}, expected {k}")

    L = laplacian(g)
    lk = np.kron(L, np.eye(k))
    nk = n * k

    def grad_h(x):
        blocks = x.reshape(n, k)
        return np.concatenate([c.grad(blocks[i]) for i, c in enumerate(costs)])

    def hess_h(x):
        blocks = x.reshape(n, k)
        return sla.block_diag(*[c.hess(blocks[i]) for i, c in enumerate(costs)])

    def f(t, z):
        x, nu = z[:nk], z[nk:]
        return np.concatenate([-grad_h(x) - lk @ nu, lk @ x])

    def jacobian(t, z):
        x = z[:nk]
        return np.block([[-hess_h(x), -lk], [lk, np.zeros((nk, nk))]])

    x_star = _minimize_total_cost(costs, k)
    _check_convexity(costs, x_star)
    x_lim = np.tile(x_star, n)
    nu_particular = -np.kron(pinv(L), np.eye(k)) @ grad_h(x_lim)

    def limit(z0):
        return np.concatenate([x_lim, nu_particular + nu_star_candidates(z0, n, k)['mean']])

    saddle = jacobian(0.0, np.concatenate([x_lim, nu_particular]))
    rate = -alpha_ess(saddle)
    conserved = {f'sum_nu[{j}]': (lambda z, j=j: float(z[nk:].reshape(n, k)[:, j].sum()))
                 for j in range(k)}
    direction = np.vstack([np.zeros((nk, k)), np.kron(np.ones((n, 1)), np.eye(k))])

    return DynSystem(
        name='primal_dual',
        dim=2 * nk,
        f=f,
        jacobian=jacobian,
        equilibria=EquilibriumInfo(kind='affine', point=np.concatenate([x_lim, nu_particular]),
                                   direction=direction, limit=limit),
        predicted_rate=PredictedRate(rate, 'primal-dual: exponential rate -alpha_ess of the saddle matrix at x*'),
        conserved=conserved,
        params={'n': n, 'k': k, 'L': L.tolist(), 'x_star': x_star.tolist(),
                'costs': [c.to_dict() for c in costs]},
    )


def diffusive_network(g: WeightedDigraph, internal: DynSystem) -> DynSystem:
    """
    x_i' = f(t, x_i) - sum_j a_ij (x_i - x_j) for identical internal dynamics f.

    The synchronization subspace span{1 (x) u} is invariant.
    """
    _require_connected_undirected(g)
    n, k = g.n, internal.dim
    L = laplacian(g)
    lk = np.kron(L, np.eye(k))
    lambda2 = algebraic_connectivity(L)

    def f(t, x):
        blocks = x.reshape(n, k)
        local = np.concatenate([internal.f(t, blocks[i]) for i in range(n)])
        return local - lk @ x

    def jacobian(t, x):
        blocks = x.reshape(n, k)
        return sla.block_diag(*[internal.jac(t, blocks[i]) for i in range(n)]) - lk

    predicted = None
    if 'A' in internal.params and internal.constant_jacobian:
        a = np.asarray(internal.params['A'], dtype=float)
        predicted = PredictedRate(linear_sync_threshold(a, lambda2),
                                  'linear diffusive coupling: synchronization rate lambda2 - alpha(A)')

    return DynSystem(
        name=f'diffusive_network[{internal.name}]',
        dim=n * k,
        f=f,
        jacobian=jacobian,
        time_invariant=internal.time_invariant,
        constant_jacobian=internal.constant_jacobian,
        known_kernel=np.kron(np.ones((n, 1)), np.eye(k)) / np.sqrt(n),
        predicted_rate=predicted,
        hypotheses={'identical_internal_dynamics': True},
        params={'n': n, 'k': k, 'L': L.tolist(), 'lambda2': lambda2, 'internal': internal.name},
    )


def linear_sync_threshold(a, lambda2: float) -> float:
    """lambda2 - alpha(A): positive iff A - lambda2 I is Hurwitz."""
    a = np.asarray(a, dtype=float)
    return float(lambda2 - np.max(np.linalg.eigvals(a).real))
