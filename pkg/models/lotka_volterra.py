"""
Lotka-Volterra population dynamics x' = diag(x)(A x + r) with Metzler A.

The positive orthant is invariant; in log coordinates y = ln x the system
reads y' = A exp(y) + r and is integrated there so positivity holds by
construction.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np

from config import SYSTEMS_CONFIG
from core.exceptions import ContraktInputError, DimensionMismatch, NotHurwitz, NotMetzler, NonPositiveState
from core.linalg import as_matrix
from core.measures import SemiNormSpec
from models.dyn_system import Chart, DynSystem, EquilibriumInfo, PredictedRate

logger = logging.getLogger(__name__)


def _check_metzler(a: np.ndarray) -> None:
    off = a - np.diag(np.diag(a))
    worst = float(off.min()) if a.shape[0] > 1 else 0.0
    if worst < -SYSTEMS_CONFIG['metzler_tol']:
        raise NotMetzler(f"off-diagonal entry {worst:.3e} is negative")


def _is_hurwitz(a: np.ndarray) -> bool:
    return bool(np.max(np.linalg.eigvals(a).real) < 0)


def lv_equilibrium(a, r) -> np.ndarray:
    """x* = -A^-1 r, positive for Metzler Hurwitz A and r > 0."""
    a = np.asarray(a, dtype=float)
    if not _is_hurwitz(a):
        raise NotHurwitz("A is not Hurwitz; no positive equilibrium is guaranteed")
    return -np.linalg.solve(a, np.asarray(r, dtype=float))


def lv_weight(a) -> np.ndarray:
    """v = -(A^T)^-1 1, so that v^T A = -1^T."""
    a = np.asarray(a, dtype=float)
    if not _is_hurwitz(a):
        raise NotHurwitz("A is not Hurwitz")
    v = -np.linalg.solve(a.T, np.ones(a.shape[0]))
    if np.any(v <= 0):
        raise NotHurwitz(f"weight vector {v} is not positive")
    return v


def _log_system(a: np.ndarray, r: np.ndarray) -> DynSystem:
    return DynSystem(
        name='lotka_volterra_log',
        dim=a.shape[0],
        f=lambda t, y: a @ np.exp(y) + r,
        jacobian=lambda t, y: a * np.exp(y)[np.newaxis, :],
        params={'A': a.tolist(), 'r': r.tolist()},
    )


def _to_log(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise NonPositiveState(f"state {x} leaves the positive orthant")
    return np.log(x)


def lotka_volterra(a, r) -> DynSystem:
    """
    Build the Lotka-Volterra system.

    Args:
        a: Metzler interaction matrix
        r: Positive growth rates

    Returns:
        DynSystem with a log-coordinate chart; equilibrium and weight vector
        are attached when A is Hurwitz
    """
    a = as_matrix(a, "A").astype(float)
    r = np.asarray(r, dtype=float).ravel()
    n = a.shape[0]
    if a.shape != (n, n) or r.shape[0] != n:
        raise DimensionMismatch(f"A is {a.shape} but r has length {r.shape[0]}")
    _check_metzler(a)
    if np.any(r <= 0):
        raise ContraktInputError("growth rates r must be positive")

    def f(t, x):
        return x * (a @ x + r)

    def jacobian(t, x):
        return np.diag(a @ x + r) + x[:, np.newaxis] * a

    params = {'A': a.tolist(), 'r': r.tolist()}
    equilibria = EquilibriumInfo(kind='unknown')
    predicted = None
    if _is_hurwitz(a):
        x_star = lv_equilibrium(a, r)
        v = lv_weight(a)
        params.update({'x_star': x_star.tolist(), 'v': v.tolist()})
        equilibria = EquilibriumInfo(kind='point', point=x_star)
        local = float(np.max(np.linalg.eigvals(jacobian(0.0, x_star)).real))
        predicted = PredictedRate(-local, 'Lotka-Volterra: local rate -alpha(Df(x*)) at the positive equilibrium')
    else:
        logger.info("Lotka-Volterra matrix is not Hurwitz; equilibrium left unknown")

    return DynSystem(
        name='lotka_volterra',
        dim=n,
        f=f,
        jacobian=jacobian,
        equilibria=equilibria,
        predicted_rate=predicted,
        hypotheses={'piecewise_real_analytic': True},
        chart=Chart(system=_log_system(a, r), to_chart=_to_log, from_chart=np.exp),
        params=params,
    )


def log_weak_norm(sys: DynSystem) -> SemiNormSpec:
    """l1 norm weighted by diag(v); the log system is weakly contracting in it."""
    if 'v' not in sys.params:
        raise NotHurwitz("weight vector requires a Hurwitz interaction matrix")
    return SemiNormSpec(p=1, weight=np.diag(sys.params['v']))


# ---------------------------------------------------------------------------
# Lyapunov monitors
# ---------------------------------------------------------------------------

def _positive(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise NonPositiveState(f"{name} has non-positive entries: {x}")
    return x


def d_lv(x, z, v) -> float:
    """sum_i v_i |ln(x_i / z_i)|, nonincreasing between any two trajectories."""
    x = _positive(x, 'x')
    z = _positive(z, 'z')
    return float(np.sum(np.asarray(v) * np.abs(np.log(x / z))))


def v1(x, x_star, v) -> float:
    """Distance to the equilibrium in the log-weighted l1 metric."""
    return d_lv(x, x_star, v)


def v2(x, a, r, v) -> float:
    """sum_i v_i |(A x + r)_i|."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(np.asarray(v) * np.abs(np.asarray(a) @ x + np.asarray(r))))


def monitors(sys: DynSystem) -> Tuple[Optional[Callable], Optional[Callable]]:
    """V1 and V2 bound to the parameters of sys."""
    if 'v' not in sys.params:
        return None, None
    a, r = np.asarray(sys.params['A']), np.asarray(sys.params['r'])
    v, x_star = np.asarray(sys.params['v']), np.asarray(sys.params['x_star'])
    return (lambda x: v1(x, x_star, v)), (lambda x: v2(x, a, r, v))
