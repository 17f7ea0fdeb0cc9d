"""
Trajectory-level verification of contraction inequalities.

Each check integrates the system, evaluates both sides of an inequality on
the stored samples and returns a report; violations are report entries, not
exceptions.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from config import LINALG_CONFIG, VERIFY_CONFIG
from core.exceptions import ContraktInputError, DimensionMismatch, KernelNotInvariant, NotHurwitz
from core.integrator import Trajectory, integrate, integrate_many
from core.linalg import invariance_residual
from core.measures import SemiNormSpec, measure_value, seminorm
from certify.certificates import equilibrium_rate
from models.dyn_system import DynSystem, time_varying_linear_system

logger = logging.getLogger(__name__)

SeminormFn = Callable[[np.ndarray], float]


def _as_list(a: np.ndarray) -> List[float]:
    return np.asarray(a, dtype=float).tolist()


@dataclass
class CoppelReport:
    times: np.ndarray
    values: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    holds: bool
    max_defect: float
    upper_violation: float
    lower_violation: float
    tolerance: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'check': 'coppel',
            'holds': self.holds,
            'max_defect': self.max_defect,
            'upper_violation': self.upper_violation,
            'lower_violation': self.lower_violation,
            'tolerance': self.tolerance,
            'times': _as_list(self.times),
            'values': _as_list(self.values),
            'lower': _as_list(self.lower),
            'upper': _as_list(self.upper),
        }


def _cumulative_integral(fn: Callable[[float], float], grid: np.ndarray) -> np.ndarray:
    out = np.zeros(grid.shape[0])
    for i in range(1, grid.shape[0]):
        piece, _ = quad(fn, grid[i - 1], grid[i], limit=100)
        out[i] = out[i - 1] + piece
    return out


def coppel_verify(
    amap: Callable[[float], np.ndarray],
    s: SemiNormSpec,
    x0,
    t_grid: Sequence[float],
    tol: Optional[float] = None,
) -> CoppelReport:
    """
    Check exp(-int mu(-A)) |x0| <= |x(t)| <= exp(int mu(A)) |x0| for x' = A(t) x.

    Args:
        amap: t -> A(t)
        s: Semi-norm whose kernel is invariant under every A(t)
        x0: Initial state
        t_grid: Increasing times starting at 0
        tol: Integrator relative tolerance

    Raises:
        KernelNotInvariant: if Ker(s) is not invariant at a grid time
    """
    grid = np.asarray(t_grid, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    dim = x0.shape[0]
    if s.is_weighted:
        for t in grid:
            residual = invariance_residual(np.asarray(amap(t)), s.kernel)
            if residual > LINALG_CONFIG['invariance_tol']:
                raise KernelNotInvariant(f"Ker is not invariant under A({t:g}) (residual {residual:.3e})")

    sys = time_varying_linear_system(amap, dim, name='coppel')
    traj = integrate(sys, x0, float(grid[-1]), tol=tol, t_eval=grid)
    mu_plus = _cumulative_integral(lambda t: measure_value(np.asarray(amap(t)), s).value, traj.times)
    mu_minus = _cumulative_integral(lambda t: measure_value(-np.asarray(amap(t)), s).value, traj.times)

    start = seminorm(x0, s)
    values = np.array([seminorm(x, s) for x in traj.states])
    upper = np.exp(mu_plus) * start
    lower = np.exp(-mu_minus) * start
    slack = VERIFY_CONFIG['coppel_slack']
    upper_violation = float(np.max(values - upper - slack * (1.0 + upper)))
    lower_violation = float(np.max(lower - values - slack * (1.0 + lower)))
    max_defect = float(max(np.max(np.abs(upper - values)), np.max(np.abs(values - lower))))
    holds = upper_violation <= 0 and lower_violation <= 0
    logger.info(f"Coppel sandwich {'holds' if holds else 'violated'} (defect {max_defect:.3e})")
    return CoppelReport(times=traj.times, values=values, lower=lower, upper=upper, holds=holds,
                        max_defect=max_defect, upper_violation=max(upper_violation, 0.0),
                        lower_violation=max(lower_violation, 0.0), tolerance=traj.stats.rtol)


@dataclass
class PairwiseReport:
    times: np.ndarray
    distances: np.ndarray
    bounds: np.ndarray
    holds: bool
    weak_holds: bool
    max_violation: float
    rate_c: float
    bound_level: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'check': 'pairwise',
            'holds': self.holds,
            'weak_holds': self.weak_holds,
            'max_violation': self.max_violation,
            'rate_c': self.rate_c,
            'bound_level': self.bound_level,
            'times': _as_list(self.times),
            'distances': _as_list(self.distances),
            'bounds': _as_list(self.bounds),
        }


def contraction_pairwise_check(
    sys: DynSystem,
    x0,
    y0,
    s: SemiNormSpec,
    c: float,
    t_grid: Sequence[float],
    distance: Optional[SeminormFn] = None,
    tol: Optional[float] = None,
) -> PairwiseReport:
    """
    Check |phi(t, x0) - phi(t, y0)| <= e^{-ct} |x0 - y0| and its weak form.

    A custom distance (e.g. an upper bound of a tensor semi-norm) makes the
    report a bound-level verification.
    """
    grid = np.asarray(t_grid, dtype=float)
    dist = distance if distance is not None else (lambda v: seminorm(v, s))
    tx, ty = integrate_many(sys, [x0, y0], float(grid[-1]), tol=tol, t_eval=grid)
    if tx.diverged or ty.diverged:
        raise ContraktInputError("a trajectory diverged before the end of the grid")
    distances = np.array([dist(a - b) for a, b in zip(tx.states, ty.states)])
    d0 = distances[0]
    bounds = np.exp(-c * tx.times) * d0
    slack = VERIFY_CONFIG['pairwise_slack']
    excess = distances - bounds - slack * (1.0 + bounds)
    weak_excess = distances - d0 - slack * (1.0 + d0)
    holds = bool(np.all(excess <= 0))
    return PairwiseReport(times=tx.times, distances=distances, bounds=bounds, holds=holds,
                          weak_holds=bool(np.all(weak_excess <= 0)),
                          max_violation=float(max(np.max(excess), 0.0)), rate_c=float(c),
                          bound_level=distance is not None)


@dataclass
class DecayReport:
    check: str
    times: np.ndarray
    values: np.ndarray
    bounds: np.ndarray
    holds: bool
    max_violation: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'check': self.check,
            'holds': self.holds,
            'max_violation': self.max_violation,
            'times': _as_list(self.times),
            'values': _as_list(self.values),
            'bounds': _as_list(self.bounds),
        }


def vector_field_decay_check(sys: DynSystem, x0, s: SemiNormSpec, c: float, t_grid: Sequence[float],
                             tol: Optional[float] = None) -> DecayReport:
    """|f(phi(t, x0))| <= e^{-ct} |f(x0)| + slack along the trajectory (time-invariant f)."""
    if not sys.time_invariant:
        raise ContraktInputError("vector field decay applies to time-invariant systems")
    grid = np.asarray(t_grid, dtype=float)
    traj = integrate(sys, x0, float(grid[-1]), tol=tol, t_eval=grid)
    values = np.array([seminorm(sys(0.0, x), s) for x in traj.states])
    bounds = np.exp(-c * traj.times) * values[0]
    excess = values - bounds - VERIFY_CONFIG['decay_slack']
    return DecayReport(check='vector_field_decay', times=traj.times, values=values, bounds=bounds,
                       holds=bool(np.all(excess <= 0)), max_violation=float(max(np.max(excess), 0.0)))


def subspace_distance_check(sys: DynSystem, x0, x_star, s: SemiNormSpec, c: float, t_grid: Sequence[float],
                            tol: Optional[float] = None) -> DecayReport:
    """|phi(t, x0) - x*| <= e^{-ct} |x0 - x*|: convergence to x* + Ker."""
    grid = np.asarray(t_grid, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    traj = integrate(sys, x0, float(grid[-1]), tol=tol, t_eval=grid)
    values = np.array([seminorm(x - x_star, s) for x in traj.states])
    bounds = np.exp(-c * traj.times) * values[0]
    excess = values - bounds - VERIFY_CONFIG['pairwise_slack'] * (1.0 + bounds)
    return DecayReport(check='subspace_distance', times=traj.times, values=values, bounds=bounds,
                       holds=bool(np.all(excess <= 0)), max_violation=float(max(np.max(excess), 0.0)))


@dataclass
class LyapunovReport:
    times: np.ndarray
    values: np.ndarray
    holds: bool
    max_increase: float
    violations: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'check': 'lyapunov',
            'holds': self.holds,
            'max_increase': self.max_increase,
            'violations': self.violations,
            'times': _as_list(self.times),
            'values': _as_list(self.values),
        }


def lyapunov_monitor(traj: Trajectory, V: Callable, companion: Optional[Trajectory] = None) -> LyapunovReport:
    """
    Check V(x(t_{m+1})) <= V(x(t_m)) + slack (1 + |V|) on consecutive samples.

    With a companion trajectory sampled on the same times, V takes both
    states, e.g. the distance between two trajectories.
    """
    if companion is not None:
        if companion.times.shape != traj.times.shape or not np.allclose(companion.times, traj.times):
            raise DimensionMismatch("companion trajectory must share the time grid")
        values = np.array([V(x, z) for x, z in zip(traj.states, companion.states)], dtype=float)
    else:
        values = traj.metric_series(V)
    if not np.all(np.isfinite(values)):
        raise ContraktInputError("Lyapunov function is not finite along the trajectory")
    slack = VERIFY_CONFIG['lyapunov_slack'] * (1.0 + np.abs(values[:-1]))
    increase = values[1:] - values[:-1] - slack
    violations = [int(i) + 1 for i in np.flatnonzero(increase > 0)]
    return LyapunovReport(times=traj.times, values=values, holds=not violations,
                          max_increase=float(max(np.max(increase, initial=0.0), 0.0)), violations=violations)


@dataclass
class DichotomyReport:
    entries: List[Dict[str, Any]]
    equilibrium_exists: Optional[bool]
    consistent: Optional[bool]
    equilibrium_rate: Optional[float] = None
    caveat: str = ("unboundedness is inferred from growth beyond the threshold on a finite "
                   "horizon; no finite simulation proves divergence")

    @property
    def holds(self) -> bool:
        return self.consistent is not False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'check': 'dichotomy',
            'holds': self.holds,
            'equilibrium_exists': self.equilibrium_exists,
            'consistent': self.consistent,
            'equilibrium_rate': self.equilibrium_rate,
            'entries': self.entries,
            'caveat': self.caveat,
        }


def _classify(traj: Trajectory, x0: np.ndarray, growth_factor: float) -> Dict[str, Any]:
    norms = np.linalg.norm(traj.states, axis=1)
    start = max(float(np.linalg.norm(x0)), 1.0)
    final = float(norms[-1])
    earlier = float(norms[int(0.9 * (len(norms) - 1))])
    growing = final > earlier
    unbounded = traj.diverged or (final > growth_factor * start and growing)
    return {'bounded': not unbounded, 'diverged': traj.diverged, 'initial_norm': float(np.linalg.norm(x0)),
            'final_norm': final, 'growth': final / start, 'final_time': float(traj.times[-1])}


def dichotomy_probe(sys: DynSystem, x0_list: Sequence, t_final: float, tol: Optional[float] = None) -> DichotomyReport:
    """
    Classify trajectories as bounded or unbounded and compare with the
    equilibrium existence the model declares.

    A weakly contracting system either has an equilibrium and only bounded
    trajectories, or none and only unbounded ones.
    """
    growth = VERIFY_CONFIG['growth_factor']
    x0s = [np.asarray(x0, dtype=float) for x0 in x0_list]
    trajs = integrate_many(sys, x0s, t_final, tol=tol)
    entries = []
    for idx, (x0, traj) in enumerate(zip(x0s, trajs)):
        entry = _classify(traj, x0, growth)
        entry['index'] = idx
        limit = sys.equilibria.limit_point(x0)
        if entry['bounded'] and limit is not None:
            entry['limit_error'] = float(np.linalg.norm(traj.final_state - limit, np.inf))
        entries.append(entry)

    exists = sys.equilibria.exists
    consistent = None
    if exists is not None:
        consistent = all(e['bounded'] == exists for e in entries)

    rate = None
    if sys.equilibria.kind == 'point' and sys.equilibria.point is not None:
        try:
            rate = equilibrium_rate(sys, sys.equilibria.point)
        except NotHurwitz:
            rate = None
    logger.info(f"{sys.name}: dichotomy {sum(e['bounded'] for e in entries)}/{len(entries)} bounded, "
                f"consistent={consistent}")
    return DichotomyReport(entries=entries, equilibrium_exists=exists, consistent=consistent, equilibrium_rate=rate)
