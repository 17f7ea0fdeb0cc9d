"""
Adaptive Runge-Kutta integration with dense sampling.

Stepping is done with scipy's explicit embedded pairs (RK45 is the
Dormand-Prince 5(4) pair) so that divergence and step-size failures can be
caught between steps.
"""

import logging
from dataclasses import dataclass, asdict
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import DOP853, RK45

from config import INTEGRATOR_CONFIG
from core.exceptions import ContraktInputError, DimensionMismatch, Diverged, StepUnderflow
from utils.parallel import parallel_map

if TYPE_CHECKING:
    from models.dyn_system import DynSystem

logger = logging.getLogger(__name__)

_SOLVERS = {'RK45': RK45, 'DOP853': DOP853}
# (function evaluations per step attempt, extra evaluations per dense output)
_STAGE_COST = {'RK45': (6, 0), 'DOP853': (12, 3)}


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    rejected_steps: int
    nfev: int
    rtol: float
    atol: float
    method: str

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(eq=False)
class Trajectory:
    """Sampled flow t -> phi(t, x0)."""
    times: np.ndarray
    states: np.ndarray
    stats: IntegratorStats
    diverged: bool = False
    message: str = ''

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states))
        if self.states.shape[0] != self.times.shape[0]:
            raise DimensionMismatch(f"{self.times.shape[0]} times but {self.states.shape[0]} states")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ContraktInputError("trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return int(self.times.shape[0])

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])

    @property
    def initial_state(self) -> np.ndarray:
        return self.states[0]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def metric_series(self, metric) -> np.ndarray:
        return np.array([metric(x) for x in self.states], dtype=float)


def time_grid(t_final: float, samples: Optional[int] = None, log_uniform: bool = False) -> np.ndarray:
    """Output times starting at 0; log-uniform grids start at t_final * 1e-4."""
    if samples is None:
        samples = INTEGRATOR_CONFIG['min_samples']
    samples = max(int(samples), 2)
    if log_uniform:
        return np.concatenate([[0.0], np.geomspace(t_final * 1e-4, t_final, samples - 1)])
    return np.linspace(0.0, t_final, samples)


def integrate(
    sys: 'DynSystem',
    x0,
    t_final: float,
    tol: Optional[float] = None,
    atol: Optional[float] = None,
    t_eval: Optional[Sequence[float]] = None,
    samples: Optional[int] = None,
    log_uniform: bool = False,
    method: Optional[str] = None,
    raise_on_divergence: bool = False,
    use_chart: bool = True,
) -> Trajectory:
    """
    Integrate x' = f(t, x) from t = 0 to t_final.

    Args:
        sys: System to integrate
        x0: Initial state
        t_final: Final time (> 0)
        tol: Relative tolerance in [1e-12, 1e-3] (default 1e-9)
        atol: Absolute tolerance (default 1e-11)
        t_eval: Output times in [0, t_final]; overrides samples/log_uniform
        samples: Number of output samples (at least 200 by default)
        log_uniform: Log-spaced output grid
        method: 'RK45' or 'DOP853'
        raise_on_divergence: Raise Diverged instead of truncating
        use_chart: Integrate in the system's chart coordinates when it has one

    Returns:
        Trajectory, truncated with diverged=True if the state norm blew up
    """
    rtol = INTEGRATOR_CONFIG['rtol'] if tol is None else float(tol)
    atol = INTEGRATOR_CONFIG['atol'] if atol is None else float(atol)
    method = method or INTEGRATOR_CONFIG['method']
    if not (t_final > 0):
        raise ContraktInputError(f"t_final must be positive, got {t_final}")
    if not (1e-12 <= rtol <= 1e-3):
        raise ContraktInputError(f"tol must lie in [1e-12, 1e-3], got {rtol}")
    if method not in _SOLVERS:
        raise ContraktInputError(f"unknown integration method {method!r}")

    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.shape[0] != sys.dim:
        raise DimensionMismatch(f"x0 has length {x0.shape[0]}, system dimension is {sys.dim}")

    grid = np.asarray(t_eval, dtype=float) if t_eval is not None else time_grid(t_final, samples, log_uniform)
    if grid[0] != 0.0:
        grid = np.concatenate([[0.0], grid])
    if np.any(np.diff(grid) <= 0) or grid[-1] > t_final * (1 + 1e-12):
        raise ContraktInputError("t_eval must be increasing within [0, t_final]")

    chart = sys.chart if use_chart else None
    target = chart.system if chart is not None else sys
    to_physical = chart.from_chart if chart is not None else (lambda z: z)
    z0 = chart.to_chart(x0) if chart is not None else x0

    solver = _SOLVERS[method](target.f, 0.0, z0, float(grid[-1]), rtol=rtol, atol=atol)
    out = np.empty((grid.shape[0], sys.dim))
    out[0] = x0
    filled = 1
    steps = 0
    dense_calls = 0
    diverged = False
    message = ''
    limit = INTEGRATOR_CONFIG['divergence_norm']

    while solver.status == 'running':
        result = solver.step()
        if solver.status == 'failed':
            raise StepUnderflow(result or "integrator step failed")
        steps += 1
        if steps > INTEGRATOR_CONFIG['max_steps']:
            raise StepUnderflow(f"exceeded {INTEGRATOR_CONFIG['max_steps']} steps before t={grid[-1]}")

        physical = to_physical(solver.y)
        if not np.all(np.isfinite(physical)) or np.linalg.norm(physical) > limit:
            diverged = True
            message = f"state norm exceeded {limit:.1e} at t={solver.t:.6g}"
            if raise_on_divergence:
                raise Diverged(message)
            logger.info(f"Trajectory truncated: {message}")
            break

        if filled < grid.shape[0] and grid[filled] <= solver.t:
            dense = solver.dense_output()
            dense_calls += 1
            while filled < grid.shape[0] and grid[filled] <= solver.t:
                out[filled] = to_physical(dense(grid[filled]))
                filled += 1

    per_attempt, per_dense = _STAGE_COST[method]
    attempts = (solver.nfev - 2 - per_dense * dense_calls) // per_attempt
    stats = IntegratorStats(steps=steps, rejected_steps=max(0, int(attempts) - steps),
                            nfev=int(solver.nfev), rtol=rtol, atol=atol, method=method)
    logger.debug(f"integrated {sys.name if hasattr(sys, 'name') else 'system'}: {stats}")

    states = out[:filled]
    if not diverged and not np.all(np.isfinite(states)):
        diverged = True
        message = "non-finite state"
    return Trajectory(times=grid[:filled], states=states, stats=stats, diverged=diverged, message=message)


def integrate_many(sys: 'DynSystem', x0_list: Sequence, t_final: float, **kwargs) -> List[Trajectory]:
    """Integrate independent initial conditions concurrently, results in input order."""
    return parallel_map(lambda x0: integrate(sys, x0, t_final, **kwargs), list(x0_list))
