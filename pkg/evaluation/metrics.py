"""
Trajectory metrics: exponential decay-rate fits and synchronization series.
"""

import logging
from dataclasses import dataclass, asdict
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

from config import RATE_FIT_CONFIG
from core.exceptions import DimensionMismatch, InsufficientDecay
from core.integrator import Trajectory

logger = logging.getLogger(__name__)

Metric = Callable[[np.ndarray], float]


@dataclass
class RateFit:
    """Least-squares fit of log(metric) = a - rate * t."""
    rate: float
    r_squared: float
    window: Tuple[float, float]
    floor: float
    samples_used: int
    intercept: float

    def to_dict(self) -> Dict:
        """Convert to dict."""
        out = asdict(self)
        out['window'] = list(self.window)
        return out

    def matches(self, expected: float, rel_tol: float) -> bool:
        return abs(self.rate - expected) <= rel_tol * abs(expected)


def distance_to(point, p: float = np.inf) -> Metric:
    """x -> ||x - point||_p."""
    point = np.asarray(point, dtype=float)
    return lambda x: float(np.linalg.norm(np.asarray(x) - point, ord=p))


def noise_floor(traj: Trajectory) -> float:
    """Floor for metrics of traj: the configured floor or the integration noise, whichever is larger."""
    scale = float(np.max(np.abs(traj.states))) if traj.states.size else 0.0
    return max(RATE_FIT_CONFIG['floor'], RATE_FIT_CONFIG['noise_factor'] * traj.stats.rtol * scale)


def fit_window(values: np.ndarray, floor: float, upper_fraction: float, transient_decades: float) -> np.ndarray:
    """
    Mask of samples used by the fit.

    Samples must lie above floor and below min(upper_fraction * m0,
    m0 * 10^(-transient_decades * D)), where D is the number of decades the
    metric falls from m0 to its smallest value above floor.
    """
    positive = values[values > 0]
    if positive.size == 0:
        return np.zeros(values.shape, dtype=bool)
    m0 = values[0] if values[0] > 0 else float(positive.max())
    above = values > floor
    if not np.any(above):
        return np.zeros(values.shape, dtype=bool)
    decades = max(0.0, np.log10(m0 / values[above].min()))
    upper = min(upper_fraction * m0, m0 * 10.0 ** (-transient_decades * decades))
    return above & (values <= upper)


def estimate_decay_rate(
    traj: Trajectory,
    metric: Optional[Metric] = None,
    values: Optional[np.ndarray] = None,
    floor: Optional[float] = None,
    min_samples: Optional[int] = None,
) -> RateFit:
    """
    Fit an exponential decay rate to a metric along a trajectory.

    Args:
        traj: Sampled trajectory
        metric: State -> nonnegative scalar (ignored when values are given)
        values: Precomputed metric series aligned with traj.times
        floor: Numerical floor below which samples are discarded (default noise_floor(traj))
        min_samples: Minimum number of samples in the window

    Returns:
        RateFit with the fitted rate and r^2 in [0, 1]

    Raises:
        InsufficientDecay: if too few samples fall into the window
    """
    floor = noise_floor(traj) if floor is None else floor
    min_samples = RATE_FIT_CONFIG['min_samples'] if min_samples is None else min_samples
    if values is None:
        if metric is None:
            raise InsufficientDecay("either a metric or a value series is required")
        values = traj.metric_series(metric)
    values = np.asarray(values, dtype=float)
    if values.shape[0] != traj.times.shape[0]:
        raise DimensionMismatch(f"{values.shape[0]} metric values for {traj.times.shape[0]} times")

    mask = fit_window(values, floor, RATE_FIT_CONFIG['upper_fraction'], RATE_FIT_CONFIG['transient_decades'])
    used = int(mask.sum())
    if used < min_samples:
        raise InsufficientDecay(f"only {used} samples in the fit window (need {min_samples})")

    t = traj.times[mask].reshape(-1, 1)
    y = np.log(values[mask])
    model = LinearRegression().fit(t, y)
    r2 = r2_score(y, model.predict(t))
    r2 = 0.0 if not np.isfinite(r2) else float(np.clip(r2, 0.0, 1.0))
    fit = RateFit(
        rate=float(-model.coef_[0]),
        r_squared=r2,
        window=(float(t[0, 0]), float(t[-1, 0])),
        floor=float(floor),
        samples_used=used,
        intercept=float(model.intercept_),
    )
    logger.debug(f"decay fit: rate {fit.rate:.6g}, r2 {fit.r_squared:.6f}, {used} samples")
    return fit


@dataclass
class SyncSeries:
    """Synchronization metrics of an n-agent trajectory with k-dimensional agents."""
    times: np.ndarray
    average: np.ndarray
    disagreement: np.ndarray
    pairwise: Dict[Tuple[int, int], np.ndarray]

    @property
    def max_pairwise(self) -> np.ndarray:
        if not self.pairwise:
            return np.zeros_like(self.times)
        return np.max(np.vstack(list(self.pairwise.values())), axis=0)

    def columns(self) -> Dict[str, List[float]]:
        """Flat columns for CSV output."""
        out = {'t': self.times.tolist(), 'disagreement': self.disagreement.tolist(),
               'max_pairwise': self.max_pairwise.tolist()}
        for j in range(self.average.shape[1]):
            out[f'x_ave_{j}'] = self.average[:, j].tolist()
        return out


def sync_metrics(traj: Trajectory, n: int, k: int) -> SyncSeries:
    """
    Average state, disagreement ||x - 1 (x) x_ave||_2 and pairwise distances.

    Raises:
        DimensionMismatch: if the state dimension is not n * k
    """
    if traj.dim != n * k:
        raise DimensionMismatch(f"trajectory dimension {traj.dim} != n * k = {n * k}")
    blocks = traj.states.reshape(len(traj), n, k)
    average = blocks.mean(axis=1)
    disagreement = np.linalg.norm((blocks - average[:, np.newaxis, :]).reshape(len(traj), -1), axis=1)
    pairwise = {
        (i, j): np.linalg.norm(blocks[:, i, :] - blocks[:, j, :], axis=1)
        for i in range(n) for j in range(i + 1, n)
    }
    return SyncSeries(times=traj.times, average=average, disagreement=disagreement, pairwise=pairwise)
