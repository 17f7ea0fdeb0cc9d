"""
Deterministic sampling of a box domain for sampled certificates.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import SAMPLER_CONFIG
from core.exceptions import ConfigError

logger = logging.getLogger(__name__)

Sample = Tuple[float, np.ndarray]


@dataclass(frozen=True)
class DomainSampler:
    """
    Grid plus uniform random points of a box, crossed with time samples.

    The random draws for a larger random_count extend those of a smaller
    one, so increasing the count only adds samples.
    """
    box: Tuple[Tuple[float, float], ...]
    grid_per_dim: int = field(default_factory=lambda: SAMPLER_CONFIG['grid_per_dim'])
    random_count: int = field(default_factory=lambda: SAMPLER_CONFIG['random_count'])
    time_samples: Tuple[float, ...] = (0.0,)
    seed: int = field(default_factory=lambda: SAMPLER_CONFIG['seed'])

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        if not box:
            raise ConfigError("sampling box needs at least one coordinate")
        for lo, hi in box:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise ConfigError(f"invalid box interval [{lo}, {hi}]")
        if self.grid_per_dim < 0 or self.random_count < 0:
            raise ConfigError("sample counts must be nonnegative")
        object.__setattr__(self, 'box', box)
        object.__setattr__(self, 'time_samples', tuple(float(t) for t in self.time_samples) or (0.0,))

    @classmethod
    def cube(cls, dim: int, half_width: float = 1.0, **kwargs) -> 'DomainSampler':
        return cls(box=tuple((-half_width, half_width) for _ in range(dim)), **kwargs)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DomainSampler':
        try:
            return cls(
                box=tuple(tuple(b) for b in data['box']),
                grid_per_dim=int(data.get('grid_per_dim', SAMPLER_CONFIG['grid_per_dim'])),
                random_count=int(data.get('random_count', SAMPLER_CONFIG['random_count'])),
                time_samples=tuple(data.get('time_samples', (0.0,))),
                seed=int(data.get('seed', SAMPLER_CONFIG['seed'])),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"malformed sampler description: {e}") from e

    @property
    def dim(self) -> int:
        return len(self.box)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.box])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.box])

    def grid_points(self) -> np.ndarray:
        if self.dim > SAMPLER_CONFIG['max_grid_dims'] or self.grid_per_dim == 0:
            return np.zeros((0, self.dim))
        axes = [np.linspace(lo, hi, self.grid_per_dim) for lo, hi in self.box]
        return np.array(list(itertools.product(*axes)), dtype=float)

    def random_points(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.lower, self.upper, size=(self.random_count, self.dim))

    def points(self) -> np.ndarray:
        """Grid points followed by random points."""
        return np.vstack([self.grid_points(), self.random_points()])

    def samples(self) -> List[Sample]:
        """All (t, x) pairs, time-major."""
        pts = self.points()
        return [(t, x) for t in self.time_samples for x in pts]

    def coefficients(self, m: int, count: Optional[int] = None) -> np.ndarray:
        """Random coordinates in a subspace of dimension m, scaled to the box."""
        count = self.random_count if count is None else count
        scale = float(np.max(np.abs(np.concatenate([self.lower, self.upper])))) or 1.0
        rng = np.random.default_rng([self.seed, m])
        return rng.uniform(-scale, scale, size=(count, m))

    def __len__(self) -> int:
        return len(self.time_samples) * (self.grid_points().shape[0] + self.random_count)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'box': [list(b) for b in self.box],
            'grid_per_dim': self.grid_per_dim,
            'random_count': self.random_count,
            'time_samples': list(self.time_samples),
            'seed': self.seed,
        }


def default_sampler(dim: int, half_width: float = 1.0, seed: Optional[int] = None,
                    time_samples: Sequence[float] = (0.0,)) -> DomainSampler:
    seed = SAMPLER_CONFIG['seed'] if seed is None else seed
    return DomainSampler.cube(dim, half_width, seed=seed, time_samples=tuple(time_samples))
