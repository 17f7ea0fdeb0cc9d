"""
Dynamical system container shared by the model zoo, certifier and simulator.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np

from core.exceptions import DimensionMismatch

logger = logging.getLogger(__name__)

VectorField = Callable[[float, np.ndarray], np.ndarray]
JacobianField = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PredictedRate:
    """An expected exponential rate and where it comes from."""
    value: float
    provenance: str

    def to_dict(self) -> Dict[str, Any]:
        return {'value': self.value, 'provenance': self.provenance}


@dataclass(frozen=True, eq=False)
class EquilibriumInfo:
    """
    Known equilibrium structure.

    kind is 'point', 'affine' (point + span(direction)), 'none' (no
    equilibrium exists) or 'unknown'.
    """
    kind: str = 'unknown'
    point: Optional[np.ndarray] = None
    direction: Optional[np.ndarray] = None
    limit: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @property
    def exists(self) -> Optional[bool]:
        if self.kind == 'unknown':
            return None
        return self.kind != 'none'

    def limit_point(self, x0: np.ndarray) -> Optional[np.ndarray]:
        """Predicted limit of the trajectory from x0, if known."""
        if self.limit is not None:
            return self.limit(np.asarray(x0, dtype=float))
        if self.kind == 'point':
            return self.point
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'exists': self.exists,
            'point': None if self.point is None else np.asarray(self.point).tolist(),
            'direction': None if self.direction is None else np.asarray(self.direction).tolist(),
        }


@dataclass(frozen=True, eq=False)
class Chart:
    """Coordinates in which a system is integrated instead of its own."""
    system: 'DynSystem'
    to_chart: Callable[[np.ndarray], np.ndarray]
    from_chart: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class DynSystem:
    """
    Vector field f(t, x) with analytic Jacobian and metadata.

    Attributes:
        name: Model name
        dim: State dimension
        f: (t, x) -> dx/dt
        jacobian: (t, x) -> Df(t, x)
        time_invariant: f does not depend on t
        constant_jacobian: Df is the same everywhere (one sample is a global proof)
        known_kernel: Basis of an invariant subspace (columns)
        equilibria: Known equilibrium structure
        predicted_rate: Expected convergence rate with provenance
        conserved: Named functionals constant along trajectories
        hypotheses: Assumed (not machine-checked) properties
        chart: Preferred integration coordinates
        params: Model parameters for reports
    """
    name: str
    dim: int
    f: VectorField
    jacobian: JacobianField
    time_invariant: bool = True
    constant_jacobian: bool = False
    known_kernel: Optional[np.ndarray] = None
    equilibria: EquilibriumInfo = field(default_factory=EquilibriumInfo)
    predicted_rate: Optional[PredictedRate] = None
    conserved: Dict[str, Callable[[np.ndarray], float]] = field(default_factory=dict)
    hypotheses: Dict[str, bool] = field(default_factory=dict)
    chart: Optional[Chart] = None
    params: Dict[str, Any] = field(default_factory=dict)

    def __call__(self, t: float, x) -> np.ndarray:
        return self.f(t, np.asarray(x, dtype=float))

    def jac(self, t: float, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.dim:
            raise DimensionMismatch(f"state of length {x.shape[0]} for system of dimension {self.dim}")
        return np.atleast_2d(self.jacobian(t, x))

    def summary(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'dim': self.dim,
            'time_invariant': self.time_invariant,
            'constant_jacobian': self.constant_jacobian,
            'equilibria': self.equilibria.to_dict(),
            'predicted_rate': None if self.predicted_rate is None else self.predicted_rate.to_dict(),
            'conserved': sorted(self.conserved),
            'hypotheses': dict(self.hypotheses),
        }


def linear_system(a, name: str = 'linear', b=None) -> DynSystem:
    """x' = A x (+ b) with constant Jacobian A."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"A must be square, got {a.shape}")
    offset = np.zeros(a.shape[0]) if b is None else np.asarray(b, dtype=float).ravel()
    return DynSystem(
        name=name,
        dim=a.shape[0],
        f=lambda t, x: a @ x + offset,
        jacobian=lambda t, x: a,
        constant_jacobian=True,
        params={'A': a.tolist(), 'b': offset.tolist()},
    )


def time_varying_linear_system(amap: Callable[[float], np.ndarray], dim: int, name: str = 'linear_tv') -> DynSystem:
    """x' = A(t) x."""
    return DynSystem(
        name=name,
        dim=dim,
        f=lambda t, x: np.asarray(amap(t), dtype=float) @ x,
        jacobian=lambda t, x: np.asarray(amap(t), dtype=float),
        time_invariant=False,
    )


def finite_difference_jacobian(sys: DynSystem, t: float, x, step: float = 1e-6) -> np.ndarray:
    """Central differences of f in x."""
    x = np.asarray(x, dtype=float)
    jac = np.empty((sys.dim, sys.dim))
    for j in range(sys.dim):
        h = step * max(1.0, abs(x[j]))
        e = np.zeros(sys.dim)
        e[j] = h
        jac[:, j] = (sys.f(t, x + e) - sys.f(t, x - e)) / (2.0 * h)
    return jac
