"""
Small named systems: the three planar toys and a family of internal
dynamics for diffusive networks.
"""

from dataclasses import replace
from typing import Callable, Dict

import numpy as np

from core.exceptions import UnknownName
from models.dyn_system import DynSystem, EquilibriumInfo, linear_system


def semi_only() -> DynSystem:
    """(x1', x2') = (-x1, x1 x2^2): semi-contracting for |x1|, x2 may blow up."""
    return DynSystem(
        name='semi_only',
        dim=2,
        f=lambda t, x: np.array([-x[0], x[0] * x[1] ** 2]),
        jacobian=lambda t, x: np.array([[-1.0, 0.0], [x[1] ** 2, 2.0 * x[0] * x[1]]]),
        known_kernel=np.array([[0.0], [1.0]]),
        equilibria=EquilibriumInfo(kind='affine', point=np.zeros(2), direction=np.array([[0.0], [1.0]])),
    )


def weak_only() -> DynSystem:
    """(x1', x2') = (x2, -x1): an isometry of the Euclidean norm."""
    return replace(
        linear_system([[0.0, 1.0], [-1.0, 0.0]], name='weak_only'),
        equilibria=EquilibriumInfo(kind='point', point=np.zeros(2)),
        conserved={'||x||_2': lambda x: float(np.linalg.norm(x))},
    )


def linear_2x2() -> DynSystem:
    """(x1', x2') = (-x1, x1 - 2 x2); span(e2) is invariant but not a reducing subspace."""
    return replace(
        linear_system([[-1.0, 0.0], [1.0, -2.0]], name='linear_2x2'),
        known_kernel=np.array([[0.0], [1.0]]),
        equilibria=EquilibriumInfo(kind='point', point=np.zeros(2)),
    )


_TOYS: Dict[str, Callable[[], DynSystem]] = {
    'semi_only': semi_only,
    'weak_only': weak_only,
    'linear_2x2': linear_2x2,
}


def toy_example(name: str) -> DynSystem:
    try:
        return _TOYS[name]()
    except KeyError:
        raise UnknownName(f"unknown toy system {name!r}; choose from {sorted(_TOYS)}") from None


# ---------------------------------------------------------------------------
# Internal dynamics for diffusive coupling
# ---------------------------------------------------------------------------

def linear_internal(a) -> DynSystem:
    return linear_system(a, name='linear_internal')


def zero_internal(k: int) -> DynSystem:
    """f = 0: coupling alone, i.e. consensus in every coordinate."""
    return linear_system(np.zeros((k, k)), name='zero_internal')


def hopf_oscillator(beta: float = 1.0, omega: float = 1.0) -> DynSystem:
    """
    Andronov-Hopf normal form on R^2.

    x' = beta x - omega y - x (x^2 + y^2)
    y' = omega x + beta y - y (x^2 + y^2)

    The symmetric part of Df is beta I minus a positive semidefinite matrix,
    so mu_2(Df) <= beta everywhere.
    """
    beta, omega = float(beta), float(omega)

    def f(t, z):
        x, y = z
        rho = x * x + y * y
        return np.array([beta * x - omega * y - x * rho, omega * x + beta * y - y * rho])

    def jacobian(t, z):
        x, y = z
        rho = x * x + y * y
        return np.array([
            [beta - rho - 2 * x * x, -omega - 2 * x * y],
            [omega - 2 * x * y, beta - rho - 2 * y * y],
        ])

    return DynSystem(
        name='hopf_oscillator', dim=2, f=f, jacobian=jacobian,
        params={'beta': beta, 'omega': omega, 'mu2_bound': beta},
    )


def cubic_gradient(k: int = 1) -> DynSystem:
    """x' = -x - x^3 componentwise; mu_2(Df) <= -1."""
    return DynSystem(
        name='cubic_gradient', dim=k,
        f=lambda t, x: -x - x ** 3,
        jacobian=lambda t, x: np.diag(-1.0 - 3.0 * x ** 2),
        equilibria=EquilibriumInfo(kind='point', point=np.zeros(k)),
        params={'k': k, 'mu2_bound': -1.0},
    )


_INTERNAL = {
    'linear': lambda params: linear_internal(params['A']),
    'zero': lambda params: zero_internal(int(params.get('k', 1))),
    'hopf': lambda params: hopf_oscillator(params.get('beta', 1.0), params.get('omega', 1.0)),
    'cubic_gradient': lambda params: cubic_gradient(int(params.get('k', 1))),
}


def internal_dynamics(name: str, params: Dict) -> DynSystem:
    """Internal dynamics by name: linear, zero, hopf or cubic_gradient."""
    try:
        builder = _INTERNAL[name]
    except KeyError:
        raise UnknownName(f"unknown internal dynamics {name!r}; choose from {sorted(_INTERNAL)}") from None
    return builder(params)
