"""
Model zoo: network dynamics, Lotka-Volterra and small named systems.
"""

from .dyn_system import DynSystem, EquilibriumInfo, PredictedRate, linear_system, time_varying_linear_system
from .networks import affine_averaging, affine_flow, diffusive_network, linear_sync_threshold, primal_dual
from .lotka_volterra import lotka_volterra
from .toys import toy_example
from .factory import build_system

__all__ = [
    'DynSystem',
    'EquilibriumInfo',
    'PredictedRate',
    'linear_system',
    'time_varying_linear_system',
    'affine_averaging',
    'affine_flow',
    'diffusive_network',
    'linear_sync_threshold',
    'primal_dual',
    'lotka_volterra',
    'toy_example',
    'build_system',
]
