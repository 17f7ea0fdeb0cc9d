"""
Core numerical modules for contrakt.

This package contains the linear algebra helpers, graph Laplacians,
(semi-)measures, the tensor-norm oracle and the ODE integrator.
"""

from .exceptions import ContraktError, ContraktInputError
from .measures import SemiNormSpec, MeasureResult, matrix_measure, semi_measure, measure_value
from .graph import WeightedDigraph, laplacian, laplacian_bundle, build_RV, build_R_epsilon
from .tensor_norm import TensorRepresentation, tensor_norm_bruteforce
from .integrator import Trajectory, integrate

__all__ = [
    'ContraktError',
    'ContraktInputError',
    'SemiNormSpec',
    'MeasureResult',
    'matrix_measure',
    'semi_measure',
    'measure_value',
    'WeightedDigraph',
    'laplacian',
    'laplacian_bundle',
    'build_RV',
    'build_R_epsilon',
    'TensorRepresentation',
    'tensor_norm_bruteforce',
    'Trajectory',
    'integrate',
]
