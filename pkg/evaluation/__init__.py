"""
Trajectory metrics and verification reports for contrakt.
"""

from .metrics import RateFit, SyncSeries, distance_to, estimate_decay_rate, sync_metrics
from .verifier import (
    coppel_verify,
    contraction_pairwise_check,
    dichotomy_probe,
    lyapunov_monitor,
    subspace_distance_check,
    vector_field_decay_check,
)

__all__ = [
    'RateFit',
    'SyncSeries',
    'distance_to',
    'estimate_decay_rate',
    'sync_metrics',
    'coppel_verify',
    'contraction_pairwise_check',
    'dichotomy_probe',
    'lyapunov_monitor',
    'subspace_distance_check',
    'vector_field_decay_check',
]
