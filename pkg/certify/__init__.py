"""
Sampled contraction certificates and invariance checks.
"""

from .sampler import DomainSampler, default_sampler
from .certificates import (
    Certificate,
    WorstSample,
    analyze_doubly_contracting,
    certify_semi_contraction,
    certify_weak_contraction,
    equilibrium_rate,
    jacobian_samples,
    sync_condition,
)
from .invariance import (
    InvarianceReport,
    check_infinitesimal_invariance,
    check_shifted_invariance,
    projector_commutation_residual,
)

__all__ = [
    'DomainSampler',
    'default_sampler',
    'Certificate',
    'WorstSample',
    'analyze_doubly_contracting',
    'certify_semi_contraction',
    'certify_weak_contraction',
    'equilibrium_rate',
    'jacobian_samples',
    'sync_condition',
    'InvarianceReport',
    'check_infinitesimal_invariance',
    'check_shifted_invariance',
    'projector_commutation_residual',
]
