"""
Sampled invariance checks for a semi-norm kernel under a vector field.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from config import CERTIFY_CONFIG
from core.linalg import orth_projection, orthonormal_basis
from certify.certificates import jacobian_samples
from certify.sampler import DomainSampler
from models.dyn_system import DynSystem

logger = logging.getLogger(__name__)


@dataclass
class InvarianceReport:
    holds: bool
    max_residual: float
    sample_count: int
    witness: Optional[Dict[str, Any]] = None

    def __bool__(self) -> bool:
        return bool(self.holds)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'holds': self.holds,
            'max_residual': self.max_residual,
            'sample_count': self.sample_count,
            'witness': self.witness,
        }


def _basis(kernel_basis, n: int) -> np.ndarray:
    basis = np.asarray(kernel_basis, dtype=float)
    if basis.ndim == 1:
        basis = basis.reshape(-1, 1)
    return orthonormal_basis(basis) if basis.shape[1] else basis.reshape(n, 0)


def check_infinitesimal_invariance(sys: DynSystem, kernel_basis, d: DomainSampler,
                                   tol: Optional[float] = None) -> InvarianceReport:
    """
    Df(t, x) maps the kernel into itself at every sample.

    Each basis vector u must satisfy ||(I - P) Df u||_2 <= tol (1 + ||Df||_2).
    """
    tol = CERTIFY_CONFIG['invariance_tol'] if tol is None else tol
    basis = _basis(kernel_basis, sys.dim)
    leak = np.eye(sys.dim) - orth_projection(basis, sys.dim)
    worst, witness = 0.0, None
    jacs = jacobian_samples(sys, d)
    for t, x, jac in jacs:
        scale = 1.0 + np.linalg.norm(jac, 2)
        for j in range(basis.shape[1]):
            residual = float(np.linalg.norm(leak @ jac @ basis[:, j])) / scale
            if residual > worst:
                worst = residual
                witness = {'t': t, 'x': np.asarray(x).tolist(), 'basis_index': j}
    holds = worst <= tol
    logger.debug(f"{sys.name}: infinitesimal invariance residual {worst:.3e}")
    return InvarianceReport(holds=holds, max_residual=worst, sample_count=len(jacs),
                            witness=None if holds else witness)


def check_shifted_invariance(sys: DynSystem, kernel_basis, x_star, d: DomainSampler,
                             tol: Optional[float] = None) -> InvarianceReport:
    """
    f(t, x* + u) lies in the kernel for kernel vectors u.

    Points x* + sum_i c_i u_i use the sampler's random coefficients.
    """
    tol = CERTIFY_CONFIG['invariance_tol'] if tol is None else tol
    basis = _basis(kernel_basis, sys.dim)
    leak = np.eye(sys.dim) - orth_projection(basis, sys.dim)
    x_star = np.asarray(x_star, dtype=float)
    coeffs = d.coefficients(basis.shape[1])
    points = [x_star] + [x_star + basis @ c for c in coeffs]
    worst, witness = 0.0, None
    count = 0
    for t in d.time_samples:
        for z in points:
            fz = sys(t, z)
            residual = float(np.linalg.norm(leak @ fz)) / (1.0 + np.linalg.norm(fz))
            count += 1
            if residual > worst:
                worst = residual
                witness = {'t': t, 'x': z.tolist()}
    holds = worst <= tol
    return InvarianceReport(holds=holds, max_residual=worst, sample_count=count,
                            witness=None if holds else witness)


def projector_commutation_residual(sys: DynSystem, kernel_basis, d: DomainSampler) -> float:
    """
    max ||pi Df - Df pi||_2 over samples, pi projecting onto the kernel's complement.

    Zero means the kernel reduces Df; infinitesimal invariance alone allows a
    positive value.
    """
    basis = _basis(kernel_basis, sys.dim)
    pi = np.eye(sys.dim) - orth_projection(basis, sys.dim)
    return max(float(np.linalg.norm(pi @ jac - jac @ pi, 2)) for _, _, jac in jacobian_samples(sys, d))
