"""
Dense real/complex linear algebra primitives.

Matrices are plain numpy arrays; real input stays real, complex input
stays complex. Every routine is a pure function.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as sla

from config import LINALG_CONFIG
from core.exceptions import DimensionMismatch, NonConvergence, RankDeficient

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues sorted by real part (desc), then imaginary part (desc)."""
    eigenvalues: np.ndarray
    right_eigenvectors: Optional[np.ndarray]
    is_defective: bool

    @property
    def abscissa(self) -> float:
        return float(np.max(self.eigenvalues.real))


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce array-like input to a 2-D numpy array with finite entries."""
    arr = np.asarray(a)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(f"{name} has non-finite entries")
    if not np.iscomplexobj(arr):
        arr = arr.astype(float)
    return arr


def is_real(a: np.ndarray) -> bool:
    """True iff every imaginary part is exactly zero."""
    return not np.iscomplexobj(a) or bool(np.all(np.imag(a) == 0))


def real_if_close(a: np.ndarray) -> np.ndarray:
    """Drop an all-zero imaginary part."""
    if np.iscomplexobj(a) and np.all(np.imag(a) == 0):
        return np.real(a).copy()
    return a


def _require_square(a: np.ndarray, name: str = "A") -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got {a.shape}")


def eigen(a, defective_cond: Optional[float] = None) -> SpectralDecomposition:
    """
    Eigen-decomposition with deterministic ordering.

    Args:
        a: Square matrix
        defective_cond: Eigenvector condition number above which the
            matrix is reported as defective (vectors dropped)

    Returns:
        SpectralDecomposition
    """
    a = as_matrix(a, "A")
    _require_square(a)
    if defective_cond is None:
        defective_cond = LINALG_CONFIG['defective_cond']

    try:
        w, v = sla.eig(a)
    except (np.linalg.LinAlgError, sla.LinAlgError, ValueError) as e:
        raise NonConvergence(f"eigenvalue iteration failed: {e}") from e

    order = np.lexsort((-w.imag, -w.real))
    w = w[order]
    v = v[:, order]
    v = v / np.linalg.norm(v, axis=0, keepdims=True)

    cond = np.linalg.cond(v)
    defective = not np.isfinite(cond) or cond > defective_cond
    if defective:
        logger.debug(f"eigenvector condition {cond:.3e} exceeds {defective_cond:.1e}; treating as defective")
    return SpectralDecomposition(
        eigenvalues=w,
        right_eigenvectors=None if defective else v,
        is_defective=defective,
    )


def svd(a) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD, A = U diag(s) Vh, singular values nonincreasing."""
    a = as_matrix(a, "A")
    try:
        u, s, vh = sla.svd(a, full_matrices=False, lapack_driver='gesdd')
    except (np.linalg.LinAlgError, sla.LinAlgError):
        try:
            u, s, vh = sla.svd(a, full_matrices=False, lapack_driver='gesvd')
        except (np.linalg.LinAlgError, sla.LinAlgError) as e:
            raise NonConvergence(f"SVD failed: {e}") from e
    return u, s, vh


def numerical_rank(a, rank_tol: Optional[float] = None) -> int:
    """Number of singular values above rank_tol * sigma_max."""
    if rank_tol is None:
        rank_tol = LINALG_CONFIG['rank_tol']
    _, s, _ = svd(a)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def pinv(a, rank_tol: Optional[float] = None) -> np.ndarray:
    """
    Moore-Penrose pseudoinverse through the SVD.

    Args:
        a: Any matrix
        rank_tol: Relative cutoff on singular values (default 1e-12)

    Returns:
        A† with the transposed shape of A
    """
    if rank_tol is None:
        rank_tol = LINALG_CONFIG['rank_tol']
    a = as_matrix(a, "A")
    u, s, vh = svd(a)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=a.dtype)
    keep = s > rank_tol * s[0]
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (vh.conj().T * s_inv) @ u.conj().T


def orthonormal_basis(s_basis, rank_tol: Optional[float] = None) -> np.ndarray:
    """
    Orthonormal basis for the column span of s_basis.

    Raises:
        RankDeficient: if the columns are dependent
    """
    if rank_tol is None:
        rank_tol = LINALG_CONFIG['rank_tol']
    s_basis = np.asarray(s_basis)
    if s_basis.ndim == 1:
        s_basis = s_basis.reshape(-1, 1)
    if s_basis.shape[1] == 0:
        return s_basis.astype(float)
    u, s, _ = svd(s_basis)
    if s[-1] <= max(rank_tol * s[0], 1e-14):
        raise RankDeficient(f"basis columns are dependent (sigma_min={s[-1]:.3e})")
    return u


def orthogonal_complement(s_basis, n: Optional[int] = None) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(s_basis)."""
    s_basis = np.asarray(s_basis)
    if s_basis.ndim == 1:
        s_basis = s_basis.reshape(-1, 1)
    if n is None:
        n = s_basis.shape[0]
    if s_basis.shape[1] == 0:
        return np.eye(n)
    return sla.null_space(s_basis.conj().T)


def orth_projection(s_basis, n: Optional[int] = None) -> np.ndarray:
    """
    Orthogonal projector onto span(s_basis).

    An empty basis (n x 0) gives the zero matrix.
    """
    s_basis = np.asarray(s_basis)
    if s_basis.ndim == 1:
        s_basis = s_basis.reshape(-1, 1)
    if n is None:
        n = s_basis.shape[0]
    if s_basis.shape[1] == 0:
        return np.zeros((n, n))
    q = orthonormal_basis(s_basis)
    p = q @ q.conj().T
    return real_if_close(p)


def kernel_basis(r, rank_tol: Optional[float] = None) -> np.ndarray:
    """Orthonormal basis of Ker(r) from right singular vectors at zero singular values."""
    if rank_tol is None:
        rank_tol = LINALG_CONFIG['rank_tol']
    r = as_matrix(r, "R")
    _, s, vh = sla.svd(r, full_matrices=True)
    rank = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
    return vh[rank:].conj().T


def invariance_residual(a, s_basis) -> float:
    """
    Relative residual of A span(S) within span(S).

    Returns ||(I - P) A Q||_2 / (1 + ||A||_2) with Q an orthonormal basis of S.
    """
    a = as_matrix(a, "A")
    s_basis = np.asarray(s_basis)
    if s_basis.ndim == 1:
        s_basis = s_basis.reshape(-1, 1)
    if s_basis.shape[1] == 0 or s_basis.shape[1] == a.shape[0]:
        return 0.0
    q = orthonormal_basis(s_basis)
    aq = a @ q
    leak = aq - q @ (q.conj().T @ aq)
    return float(np.linalg.norm(leak, 2) / (1.0 + np.linalg.norm(a, 2)))
