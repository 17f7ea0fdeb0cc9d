"""
Sampled contraction certificates.

Every certificate evaluates a (semi-)measure of the Jacobian over the
samples of a DomainSampler and reduces with a max over the index-ordered
results. Unless the Jacobian is constant, the outcome holds on the samples
only and says so.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import CERTIFY_CONFIG
from core.exceptions import ContraktInputError, DimensionMismatch, EquilibriumSubspaceViolation, NotHurwitz, SingularQ
from core.linalg import orthogonal_complement, orthonormal_basis
from core.measures import SemiNormSpec, measure_value, restricted_abscissa
from certify.sampler import DomainSampler
from models.dyn_system import DynSystem
from utils.parallel import parallel_map

logger = logging.getLogger(__name__)

SEMI_CONTRACTING = 'semi_contracting'
WEAKLY_CONTRACTING = 'weakly_contracting'
DOUBLY_CONTRACTING = 'doubly_contracting'
SYNC_CONDITION = 'sync_condition'

CERTIFIED = 'certified_on_samples'
REFUTED = 'refuted'

SAMPLING_NOTE = "sampled check over the box; not a global proof"
GLOBAL_NOTE = "constant Jacobian; a single sample is a global proof"

JacobianSample = Tuple[float, np.ndarray, np.ndarray]


@dataclass
class WorstSample:
    t: float
    x: np.ndarray
    value: float

    def to_dict(self) -> Dict[str, Any]:
        return {'t': self.t, 'x': np.asarray(self.x).tolist(), 'value': self.value}


@dataclass
class Certificate:
    """
    Outcome of a sampled certification.

    rate_c is minus the largest sampled measure for the contraction kinds
    and lambda2 minus it for the synchronization condition; a refuted
    certificate carries the sample that broke the threshold as witness.
    """
    kind: str
    norm: SemiNormSpec
    rate_c: float
    worst_sample: Optional[WorstSample]
    sample_count: int
    status: str
    global_proof: bool = False
    second_norm: Optional[SemiNormSpec] = None
    predicted_rate: Optional[float] = None
    hypotheses: Dict[str, bool] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    @property
    def witness(self) -> Optional[WorstSample]:
        return None if self.certified else self.worst_sample

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'status': self.status,
            'norm': self.norm.to_dict(),
            'second_norm': None if self.second_norm is None else self.second_norm.to_dict(),
            'rate_c': self.rate_c,
            'worst_sample': None if self.worst_sample is None else self.worst_sample.to_dict(),
            'witness': None if self.witness is None else self.witness.to_dict(),
            'sample_count': self.sample_count,
            'global': self.global_proof,
            'predicted_rate': self.predicted_rate,
            'hypotheses': dict(self.hypotheses),
            'notes': list(self.notes),
            'details': self.details,
        }


def jacobian_samples(sys: DynSystem, d: DomainSampler) -> List[JacobianSample]:
    """(t, x, Df(t, x)) over the sampler; one sample when Df is constant."""
    if d.dim != sys.dim:
        raise DimensionMismatch(f"sampler box has dimension {d.dim}, system {sys.dim}")
    samples = d.samples()
    if sys.constant_jacobian:
        samples = samples[:1]
    return parallel_map(lambda tx: (tx[0], tx[1], sys.jac(tx[0], tx[1])), samples)


def _max_measure(jacs: Sequence[JacobianSample], s: SemiNormSpec) -> Tuple[float, WorstSample]:
    values = parallel_map(lambda sample: measure_value(sample[2], s).value, jacs)
    idx = int(np.argmax(values))
    t, x, _ = jacs[idx]
    return float(values[idx]), WorstSample(t=t, x=np.array(x), value=float(values[idx]))


def _check_norm_dim(sys: DynSystem, s: SemiNormSpec) -> None:
    if s.dim is not None and s.dim != sys.dim:
        raise DimensionMismatch(f"semi-norm acts on dimension {s.dim}, system has {sys.dim}")


def certify_semi_contraction(sys: DynSystem, s: SemiNormSpec, d: DomainSampler) -> Certificate:
    """
    Check mu(Df(t, x)) < 0 on every sample.

    Args:
        sys: System to certify
        s: Semi-norm; a plain norm certifies strict contraction
        d: Sample domain

    Returns:
        Certificate with rate c = -max sampled semi-measure
    """
    _check_norm_dim(sys, s)
    jacs = jacobian_samples(sys, d)
    worst, sample = _max_measure(jacs, s)
    status = CERTIFIED if worst < 0 else REFUTED
    cert = Certificate(
        kind=SEMI_CONTRACTING, norm=s, rate_c=-worst, worst_sample=sample, sample_count=len(jacs),
        status=status, global_proof=sys.constant_jacobian,
        hypotheses=dict(sys.hypotheses),
        notes=[GLOBAL_NOTE if sys.constant_jacobian else SAMPLING_NOTE],
    )
    logger.info(f"{sys.name}: semi-contraction {status} (c = {-worst:.6g}, {len(jacs)} samples)")
    return cert


def certify_weak_contraction(
    sys: DynSystem,
    norm: SemiNormSpec,
    d: DomainSampler,
    tol: Optional[float] = None,
) -> Certificate:
    """
    Check mu(Df(t, x)) <= 0 (up to tol) on every sample.

    The norm may be weighted only by an invertible matrix.
    """
    tol = CERTIFY_CONFIG['weak_tol'] if tol is None else tol
    _check_norm_dim(sys, norm)
    if norm.kernel is not None and norm.kernel.shape[1] > 0:
        raise ContraktInputError("weak contraction needs a norm, not a semi-norm with a kernel")
    jacs = jacobian_samples(sys, d)
    worst, sample = _max_measure(jacs, norm)
    status = CERTIFIED if worst <= tol else REFUTED
    logger.info(f"{sys.name}: weak contraction {status} (max mu = {worst:.3e})")
    return Certificate(
        kind=WEAKLY_CONTRACTING, norm=norm, rate_c=-worst, worst_sample=sample, sample_count=len(jacs),
        status=status, global_proof=sys.constant_jacobian,
        hypotheses=dict(sys.hypotheses),
        notes=[GLOBAL_NOTE if sys.constant_jacobian else SAMPLING_NOTE],
        details={'tolerance': tol},
    )


def sync_condition(jacobians: Sequence[JacobianSample], q, p, lambda2: float) -> Certificate:
    """
    Synchronization test c = lambda2 - max mu_p(Q Df Q^-1) > 0.

    Args:
        jacobians: Samples of the internal dynamics, see jacobian_samples
        q: Invertible k x k weight
        p: Norm index
        lambda2: Algebraic connectivity of the coupling graph

    Returns:
        Certificate of kind sync_condition, certified iff c > 0
    """
    q = np.asarray(q)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise SingularQ(f"Q must be square, got shape {q.shape}")
    cond = float(np.linalg.cond(q))
    if not np.isfinite(cond) or cond > CERTIFY_CONFIG['singular_q_cond']:
        raise SingularQ(f"Q is singular (condition number {cond:.3e})")
    if cond > 1e8:
        logger.warning(f"Q is badly conditioned (cond {cond:.3e})")
    if not jacobians:
        raise ContraktInputError("no Jacobian samples supplied")
    if jacobians[0][2].shape[0] != q.shape[0]:
        raise DimensionMismatch(f"Q is {q.shape} but Jacobians are {jacobians[0][2].shape}")

    spec = SemiNormSpec(p=p, weight=q)
    worst, sample = _max_measure(jacobians, spec)
    c = float(lambda2) - worst
    status = CERTIFIED if c > 0 else REFUTED
    logger.info(f"sync condition {status}: lambda2 = {lambda2:.6g}, max mu = {worst:.6g}, c = {c:.6g}")
    return Certificate(
        kind=SYNC_CONDITION, norm=spec, rate_c=c, worst_sample=sample, sample_count=len(jacobians),
        status=status,
        notes=["the condition quantifies over all states; only the sampled box is checked"],
        details={'lambda2': float(lambda2), 'max_measure': worst, 'q_condition': cond},
    )


def _subspace_points(d: DomainSampler, basis: np.ndarray, offset: np.ndarray) -> List[np.ndarray]:
    coeffs = d.coefficients(basis.shape[1], count=min(d.random_count, 50) or 1)
    return [offset] + [offset + basis @ c for c in coeffs]


def analyze_doubly_contracting(
    sys: DynSystem,
    weak_norm: SemiNormSpec,
    semi_spec: SemiNormSpec,
    equil_subspace_basis,
    d: DomainSampler,
    x_star=None,
) -> Certificate:
    """
    Weak contraction plus semi-contraction with an equilibrium subspace.

    Args:
        sys: System to analyze
        weak_norm: Norm for the weak leg
        semi_spec: Semi-norm for the semi leg
        equil_subspace_basis: Columns spanning S, where f vanishes on x_star + S
        d: Sample domain
        x_star: Limit point used for the predicted rate (default: origin)

    Returns:
        Certificate certified iff both legs are, with the predicted rate
        -alpha(Df(x*)) on the complement of S
    """
    basis = orthonormal_basis(equil_subspace_basis)
    offset = np.zeros(sys.dim) if x_star is None else np.asarray(x_star, dtype=float)
    tol = CERTIFY_CONFIG['equilibrium_tol']
    for t in d.time_samples:
        for z in _subspace_points(d, basis, offset):
            residual = float(np.linalg.norm(sys(t, z)))
            if residual > tol * (1.0 + np.linalg.norm(z)):
                raise EquilibriumSubspaceViolation(f"|f(t, z)| = {residual:.3e} at t={t}, z={z}")

    weak = certify_weak_contraction(sys, weak_norm, d)
    semi = certify_semi_contraction(sys, semi_spec, d)
    jac = sys.jac(0.0, offset)
    perp = orthogonal_complement(basis, sys.dim)
    predicted = -restricted_abscissa(jac.conj().T, perp)

    status = CERTIFIED if weak.certified and semi.certified else REFUTED
    worst = semi.worst_sample if not semi.certified or weak.certified else weak.worst_sample
    logger.info(f"{sys.name}: doubly contracting {status}, predicted rate {predicted:.6g}")
    return Certificate(
        kind=DOUBLY_CONTRACTING, norm=semi_spec, second_norm=weak_norm, rate_c=semi.rate_c,
        worst_sample=worst, sample_count=semi.sample_count, status=status,
        global_proof=weak.global_proof and semi.global_proof,
        predicted_rate=predicted, hypotheses=dict(sys.hypotheses),
        notes=list(dict.fromkeys(weak.notes + semi.notes)),
        details={'weak': weak.to_dict(), 'semi': semi.to_dict(), 'x_star': offset.tolist()},
    )


def equilibrium_rate(sys: DynSystem, x_star) -> float:
    """-alpha(Df(x*)) for a Hurwitz Jacobian at the equilibrium."""
    jac = sys.jac(0.0, np.asarray(x_star, dtype=float))
    abscissa = float(np.max(np.linalg.eigvals(jac).real))
    if abscissa >= 0:
        raise NotHurwitz(f"Df(x*) has spectral abscissa {abscissa:.3e}")
    return -abscissa
