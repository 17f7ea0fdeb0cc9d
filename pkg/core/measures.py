"""
Norms, semi-norms, matrix measures and matrix semi-measures.

A semi-norm is |x| = ||R x||_p for a full-row-rank weight R (k x n).
Its matrix semi-measure reduces to the ordinary measure of the k x k
matrix R A R†, which is how everything here is computed.
"""

import logging
from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize

from config import LINALG_CONFIG, MEASURE_CONFIG, GRAPH_CONFIG
from core.exceptions import (
    AllZeroWeights,
    ContraktInputError,
    DimensionMismatch,
    EpsilonTooSmall,
    KernelNotInvariant,
    NonConvergence,
    NotInvariant,
    PositiveSpectrum,
    RankDeficient,
    UnsupportedP,
)
from core.linalg import (
    as_matrix,
    eigen,
    invariance_residual,
    kernel_basis,
    numerical_rank,
    orthogonal_complement,
    orthonormal_basis,
    pinv,
    real_if_close,
)

logger = logging.getLogger(__name__)

PValue = Union[int, float, str]

CLOSED_FORM_P = (1.0, 2.0, np.inf)

METHOD_CLOSED_FORM = 'closed_form'
METHOD_REDUCED = 'reduced'
METHOD_LMI_BISECTION = 'lmi_bisection'
METHOD_RESTRICTED_ABSCISSA = 'restricted_abscissa'
METHOD_LIMIT_ORACLE = 'limit_oracle'


def parse_p(p: PValue) -> float:
    """Normalize p to 1.0, 2.0, inf or a generic float in (1, inf)."""
    if isinstance(p, str):
        token = p.strip().lower()
        if token in ('inf', 'infinity', '∞'):
            return np.inf
        p = float(token)
    p = float(p)
    if p == 1.0 or p == 2.0 or np.isinf(p):
        return np.inf if np.isinf(p) else p
    if not (1.0 < p < np.inf):
        raise UnsupportedP(f"p must be 1, inf or lie in (1, inf), got {p}")
    return p


def format_p(p: float) -> str:
    if np.isinf(p):
        return 'inf'
    return f"{p:g}"


@dataclass(frozen=True, eq=False)
class SemiNormSpec:
    """
    A p-norm choice plus an optional full-rank weight R.

    Kernel basis and R† are cached at construction.
    """
    p: float
    weight: Optional[np.ndarray] = None
    kernel: Optional[np.ndarray] = field(init=False, default=None, repr=False)
    weight_pinv: Optional[np.ndarray] = field(init=False, default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'p', parse_p(self.p))
        if self.weight is None:
            return
        r = as_matrix(self.weight, "weight")
        rows, cols = r.shape
        if rows > cols:
            raise DimensionMismatch(f"weight must be k x n with k <= n, got {r.shape}")
        if numerical_rank(r) != rows:
            raise RankDeficient(f"weight of shape {r.shape} is not full row rank")
        r = np.array(real_if_close(r), copy=True)
        r.setflags(write=False)
        object.__setattr__(self, 'weight', r)
        object.__setattr__(self, 'kernel', kernel_basis(r))
        object.__setattr__(self, 'weight_pinv', pinv(r))

    @classmethod
    def plain(cls, p: PValue) -> 'SemiNormSpec':
        return cls(p=p)

    @property
    def is_weighted(self) -> bool:
        return self.weight is not None

    @property
    def dim(self) -> Optional[int]:
        return None if self.weight is None else self.weight.shape[1]

    @property
    def has_closed_form(self) -> bool:
        return self.p in CLOSED_FORM_P

    def to_dict(self) -> Dict:
        out = {'p': format_p(self.p), 'weighted': self.is_weighted}
        if self.weight is not None:
            out['weight_shape'] = list(self.weight.shape)
            out['kernel_dim'] = int(self.kernel.shape[1])
        return out


@dataclass
class MeasureResult:
    """Value of a (semi-)measure and how it was obtained."""
    value: float
    method: str
    residual: float = 0.0

    def to_dict(self) -> Dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def vector_norm(x: np.ndarray, p: PValue) -> float:
    return float(np.linalg.norm(np.asarray(x).ravel(), ord=parse_p(p)))


def seminorm(v, s: SemiNormSpec) -> float:
    """|v| = ||R v||_p, or ||v||_p without weight."""
    v = np.asarray(v).ravel()
    if s.weight is None:
        return vector_norm(v, s.p)
    if v.shape[0] != s.weight.shape[1]:
        raise DimensionMismatch(f"vector of length {v.shape[0]} for weight {s.weight.shape}")
    return vector_norm(s.weight @ v, s.p)


def operator_norm(a, p: PValue) -> float:
    """Induced p-norm for p in {1, 2, inf}."""
    p = parse_p(p)
    a = as_matrix(a, "A")
    if p not in CLOSED_FORM_P:
        raise UnsupportedP(f"no closed-form operator norm for p={p}")
    return float(np.linalg.norm(a, ord=int(p) if np.isfinite(p) else np.inf))


def _dual_vector(y: np.ndarray, p: float) -> np.ndarray:
    """Gradient of ||y||_p for y != 0."""
    ny = np.linalg.norm(y, ord=p)
    return np.sign(y) * (np.abs(y) / ny) ** (p - 1.0)


def generic_p_norm(
    m: np.ndarray,
    p: float,
    starts: Sequence[np.ndarray] = (),
    restarts: Optional[int] = None,
    seed: int = 0,
) -> Tuple[float, np.ndarray]:
    """
    Estimate the induced p-norm of a real matrix for generic p.

    Multi-start maximization of ||Mx||_p / ||x||_p. The returned value is a
    lower estimate attained at the returned vector.
    """
    if np.iscomplexobj(m) and np.any(np.imag(m) != 0):
        raise UnsupportedP("generic-p norms are supported for real matrices only")
    m = np.real(m)
    n = m.shape[1]
    if restarts is None:
        restarts = MEASURE_CONFIG['oracle_restarts']
    rng = np.random.default_rng(seed)

    candidates: List[np.ndarray] = [np.eye(n)[i] for i in range(n)]
    candidates.append(np.ones(n))
    candidates.extend(np.asarray(s, dtype=float) for s in starts)
    candidates.extend(rng.standard_normal((restarts, n)))

    def objective(x):
        nx = np.linalg.norm(x, ord=p)
        y = m @ x
        ny = np.linalg.norm(y, ord=p)
        if nx == 0.0 or ny == 0.0:
            return 0.0, np.zeros_like(x)
        val = ny / nx
        grad = (m.T @ _dual_vector(y, p)) / nx - val * _dual_vector(x, p) / nx
        return -val, -grad

    best_val, best_x = -np.inf, candidates[0]
    for x0 in candidates:
        if not np.any(x0):
            continue
        f0, _ = objective(x0)
        if -f0 > best_val:
            best_val, best_x = -f0, x0
        res = minimize(objective, x0, jac=True, method='L-BFGS-B',
                       options={'gtol': 1e-14, 'ftol': 1e-16,
                                'maxiter': MEASURE_CONFIG['oracle_iterations']})
        if -res.fun > best_val:
            best_val, best_x = float(-res.fun), res.x
    return float(best_val), best_x / np.linalg.norm(best_x, ord=p)


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

def _require_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got {a.shape}")


def matrix_measure(a, p: PValue) -> float:
    """
    Closed-form matrix measure for p in {1, 2, inf}.

    mu_1: max column rule, mu_inf: max row rule, mu_2: half the largest
    eigenvalue of the Hermitian part.
    """
    p = parse_p(p)
    a = as_matrix(a, "A")
    _require_square(a)
    if p == 2.0:
        herm = 0.5 * (a + a.conj().T)
        return float(sla.eigvalsh(herm)[-1])
    if p not in CLOSED_FORM_P:
        raise UnsupportedP(f"no closed-form measure for p={p}; use measure_limit_oracle")
    diag = np.real(np.diag(a))
    off = np.abs(a)
    np.fill_diagonal(off, 0.0)
    if p == 1.0:
        return float(np.max(diag + off.sum(axis=0)))
    return float(np.max(diag + off.sum(axis=1)))


def reduced_matrix(a, s: SemiNormSpec) -> np.ndarray:
    """R A R† for the weight of s (A itself when unweighted)."""
    a = as_matrix(a, "A")
    _require_square(a)
    if s.weight is None:
        return a
    if a.shape[0] != s.weight.shape[1]:
        raise DimensionMismatch(f"A is {a.shape} but weight is {s.weight.shape}")
    return s.weight @ a @ s.weight_pinv


def semi_measure(a, s: SemiNormSpec) -> MeasureResult:
    """Matrix semi-measure via the reduced matrix R A R†."""
    if s.weight is None:
        return MeasureResult(matrix_measure(a, s.p), METHOD_CLOSED_FORM, 0.0)
    if not s.has_closed_form:
        raise UnsupportedP(f"no closed-form semi-measure for p={s.p}; use measure_limit_oracle")
    m = reduced_matrix(a, s)
    k = s.weight.shape[0]
    residual = float(np.linalg.norm(s.weight @ s.weight_pinv - np.eye(k), 2))
    return MeasureResult(matrix_measure(m, s.p), METHOD_REDUCED, residual)


def induced_norm(m: np.ndarray, p: float, starts: Sequence[np.ndarray] = ()) -> Tuple[float, Optional[np.ndarray]]:
    if p in CLOSED_FORM_P:
        return operator_norm(m, p), None
    return generic_p_norm(m, p, starts=starts)


def measure_limit_oracle(a, s: SemiNormSpec, h_list: Optional[Sequence[float]] = None) -> MeasureResult:
    """
    Evaluate the defining limit (||R(I + hA)R†||_p - 1) / h.

    The quotient is nonincreasing as h decreases; violations are logged and
    returned as the residual. The estimate is Richardson-extrapolated from
    the two smallest h and never exceeds the smallest-h quotient.
    """
    if h_list is None:
        h_list = MEASURE_CONFIG['oracle_h_list']
    h_list = sorted((float(h) for h in h_list), reverse=True)
    if not h_list or h_list[-1] <= 0:
        raise ContraktInputError("h_list must hold positive step sizes")

    m = reduced_matrix(a, s)
    eye = np.eye(m.shape[0])
    quotients = []
    starts: List[np.ndarray] = []
    for h in h_list:
        value, x = induced_norm(eye + h * m, s.p, starts=starts)
        if x is not None:
            starts = [x]
        quotients.append((value - 1.0) / h)

    violation = 0.0
    for prev, cur in zip(quotients, quotients[1:]):
        violation = max(violation, cur - prev)
    if violation > 1e-8 * (1.0 + abs(quotients[-1])):
        logger.warning(f"limit oracle quotients not monotone (excess {violation:.3e})")

    if len(h_list) >= 2:
        h1, h2 = h_list[-2], h_list[-1]
        f1, f2 = quotients[-2], quotients[-1]
        estimate = (h1 * f2 - h2 * f1) / (h1 - h2)
        estimate = min(estimate, f2)
    else:
        estimate = quotients[-1]
    logger.debug(f"oracle quotients {quotients} -> {estimate}")
    return MeasureResult(float(estimate), METHOD_LIMIT_ORACLE, float(max(violation, 0.0)))


def measure_value(a, s: SemiNormSpec) -> MeasureResult:
    """Closed form when available, limit oracle otherwise."""
    if s.has_closed_form:
        return semi_measure(a, s)
    return measure_limit_oracle(a, s)


def weighted_diag_measure(a, xi, p: PValue) -> float:
    """
    Measure for the semi-norm weighted by diag(xi), xi >= 0.

    Computed as mu_p(diag(xi_S) A_SS diag(xi_S)^-1) on the support S of xi.
    For p = 1 this is max_j a_jj + (1/xi_j) sum_{i != j} xi_i |a_ij|.
    """
    p = parse_p(p)
    a = as_matrix(a, "A")
    _require_square(a)
    xi = np.asarray(xi, dtype=float).ravel()
    if xi.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"xi has length {xi.shape[0]}, A is {a.shape}")
    if np.any(xi < 0):
        raise ContraktInputError("xi must be entrywise nonnegative")
    support = np.flatnonzero(xi > 0)
    if support.size == 0:
        raise AllZeroWeights("xi has no positive entry")
    if p not in (1.0, np.inf):
        raise UnsupportedP(f"weighted diagonal measure defined for p in {{1, inf}}, got {p}")
    sub = a[np.ix_(support, support)]
    w = xi[support]
    return matrix_measure((w[:, None] * sub) / w[None, :], p)


def weighted_diag_measure_printed(a, xi, p: PValue) -> float:
    """
    The index placement with xi_j outside and xi_i inside the sum.

    Equals weighted_diag_measure at the reciprocal weights on the support.
    """
    xi = np.asarray(xi, dtype=float).ravel()
    recip = np.zeros_like(xi)
    pos = xi > 0
    recip[pos] = 1.0 / xi[pos]
    if np.any(xi < 0):
        raise ContraktInputError("xi must be entrywise nonnegative")
    return weighted_diag_measure(a, recip, p)


# ---------------------------------------------------------------------------
# LMI and spectral routes
# ---------------------------------------------------------------------------

def lmi_semi_measure_check(a, r, c: float, restricted: bool = False, tol: Optional[float] = None) -> bool:
    """
    Test P A + A^H P <= 2 c P with P = R^H R.

    Args:
        a: Square matrix
        r: Weight matrix
        c: Candidate bound
        restricted: Test only on Ker(P)-perp (congruence with a basis of Img(R^H))
        tol: Allowed positive eigenvalue, relative to ||P|| (default 1e-9)

    Raises:
        KernelNotInvariant: unrestricted form with Ker(R) not invariant under A
    """
    if tol is None:
        tol = MEASURE_CONFIG['lmi_tol']
    a = as_matrix(a, "A")
    r = as_matrix(r, "R")
    _require_square(a)
    if a.shape[0] != r.shape[1]:
        raise DimensionMismatch(f"A is {a.shape} but R is {r.shape}")
    p_mat = r.conj().T @ r
    lmi = p_mat @ a + a.conj().T @ p_mat - 2.0 * c * p_mat
    lmi = 0.5 * (lmi + lmi.conj().T)
    if restricted:
        z = orthogonal_complement(kernel_basis(r), a.shape[0])
        lmi = z.conj().T @ lmi @ z
    else:
        ker = kernel_basis(r)
        if invariance_residual(a, ker) > LINALG_CONFIG['invariance_tol']:
            raise KernelNotInvariant("Ker(R) is not invariant under A")
    if lmi.size == 0:
        return True
    top = float(sla.eigvalsh(lmi)[-1])
    return top <= tol * np.linalg.norm(p_mat, 2)


def lmi_bisection(a, r, restricted: bool = False, rel_tol: float = 1e-12, max_iter: int = 200) -> MeasureResult:
    """Smallest c accepted by the LMI test, found by bisection."""
    def accepts(c):
        return lmi_semi_measure_check(a, r, c, restricted=restricted, tol=1e-13)

    hi, lo = 1.0, -1.0
    for _ in range(max_iter):
        if accepts(hi):
            break
        hi = 2.0 * hi + 1.0
    else:
        raise NonConvergence("LMI test rejects every bound tried")
    for _ in range(max_iter):
        if not accepts(lo):
            break
        lo = 2.0 * lo - 1.0
    else:
        raise NonConvergence("LMI test accepts every bound tried")
    for _ in range(max_iter):
        if hi - lo <= rel_tol * (1.0 + abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if accepts(mid):
            hi = mid
        else:
            lo = mid
    return MeasureResult(float(hi), METHOD_LMI_BISECTION, float(hi - lo))


def restricted_spectrum(a, s_basis) -> np.ndarray:
    """Eigenvalues of A restricted to the invariant subspace span(s_basis)."""
    a = as_matrix(a, "A")
    _require_square(a)
    s_basis = np.asarray(s_basis)
    if s_basis.ndim == 1:
        s_basis = s_basis.reshape(-1, 1)
    if s_basis.shape[1] == 0:
        return np.zeros(0, dtype=complex)
    residual = invariance_residual(a, s_basis)
    if residual > LINALG_CONFIG['invariance_tol']:
        raise NotInvariant(f"subspace is not invariant (residual {residual:.3e})")
    q = orthonormal_basis(s_basis)
    return eigen(q.conj().T @ a @ q).eigenvalues


def restricted_abscissa(a, s_basis) -> float:
    """Largest real part over the spectrum of A on an invariant subspace."""
    spectrum = restricted_spectrum(a, s_basis)
    if spectrum.size == 0:
        return -np.inf
    return float(np.max(spectrum.real))


def alpha_ess(a, zero_tol: Optional[float] = None) -> float:
    """
    Essential spectral abscissa: max real part over nonzero eigenvalues.

    Returns -inf when every eigenvalue is zero.
    """
    if zero_tol is None:
        zero_tol = GRAPH_CONFIG['zero_eig_tol']
    lam = eigen(a).eigenvalues
    if np.max(lam.real) > MEASURE_CONFIG['positive_spectrum_tol']:
        raise PositiveSpectrum(f"eigenvalue with real part {np.max(lam.real):.3e} > 0")
    nonzero = lam[np.abs(lam) > zero_tol]
    if nonzero.size == 0:
        return -np.inf
    return float(np.max(nonzero.real))


def semi_measure_via_abscissa(a, r) -> MeasureResult:
    """
    mu_{2,R}(A) as half the abscissa of T = A + P† A^H P on Ker(R)-perp.

    Ker(R) is invariant under T, so Ker(R)-perp is invariant under T^H;
    the spectrum is taken there.
    """
    a = as_matrix(a, "A")
    r = as_matrix(r, "R")
    ker = kernel_basis(r)
    if invariance_residual(a, ker) > LINALG_CONFIG['invariance_tol']:
        raise KernelNotInvariant("Ker(R) is not invariant under A")
    p_mat = r.conj().T @ r
    t = a + pinv(p_mat) @ a.conj().T @ p_mat
    perp = orthogonal_complement(ker, a.shape[0])
    return MeasureResult(0.5 * restricted_abscissa(t.conj().T, perp), METHOD_RESTRICTED_ABSCISSA, 0.0)


# ---------------------------------------------------------------------------
# Optimal weights
# ---------------------------------------------------------------------------

def _canonicalize_rows(r: np.ndarray) -> np.ndarray:
    """Unit rows whose first non-negligible entry is real positive."""
    r = r / np.linalg.norm(r, axis=1, keepdims=True)
    for i in range(r.shape[0]):
        lead = np.flatnonzero(np.abs(r[i]) > 1e-12)
        if lead.size:
            r[i] = r[i] * (np.abs(r[i, lead[0]]) / r[i, lead[0]])
    if np.iscomplexobj(r) and np.max(np.abs(r.imag)) < 1e-13:
        r = r.real.copy()
    return r


def _weight_from_eigenvectors(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    return _canonicalize_rows(y.conj().T @ w.conj().T)


def optimal_R_construction(
    a,
    s_basis,
    p: PValue = np.inf,
    epsilon: Optional[float] = None,
    seed: Optional[int] = None,
    budget: Optional[int] = None,
) -> np.ndarray:
    """
    Weight R with Ker(R) = S whose semi-measure is within epsilon of optimal.

    Rows are eigenvectors of W^H A^H W mapped back through W^H, where W is an
    orthonormal basis of S-perp; R A R† is then diagonal. Defective or badly
    conditioned cases are perturbed by delta * E until the bound is met.

    Args:
        a: Square matrix with span(s_basis) invariant
        s_basis: Columns spanning S (n x 0 for S = {0})
        p: One of 1, 2, inf
        epsilon: Allowed slack above alpha_{S-perp}(A^H)
        seed: Seed of the perturbation direction
        budget: Number of delta halvings before EpsilonTooSmall

    Returns:
        R of shape (n - dim S) x n, complex when eigenvalues are complex
    """
    p = parse_p(p)
    if p not in CLOSED_FORM_P:
        raise UnsupportedP(f"optimal weights are built for p in {{1, 2, inf}}, got {p}")
    epsilon = GRAPH_CONFIG['epsilon_default'] if epsilon is None else float(epsilon)
    if epsilon <= 0:
        raise ContraktInputError("epsilon must be positive")
    seed = GRAPH_CONFIG['perturbation_seed'] if seed is None else seed
    budget = GRAPH_CONFIG['perturbation_budget'] if budget is None else budget

    a = as_matrix(a, "A")
    _require_square(a)
    n = a.shape[0]
    s_basis = np.asarray(s_basis)
    if s_basis.ndim == 1:
        s_basis = s_basis.reshape(-1, 1)
    if s_basis.shape[1] and invariance_residual(a, s_basis) > LINALG_CONFIG['invariance_tol']:
        raise NotInvariant("S is not invariant under A")

    w = orthogonal_complement(s_basis, n)
    b = w.conj().T @ a.conj().T @ w
    target = float(np.max(np.linalg.eigvals(b).real))

    def achieved(r_mat):
        return semi_measure(a, SemiNormSpec(p=p, weight=r_mat)).value

    decomposition = eigen(b)
    if not decomposition.is_defective:
        r_mat = _weight_from_eigenvectors(decomposition.right_eigenvectors, w)
        value = achieved(r_mat)
        if value <= target + epsilon:
            logger.debug(f"optimal weight found without perturbation ({value:.6g} vs {target:.6g})")
            return r_mat
        cond = float(np.linalg.cond(decomposition.right_eigenvectors))
    else:
        cond = 1.0

    rng = np.random.default_rng(seed)
    k = b.shape[0]
    e = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    e /= np.linalg.norm(e, 2)
    delta = epsilon / (4.0 * max(cond, 1.0))
    for attempt in range(budget):
        perturbed = eigen(b + delta * e, defective_cond=np.inf)
        if perturbed.right_eigenvectors is None:
            delta *= 0.5
            continue
        r_mat = _weight_from_eigenvectors(perturbed.right_eigenvectors, w)
        try:
            value = achieved(r_mat)
        except RankDeficient:
            value = np.inf
        if value <= target + epsilon:
            logger.debug(f"perturbation delta={delta:.3e} met the bound after {attempt + 1} tries")
            return r_mat
        delta *= 0.5
    raise EpsilonTooSmall(f"could not reach alpha + {epsilon:g} within {budget} perturbation attempts")
