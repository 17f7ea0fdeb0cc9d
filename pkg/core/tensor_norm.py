"""
(2,p)-tensor norm on R^{nk} = R^n (x) R^k.

A representation u = sum_i v^i (x) w^i costs (sum_i ||v^i||_2^2 ||w^i||_p^2)^{1/2}.
The norm is the infimum of that cost. Over an unbounded number of terms the
infimum collapses (splitting a term into m copies scales its cost by
1/sqrt(m)), so the brute-force search is always capped at rank_cap terms and
reports an upper bound on the capped infimum.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from config import TENSOR_CONFIG
from core.exceptions import BadRepresentation, DimensionMismatch
from core.measures import PValue, matrix_measure, measure_value, parse_p, SemiNormSpec
from utils.parallel import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TensorRepresentation:
    """Terms (v^i, w^i) with v^i in R^n and w^i in R^k."""
    n: int
    k: int
    terms: Tuple[Tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        fixed = []
        for v, w in self.terms:
            v = np.asarray(v, dtype=float).ravel()
            w = np.asarray(w, dtype=float).ravel()
            if v.shape[0] != self.n or w.shape[0] != self.k:
                raise DimensionMismatch(f"term shapes {v.shape}, {w.shape} for n={self.n}, k={self.k}")
            fixed.append((v, w))
        object.__setattr__(self, 'terms', tuple(fixed))

    @classmethod
    def from_factors(cls, v_mat: np.ndarray, w_mat: np.ndarray) -> 'TensorRepresentation':
        """Columns of v_mat (n x r) and w_mat (k x r) are the factors."""
        return cls(n=v_mat.shape[0], k=w_mat.shape[0],
                   terms=tuple((v_mat[:, i], w_mat[:, i]) for i in range(v_mat.shape[1])))

    @property
    def rank(self) -> int:
        return len(self.terms)

    def reconstruct(self) -> np.ndarray:
        u = np.zeros(self.n * self.k)
        for v, w in self.terms:
            u += np.kron(v, w)
        return u

    def cost(self, p: PValue) -> float:
        p = parse_p(p)
        return float(np.sqrt(sum((np.linalg.norm(v) * np.linalg.norm(w, ord=p)) ** 2
                                 for v, w in self.terms)))

    def left_multiply(self, m: np.ndarray) -> 'TensorRepresentation':
        """Representation of (M (x) I_k) u."""
        m = np.asarray(m, dtype=float)
        return TensorRepresentation(n=m.shape[0], k=self.k,
                                    terms=tuple((m @ v, w) for v, w in self.terms))

    def apply_block_diagonal(self, blocks: Sequence[np.ndarray]) -> 'TensorRepresentation':
        """Representation of blkdiag(blocks) u via sum_i sum_j v^i_j e_j (x) blocks[j] w^i."""
        if len(blocks) != self.n:
            raise DimensionMismatch(f"{len(blocks)} blocks for n={self.n}")
        eye = np.eye(self.n)
        terms = []
        for v, w in self.terms:
            for j, block in enumerate(blocks):
                if v[j] != 0.0:
                    terms.append((v[j] * eye[j], np.asarray(block, dtype=float) @ w))
        if not terms:
            terms.append((np.zeros(self.n), np.zeros(self.k)))
        return TensorRepresentation(n=self.n, k=self.k, terms=tuple(terms))

    def scaled(self, c: float) -> 'TensorRepresentation':
        return TensorRepresentation(n=self.n, k=self.k, terms=tuple((c * v, w) for v, w in self.terms))

    def __add__(self, other: 'TensorRepresentation') -> 'TensorRepresentation':
        if (self.n, self.k) != (other.n, other.k):
            raise DimensionMismatch("cannot add representations of different shapes")
        return TensorRepresentation(n=self.n, k=self.k, terms=self.terms + other.terms)


@dataclass
class TensorNormEstimate:
    """Best value found by the brute-force search."""
    value: float
    representation: TensorRepresentation = field(repr=False)
    rank_cap: int
    restarts: int
    seed: int
    candidates: int

    def to_dict(self) -> Dict:
        return {
            'value': self.value,
            'rank': self.representation.rank,
            'rank_cap': self.rank_cap,
            'restarts': self.restarts,
            'seed': self.seed,
            'candidates': self.candidates,
        }


def _as_target(u, n: int, k: int) -> np.ndarray:
    u = np.asarray(u, dtype=float).ravel()
    if u.shape[0] != n * k:
        raise DimensionMismatch(f"vector of length {u.shape[0]} is not n*k = {n * k}")
    return u


def check_representation(u, rep: TensorRepresentation, tol: Optional[float] = None) -> None:
    if tol is None:
        tol = TENSOR_CONFIG['reconstruct_tol']
    u = _as_target(u, rep.n, rep.k)
    err = np.linalg.norm(rep.reconstruct() - u)
    if err > tol * (1.0 + np.linalg.norm(u)):
        raise BadRepresentation(f"representation misses the target by {err:.3e}")


def tensor_norm_upper(u, rep: TensorRepresentation, p: PValue) -> float:
    """Cost of a representation of u; an upper bound on ||u||_(2,p)."""
    check_representation(u, rep)
    return rep.cost(p)


def svd_representation(u, n: int, k: int) -> TensorRepresentation:
    """Terms sigma_i a_i (x) b_i from the SVD of the n x k reshaping."""
    u = _as_target(u, n, k)
    a, s, bt = np.linalg.svd(u.reshape(n, k), full_matrices=False)
    keep = s > 1e-14 * max(s[0], 1e-300) if s.size else np.zeros(0, dtype=bool)
    if not np.any(keep):
        return TensorRepresentation(n=n, k=k, terms=((np.zeros(n), np.zeros(k)),))
    return TensorRepresentation.from_factors(a[:, keep] * s[keep], bt[keep].T)


def standard_representation(u, n: int, k: int) -> TensorRepresentation:
    """Terms e_j (x) u_j, one per block; costs the mixed l2/lp norm."""
    u = _as_target(u, n, k)
    blocks = u.reshape(n, k)
    eye = np.eye(n)
    return TensorRepresentation(n=n, k=k, terms=tuple((eye[j], blocks[j]) for j in range(n)))


def mixed_norm(u, n: int, k: int, p: PValue) -> float:
    """(sum_j ||u_j||_p^2)^{1/2} over the n blocks of length k."""
    return standard_representation(u, n, k).cost(p)


def tensor_norm_lower(u, n: int, k: int, p: PValue, rank_cap: Optional[int] = None) -> float:
    """
    Lower bound on the cost of every representation with at most rank_cap terms.

    c_p ||U||_* / sqrt(r) with c_p = min ||w||_p / ||w||_2 = k^{min(0, 1/p - 1/2)}.
    """
    p = parse_p(p)
    u = _as_target(u, n, k)
    if rank_cap is None:
        rank_cap = min(n, k) + 1
    c_p = 1.0 if p <= 2.0 else k ** (1.0 / p - 0.5)
    nuclear = float(np.linalg.svd(u.reshape(n, k), compute_uv=False).sum())
    return c_p * nuclear / np.sqrt(rank_cap)


def kron_seminorm_upper(x, r: np.ndarray, q: np.ndarray, p: PValue) -> float:
    """Mixed-norm upper bound on ||(R (x) Q) x||_(2,p)."""
    r = np.asarray(r)
    q = np.asarray(q)
    y = np.kron(r, q) @ np.asarray(x).ravel()
    if np.iscomplexobj(y):
        blocks = y.reshape(r.shape[0], q.shape[0])
        p = parse_p(p)
        return float(np.sqrt(sum(np.linalg.norm(b, ord=p) ** 2 for b in blocks)))
    return mixed_norm(y, r.shape[0], q.shape[0], p)


def tensor_measure_bound(blocks: Sequence[np.ndarray], p: PValue) -> float:
    """max_i mu_p(blocks[i]), an upper bound on the (2,p) measure of blkdiag(blocks)."""
    spec = SemiNormSpec(p=p)
    if spec.has_closed_form:
        return float(max(matrix_measure(b, spec.p) for b in blocks))
    return float(max(measure_value(b, spec).value for b in blocks))


# ---------------------------------------------------------------------------
# Brute-force search
# ---------------------------------------------------------------------------

class _CappedProblem:
    """
    Representations with r terms parameterized so reconstruction is exact.

    With U = A B^T (thin SVD, A = U_s Sigma), V = A G and
    W^T = G^+ B^T + (I - G^+ G) Z satisfy V W^T = U whenever G has full
    row rank.
    """

    def __init__(self, u: np.ndarray, n: int, k: int, p: float, r: int):
        self.u, self.n, self.k, self.p, self.r = u, n, k, p, r
        a, s, bt = np.linalg.svd(u.reshape(n, k), full_matrices=False)
        q = int(np.sum(s > 1e-12 * max(s[0], 1e-300))) if s.size else 0
        self.q = max(q, 1)
        self.a = a[:, :self.q] * s[:self.q]
        self.b = bt[:self.q].T

    @property
    def dim(self) -> int:
        return self.q * self.r + self.r * self.k

    def factors(self, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        g = theta[:self.q * self.r].reshape(self.q, self.r)
        z = theta[self.q * self.r:].reshape(self.r, self.k)
        g_pinv = np.linalg.pinv(g)
        wt = g_pinv @ self.b.T + (np.eye(self.r) - g_pinv @ g) @ z
        return self.a @ g, wt.T

    def cost(self, theta: np.ndarray) -> float:
        v, w = self.factors(theta)
        return float(np.sqrt(np.sum((np.linalg.norm(v, axis=0) * np.linalg.norm(w, ord=self.p, axis=0)) ** 2)))

    def svd_start(self) -> np.ndarray:
        g = np.zeros((self.q, self.r))
        g[:, :self.q] = np.eye(self.q)
        return np.concatenate([g.ravel(), np.zeros(self.r * self.k)])


def _local_search(task) -> Tuple[float, int, int, Optional[np.ndarray], Optional[np.ndarray]]:
    problem, theta0, restart, options = task
    res = minimize(problem.cost, theta0, method='Nelder-Mead', options=options)
    v, w = problem.factors(res.x)
    if np.linalg.norm(v @ w.T - problem.u.reshape(problem.n, problem.k)) > \
            TENSOR_CONFIG['reconstruct_tol'] * (1.0 + np.linalg.norm(problem.u)):
        return np.inf, problem.r, restart, None, None
    return problem.cost(res.x), problem.r, restart, v, w


def tensor_norm_bruteforce(
    u,
    n: int,
    k: int,
    p: PValue,
    rank_cap: Optional[int] = None,
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
    warm_starts: Sequence[TensorRepresentation] = (),
) -> TensorNormEstimate:
    """
    Multi-start local minimization of the representation cost.

    Every r from rank(u) to rank_cap gets one search from the SVD point and
    `restarts` searches from seeded random points; the seed of each search
    depends only on (seed, restart, r), so the result is nonincreasing in
    both rank_cap and restarts. The SVD and block representations and any
    warm starts (evaluated as given, regardless of their term count) are
    always candidates.

    Args:
        u: Target vector in R^{nk}
        n, k: Factor dimensions (n * k <= 16)
        p: Norm on the second factor
        rank_cap: Maximum number of terms searched (default min(n, k) + 1)
        restarts: Random starts per rank (default 32)
        seed: Base seed (default 0)
        warm_starts: Representations of u to include as candidates

    Returns:
        TensorNormEstimate with the best value and representation
    """
    p = parse_p(p)
    u = _as_target(u, n, k)
    if n * k > TENSOR_CONFIG['max_size']:
        raise DimensionMismatch(f"brute force is limited to n*k <= {TENSOR_CONFIG['max_size']}")
    rank_cap = min(n, k) + 1 if rank_cap is None else int(rank_cap)
    restarts = TENSOR_CONFIG['restarts'] if restarts is None else int(restarts)
    seed = TENSOR_CONFIG['seed'] if seed is None else int(seed)

    candidates: List[Tuple[float, int, TensorRepresentation]] = []
    base = [svd_representation(u, n, k), standard_representation(u, n, k)]
    for idx, rep in enumerate(list(base) + list(warm_starts)):
        check_representation(u, rep)
        if idx < len(base) and rep.rank > rank_cap:
            continue
        candidates.append((rep.cost(p), -1 - idx, rep))

    q = _CappedProblem(u, n, k, p, 1).q
    if rank_cap < q:
        raise BadRepresentation(f"rank_cap={rank_cap} is below rank(u)={q}")

    options = {'xatol': TENSOR_CONFIG['xatol'], 'fatol': TENSOR_CONFIG['fatol'],
               'maxiter': TENSOR_CONFIG['max_iter'], 'adaptive': True}
    tasks = []
    if np.linalg.norm(u) > 0:
        for r in range(q, rank_cap + 1):
            problem = _CappedProblem(u, n, k, p, r)
            tasks.append((problem, problem.svd_start(), 0, options))
            for restart in range(restarts):
                rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(restart, r)))
                tasks.append((problem, rng.standard_normal(problem.dim), restart + 1, options))

    for value, r, restart, v, w in parallel_map(_local_search, tasks):
        if v is None:
            continue
        candidates.append((value, r * (restarts + 1) + restart, TensorRepresentation.from_factors(v, w)))

    candidates.sort(key=lambda c: (c[0], c[1]))
    best_value, _, best_rep = candidates[0]
    logger.debug(f"tensor norm brute force: {len(candidates)} candidates, best {best_value:.6g}")
    return TensorNormEstimate(value=float(best_value), representation=best_rep, rank_cap=rank_cap,
                              restarts=restarts, seed=seed, candidates=len(candidates))
