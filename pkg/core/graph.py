"""
Weighted digraphs and the Laplacian quantities built on them.

Edge convention: (i, j, w) means node i listens to node j with a_ij = w,
so L_ii = sum_j a_ij and L_ij = -a_ij.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import scipy.linalg as sla

from config import GRAPH_CONFIG
from core.exceptions import Disconnected, DimensionMismatch, InvalidGraph, NotReachable
from core.measures import alpha_ess, optimal_R_construction

logger = logging.getLogger(__name__)

Edge = Tuple[int, int, float]


@dataclass(frozen=True)
class WeightedDigraph:
    """Nonnegative weighted adjacency given as an edge list."""
    n: int
    edges: Tuple[Edge, ...] = field(default_factory=tuple)
    directed: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise InvalidGraph(f"graph needs at least one node, got n={self.n}")
        normalized = []
        seen = set()
        for edge in self.edges:
            if len(edge) != 3:
                raise InvalidGraph(f"edge must be (i, j, w), got {edge!r}")
            i, j, w = int(edge[0]), int(edge[1]), float(edge[2])
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidGraph(f"edge ({i}, {j}) out of range for n={self.n}")
            if i == j:
                raise InvalidGraph(f"self-loop at node {i}")
            if not (w > 0 and np.isfinite(w)):
                raise InvalidGraph(f"edge ({i}, {j}) has non-positive weight {w}")
            key = (i, j) if self.directed else (min(i, j), max(i, j))
            if key in seen:
                raise InvalidGraph(f"duplicate edge {key}")
            seen.add(key)
            normalized.append((i, j, w))
        object.__setattr__(self, 'edges', tuple(normalized))

    def expanded_edges(self) -> List[Edge]:
        """Directed edge list; undirected edges appear in both directions."""
        if self.directed:
            return list(self.edges)
        out = []
        for i, j, w in self.edges:
            out.append((i, j, w))
            out.append((j, i, w))
        return out

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j, w in self.expanded_edges():
            a[i, j] = w
        return a

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.n))
        g.add_weighted_edges_from(self.expanded_edges())
        return g

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'directed': self.directed,
            'edges': [[i, j, w] for i, j, w in self.edges],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'WeightedDigraph':
        try:
            return cls(
                n=int(data['n']),
                edges=tuple(tuple(e) for e in data.get('edges', [])),
                directed=bool(data.get('directed', True)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidGraph(f"malformed graph document: {e}") from e

    @classmethod
    def undirected(cls, n: int, edges: Sequence[Sequence[float]]) -> 'WeightedDigraph':
        return cls(n=n, edges=tuple(tuple(e) for e in edges), directed=False)

    @classmethod
    def complete(cls, n: int, weight: float = 1.0) -> 'WeightedDigraph':
        return cls.undirected(n, [(i, j, weight) for i in range(n) for j in range(i + 1, n)])

    @classmethod
    def path(cls, n: int, weight: float = 1.0) -> 'WeightedDigraph':
        return cls.undirected(n, [(i, i + 1, weight) for i in range(n - 1)])

    @classmethod
    def star(cls, n: int, weight: float = 1.0) -> 'WeightedDigraph':
        """Node 0 is the center."""
        return cls.undirected(n, [(0, j, weight) for j in range(1, n)])


@dataclass(frozen=True, eq=False)
class LaplacianBundle:
    """Laplacian and its derived quantities for one graph."""
    L: np.ndarray
    v: np.ndarray
    alpha_ess: float
    lambda2: Optional[float] = None
    R_V: Optional[np.ndarray] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'L': self.L.tolist(),
            'v': self.v.tolist(),
            'alpha_ess': self.alpha_ess,
            'lambda2': self.lambda2,
            'R_V': None if self.R_V is None else self.R_V.tolist(),
        }


def laplacian(g: WeightedDigraph) -> np.ndarray:
    """L = diag(A 1) - A."""
    a = g.adjacency()
    return np.diag(a.sum(axis=1)) - a


def globally_reachable_nodes(g: WeightedDigraph) -> List[int]:
    """Nodes reachable from every node; empty when there are none."""
    condensed = nx.condensation(g.to_networkx())
    sinks = [c for c in condensed.nodes if condensed.out_degree(c) == 0]
    if len(sinks) != 1:
        return []
    return sorted(condensed.nodes[sinks[0]]['members'])


def globally_reachable(g: WeightedDigraph) -> bool:
    """True iff some node can be reached along directed edges from every node."""
    return bool(globally_reachable_nodes(g))


def is_connected(g: WeightedDigraph) -> bool:
    return nx.is_weakly_connected(g.to_networkx())


def dominant_left_eigenvector(L: np.ndarray) -> np.ndarray:
    """
    Left kernel vector v of L with v >= 0 and 1^T v = 1.

    Raises:
        NotReachable: if zero is not a simple eigenvalue
    """
    L = np.asarray(L, dtype=float)
    kernel = sla.null_space(L.T, rcond=1e-10)
    if kernel.shape[1] != 1:
        raise NotReachable(f"left kernel of L has dimension {kernel.shape[1]}, expected 1")
    v = kernel[:, 0]
    v = v / v.sum()
    if np.any(v < -1e-10):
        raise NotReachable("left kernel vector has mixed signs")
    v = np.clip(v, 0.0, None)
    return v / v.sum()


def _is_symmetric(m: np.ndarray) -> bool:
    return bool(np.allclose(m, m.T, atol=1e-12 * (1.0 + np.abs(m).max())))


def algebraic_connectivity(L: np.ndarray) -> float:
    """Second-smallest eigenvalue of a symmetric Laplacian."""
    L = np.asarray(L, dtype=float)
    if not _is_symmetric(L):
        raise DimensionMismatch("algebraic connectivity needs a symmetric Laplacian")
    if L.shape[0] < 2:
        return 0.0
    return float(sla.eigvalsh(L)[1])


def build_RV(L: np.ndarray) -> np.ndarray:
    """
    Rows are orthonormal eigenvectors of L for lambda_2..lambda_n (ascending).

    Each row is sign-canonicalized so its first nonzero entry is positive.
    """
    L = np.asarray(L, dtype=float)
    if not _is_symmetric(L):
        raise DimensionMismatch("R_V needs a symmetric Laplacian")
    n = L.shape[0]
    if n == 1:
        return np.zeros((0, 1))
    w, vecs = sla.eigh(L)
    if w[1] <= GRAPH_CONFIG['lambda2_tol']:
        raise Disconnected(f"lambda2 = {w[1]:.3e}; graph is disconnected")
    r = vecs[:, 1:].T.copy()
    for row in r:
        lead = np.flatnonzero(np.abs(row) > 1e-12)
        if lead.size and row[lead[0]] < 0:
            row *= -1.0
    return r


def build_R_epsilon(L: np.ndarray, epsilon: Optional[float] = None) -> np.ndarray:
    """
    Weight R with Ker(R) = span(1) and mu_{inf,R}(-L) <= alpha_ess(-L) + epsilon.

    Undirected graphs return R_V directly; directed graphs use left
    eigenvectors of L at its nonzero eigenvalues.
    """
    L = np.asarray(L, dtype=float)
    if epsilon is None:
        epsilon = GRAPH_CONFIG['epsilon_default']
    if _is_symmetric(L):
        return build_RV(L)
    dominant_left_eigenvector(L)
    ones = np.ones((L.shape[0], 1))
    return optimal_R_construction(-L, ones, p=np.inf, epsilon=epsilon)


def laplacian_bundle(g: WeightedDigraph) -> LaplacianBundle:
    """Compute L, v, alpha_ess(-L) and, for undirected graphs, lambda2 and R_V."""
    L = laplacian(g)
    if not globally_reachable(g):
        raise NotReachable("graph has no globally reachable node")
    v = dominant_left_eigenvector(L)
    a_ess = alpha_ess(-L)
    if g.directed:
        return LaplacianBundle(L=L, v=v, alpha_ess=a_ess)
    return LaplacianBundle(L=L, v=v, alpha_ess=a_ess,
                           lambda2=algebraic_connectivity(L), R_V=build_RV(L))
