"""
Convex local cost functions for distributed optimization models.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict

import numpy as np
from scipy.special import logsumexp, softmax

from core.exceptions import UnknownName


class ScalarField(ABC):
    """Twice-differentiable f: R^k -> R."""

    dim: int

    @abstractmethod
    def value(self, x: np.ndarray) -> float:
        ...

    @abstractmethod
    def grad(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def hess(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        ...


class QuadraticCost(ScalarField):
    """f(x) = (w/2) ||x - a||^2."""

    def __init__(self, center, weight: float = 1.0):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.weight = float(weight)
        self.dim = self.center.shape[0]

    def value(self, x):
        d = x - self.center
        return 0.5 * self.weight * float(d @ d)

    def grad(self, x):
        return self.weight * (x - self.center)

    def hess(self, x):
        return self.weight * np.eye(self.dim)

    def to_dict(self):
        return {'type': 'quadratic', 'center': self.center.tolist(), 'weight': self.weight}


class QuarticCost(ScalarField):
    """f(x) = (1/4) sum (x - a)^4 + (w/2) ||x - a||^2; w = 0 is only weakly convex at a."""

    def __init__(self, center, quad_weight: float = 0.0):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.quad_weight = float(quad_weight)
        self.dim = self.center.shape[0]

    def value(self, x):
        d = x - self.center
        return 0.25 * float(np.sum(d ** 4)) + 0.5 * self.quad_weight * float(d @ d)

    def grad(self, x):
        d = x - self.center
        return d ** 3 + self.quad_weight * d

    def hess(self, x):
        d = x - self.center
        return np.diag(3.0 * d ** 2 + self.quad_weight)

    def to_dict(self):
        return {'type': 'quartic', 'center': self.center.tolist(), 'quad_weight': self.quad_weight}


class LogSumExpCost(ScalarField):
    """f(x) = log sum_j exp(a_j^T x + b_j) + (w/2) ||x||^2."""

    def __init__(self, a, b=None, quad_weight: float = 0.0):
        self.a = np.atleast_2d(np.asarray(a, dtype=float))
        self.b = np.zeros(self.a.shape[0]) if b is None else np.asarray(b, dtype=float).ravel()
        self.quad_weight = float(quad_weight)
        self.dim = self.a.shape[1]

    def value(self, x):
        return float(logsumexp(self.a @ x + self.b)) + 0.5 * self.quad_weight * float(x @ x)

    def grad(self, x):
        s = softmax(self.a @ x + self.b)
        return self.a.T @ s + self.quad_weight * x

    def hess(self, x):
        s = softmax(self.a @ x + self.b)
        return self.a.T @ (np.diag(s) - np.outer(s, s)) @ self.a + self.quad_weight * np.eye(self.dim)

    def to_dict(self):
        return {'type': 'logsumexp', 'a': self.a.tolist(), 'b': self.b.tolist(), 'quad_weight': self.quad_weight}


def cost_from_dict(data: Dict[str, Any]) -> ScalarField:
    """Build a cost from its JSON description."""
    kind = data.get('type')
    if kind == 'quadratic':
        return QuadraticCost(data['center'], data.get('weight', 1.0))
    if kind == 'quartic':
        return QuarticCost(data['center'], data.get('quad_weight', 0.0))
    if kind == 'logsumexp':
        return LogSumExpCost(data['a'], data.get('b'), data.get('quad_weight', 0.0))
    raise UnknownName(f"unknown cost type {kind!r}")
