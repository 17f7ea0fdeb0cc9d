"""
Build systems from their JSON description.

    {"model": "affine_averaging", "graph": {"n": 3, "edges": [[0, 1, 1.0]]},
     "params": {"b": [1, -1, 0]}}
"""

import logging
from typing import Any, Callable, Dict

from core.exceptions import ConfigError, UnknownName
from core.graph import WeightedDigraph
from models.costs import cost_from_dict
from models.dyn_system import DynSystem, linear_system
from models.lotka_volterra import lotka_volterra
from models.networks import affine_averaging, affine_flow, diffusive_network, primal_dual
from models.toys import internal_dynamics, toy_example

logger = logging.getLogger(__name__)


def _graph(data: Dict[str, Any]) -> WeightedDigraph:
    if 'graph' not in data:
        raise ConfigError(f"model {data.get('model')!r} needs a 'graph' entry")
    return WeightedDigraph.from_dict(data['graph'])


def _require(params: Dict[str, Any], key: str, model: str) -> Any:
    if key not in params:
        raise ConfigError(f"model {model!r} needs parameter {key!r}")
    return params[key]


def _averaging(data, params):
    return affine_averaging(_graph(data), params.get('b'))


def _flow(data, params):
    return affine_flow(_graph(data), params.get('b'))


def _primal_dual(data, params):
    costs = [cost_from_dict(c) for c in _require(params, 'costs', 'primal_dual')]
    k = int(params.get('k', costs[0].dim if costs else 1))
    return primal_dual(_graph(data), costs, k)


def _diffusive(data, params):
    internal = _require(params, 'internal', 'diffusive_network')
    return diffusive_network(_graph(data), internal_dynamics(internal.get('name', ''), internal.get('params', {})))


def _lotka_volterra(data, params):
    return lotka_volterra(_require(params, 'A', 'lotka_volterra'), _require(params, 'r', 'lotka_volterra'))


def _linear(data, params):
    return linear_system(_require(params, 'A', 'linear'), b=params.get('b'))


_BUILDERS: Dict[str, Callable[[Dict[str, Any], Dict[str, Any]], DynSystem]] = {
    'affine_averaging': _averaging,
    'affine_flow': _flow,
    'primal_dual': _primal_dual,
    'diffusive_network': _diffusive,
    'lotka_volterra': _lotka_volterra,
    'linear': _linear,
}


def available_models():
    return sorted(_BUILDERS) + ['toy:linear_2x2', 'toy:semi_only', 'toy:weak_only']


def build_system(data: Dict[str, Any]) -> DynSystem:
    """
    Build a system from a parsed system document.

    Args:
        data: {"model": name, "graph": {...}, "params": {...}}; toys are
            named "toy:<name>" or given as {"model": "toy", "name": ...}

    Returns:
        The constructed DynSystem
    """
    model = data.get('model')
    if not isinstance(model, str):
        raise ConfigError("system document needs a string 'model'")
    params = data.get('params') or {}

    if model == 'toy':
        return toy_example(_require(data, 'name', 'toy'))
    if model.startswith('toy:'):
        return toy_example(model.split(':', 1)[1])
    try:
        builder = _BUILDERS[model]
    except KeyError:
        raise UnknownName(f"unknown model {model!r}; choose from {available_models()}") from None
    sys = builder(data, params)
    logger.info(f"Built {sys.name} (dim {sys.dim})")
    return sys
