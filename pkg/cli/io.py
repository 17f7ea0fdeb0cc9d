"""
Reading input documents and shaping outputs for the command line.

Matrices are JSON arrays of rows, or {"re": rows, "im": rows} when complex.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import yaml

from core.exceptions import ConfigError
from core.integrator import Trajectory
from models.dyn_system import DynSystem
from models.factory import build_system
from utils.schema_validator import SchemaValidator

logger = logging.getLogger(__name__)

_validator = None


def get_validator() -> SchemaValidator:
    global _validator
    if _validator is None:
        _validator = SchemaValidator()
    return _validator


def load_document(path: str) -> Any:
    """Parse a JSON or YAML file."""
    file_path = Path(path)
    try:
        text = file_path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror or e}") from e
    try:
        if file_path.suffix.lower() in ('.yaml', '.yml'):
            return yaml.safe_load(text)
        return json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e


def _check(data: Any, schema: str, source: str) -> None:
    valid, errors = get_validator().validate(data, schema)
    if not valid:
        raise ConfigError(f"{source}: {errors[0]}" + (f" (+{len(errors) - 1} more)" if len(errors) > 1 else ""))


def decode_matrix(data: Any, source: str = 'matrix') -> np.ndarray:
    _check(data, 'matrix', source)
    if isinstance(data, dict):
        re = np.asarray(data['re'], dtype=float)
        im = np.asarray(data.get('im', np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise ConfigError(f"{source}: real and imaginary parts differ in shape")
        out = re + 1j * im
    else:
        out = np.asarray(data, dtype=float)
    if out.ndim != 2:
        raise ConfigError(f"{source}: rows must have equal length")
    return out


def load_matrix(path: str) -> np.ndarray:
    return decode_matrix(load_document(path), path)


def load_system_document(path: str) -> Dict[str, Any]:
    data = load_document(path)
    _check(data, 'system', path)
    return data


def load_system(path: str) -> DynSystem:
    return build_system(load_system_document(path))


def load_vector(path: str) -> np.ndarray:
    """A JSON list, or an object with an "x0" list."""
    data = load_document(path)
    if isinstance(data, dict):
        data = data.get('x0')
    try:
        vec = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: not a numeric vector") from e
    if vec.ndim != 1:
        raise ConfigError(f"{path}: expected a flat list of numbers")
    return vec


def trajectory_columns(traj: Trajectory) -> Dict[str, List[float]]:
    """t, x_0 .. x_{n-1}."""
    columns = {'t': traj.times.tolist()}
    for i in range(traj.dim):
        columns[f'x_{i}'] = traj.states[:, i].tolist()
    return columns


def metric_columns(times: np.ndarray, values: np.ndarray, name: str = 'metric') -> Dict[str, List[float]]:
    return {'t': np.asarray(times).tolist(), name: np.asarray(values).tolist()}
