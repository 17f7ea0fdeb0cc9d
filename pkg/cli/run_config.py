"""
RunConfig: one resolved command invocation.

Loaded from a YAML/JSON file or assembled from command-line flags; unknown
keys are rejected at both levels.
"""

import copy
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from config import CLI_CONFIG, SAMPLER_CONFIG
from core.exceptions import ConfigError
from cli.io import get_validator, load_document

logger = logging.getLogger(__name__)

COMMANDS = ('measure', 'certify', 'simulate', 'verify', 'sync', 'report')

_COMMON = {'emit_gnuplot'}
_SAMPLING = {'half_width', 'box', 'grid_per_dim', 'random_count', 'time_samples'}
_INTEGRATION = {'t_final', 'tol', 'atol', 'samples', 'log_uniform', 'method', 'x0'}

ALLOWED_PARAMS = {
    'measure': {'p', 'method', 'h_list'},
    'certify': {'kind', 'p', 'weight', 'weak_p', 'epsilon', 'q', 'x_star'} | _SAMPLING,
    'simulate': set(_INTEGRATION),
    'verify': {'kind', 'p', 'weight', 'epsilon', 'c', 'y0', 'x0_list', 'rel_tol', 'x_star'} | _INTEGRATION,
    'sync': {'p', 'q', 'epsilon'} | _SAMPLING | _INTEGRATION,
    'report': {'p', 'epsilon', 'rel_tol'} | _INTEGRATION | _SAMPLING,
}

DEFAULT_PARAMS = {
    'measure': {'p': 'inf', 'method': 'auto'},
    'certify': {'kind': 'semi', 'p': 'inf', 'weight': 'none', 'half_width': 1.0,
                'grid_per_dim': SAMPLER_CONFIG['grid_per_dim'], 'random_count': SAMPLER_CONFIG['random_count']},
    'simulate': {'t_final': 10.0, 'samples': 400, 'log_uniform': False},
    'verify': {'kind': 'rate', 'p': 'inf', 'weight': 'none', 't_final': 10.0, 'samples': 400,
               'rel_tol': 0.05},
    'sync': {'p': 2, 'q': 'auto', 'half_width': 1.0, 't_final': 10.0, 'samples': 400,
             'grid_per_dim': SAMPLER_CONFIG['grid_per_dim'], 'random_count': SAMPLER_CONFIG['random_count']},
    'report': {'p': 'inf', 'samples': 400, 'rel_tol': 0.05, 'half_width': 1.0,
               'grid_per_dim': SAMPLER_CONFIG['grid_per_dim'], 'random_count': SAMPLER_CONFIG['random_count']},
}


@dataclass
class RunConfig:
    """
    A fully resolved command.

    Attributes:
        command: One of measure, certify, simulate, verify, sync, report
        inputs: Input file paths by role (matrix, weight, system, x0, ...)
        params: Flat command parameters, defaults filled in
        seed: Seed for every random choice of the run
        out: Output directory
    """
    command: str
    inputs: Dict[str, str] = field(default_factory=dict)
    params: Dict[str, Any] = field(default_factory=dict)
    seed: int = SAMPLER_CONFIG['seed']
    out: str = CLI_CONFIG['out_dir']

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; choose from {list(COMMANDS)}")
        unknown = sorted(set(self.params) - ALLOWED_PARAMS[self.command] - _COMMON)
        if unknown:
            raise ConfigError(f"unknown parameter(s) for {self.command}: {', '.join(unknown)}")
        merged = copy.deepcopy(DEFAULT_PARAMS[self.command])
        merged.update({k: v for k, v in self.params.items() if v is not None})
        self.params = merged

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        valid, errors = get_validator().validate(data, 'run_config')
        if not valid:
            raise ConfigError("invalid run config: " + "; ".join(errors))
        return cls(
            command=data['command'],
            inputs=dict(data.get('inputs', {})),
            params=dict(data.get('params', {})),
            seed=int(data.get('seed', SAMPLER_CONFIG['seed'])),
            out=data.get('out', CLI_CONFIG['out_dir']),
        )

    @classmethod
    def from_file(
        cls,
        path: str,
        command: Optional[str] = None,
        inputs: Optional[Dict[str, str]] = None,
        params: Optional[Dict[str, Any]] = None,
        seed: Optional[int] = None,
        out: Optional[str] = None,
    ) -> 'RunConfig':
        """
        Load a run config file, with command-line values taking precedence.

        Args:
            path: YAML or JSON document
            command: Command being run; the file may omit it but not contradict it
            inputs: Input paths merged over the file's inputs
            params: Parameters merged over the file's params
            seed: Replaces the file's seed when given
            out: Replaces the file's output directory when given
        """
        data = load_document(path)
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: run config must be a mapping")
        if command is not None:
            if data.get('command', command) != command:
                raise ConfigError(f"{path} is a '{data.get('command')}' config, not '{command}'")
            data = dict(data, command=command)
        data['inputs'] = {**data.get('inputs', {}), **(inputs or {})}
        data['params'] = {**data.get('params', {}), **(params or {})}
        if seed is not None:
            data['seed'] = seed
        if out is not None:
            data['out'] = out
        logger.info(f"✅ Loaded run config from {path}")
        return cls.from_dict(data)

    def param(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)

    def require_input(self, role: str) -> str:
        if role not in self.inputs:
            raise ConfigError(f"{self.command} needs an input file for '{role}'")
        return self.inputs[role]

    def to_dict(self) -> Dict[str, Any]:
        """The resolved config, echoed into every manifest."""
        return {
            'command': self.command,
            'inputs': dict(sorted(self.inputs.items())),
            'params': dict(sorted(self.params.items())),
            'seed': self.seed,
            'out': self.out,
        }
