#!/usr/bin/env python3
"""
Main entry point for the contrakt command line.

    contrakt measure  --matrix A.json -p inf
    contrakt certify  --system sys.json --kind doubly
    contrakt simulate --system sys.json --t-final 20
    contrakt verify   --system sys.json --kind rate
    contrakt sync     --system network.json
    contrakt report   --system averaging.json

Every command writes its artifacts plus manifest.json to --out and prints a
one-line JSON summary on stdout. Exit codes: 0 success, 1 refuted or
violated, 2 input or numerical error.
"""

import argparse
import sys
from typing import Any, Dict, List, Optional

from cli.commands import EXIT_INPUT_ERROR, run
from cli.run_config import RunConfig
from config import CLI_CONFIG, LOGGING_CONFIG, SAMPLER_CONFIG
from core.exceptions import ContraktError
from utils import setup_logger
from utils.logger import LEVELS
from utils.config_manager import get_config as get_settings

_INPUT_FLAGS = {
    'matrix': 'matrix',
    'weight_file': 'weight',
    'system': 'system',
    'x0_file': 'x0',
}


def _add_sampling(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('sampling')
    group.add_argument('--half-width', type=float, help='Half width of the sampling box around 0')
    group.add_argument('--grid-per-dim', type=int, help='Grid points per coordinate')
    group.add_argument('--random-count', type=int, help='Additional uniform samples')
    group.add_argument('--time-samples', type=float, nargs='+', help='Times at which Jacobians are sampled')


def _add_integration(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('integration')
    group.add_argument('--x0-file', help='Initial state (JSON list)')
    group.add_argument('--t-final', type=float, help='Final time')
    group.add_argument('--tol', type=float, help='Relative tolerance')
    group.add_argument('--atol', type=float, help='Absolute tolerance')
    group.add_argument('--samples', type=int, help='Number of output samples')
    group.add_argument('--log-uniform', action='store_true', default=None, help='Log-uniform output grid')
    group.add_argument('--method', choices=['RK45', 'DOP853'], help='Runge-Kutta pair')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='contrakt',
        description='Semi-contraction and weak-contraction analysis of network dynamical systems',
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Run config file (YAML or JSON); flags override its params')
    common.add_argument('--out', help=f"Output directory (default {CLI_CONFIG['out_dir']})")
    common.add_argument('--seed', type=int, help=f"Random seed (default {SAMPLER_CONFIG['seed']})")
    common.add_argument('--log-level', type=str.upper, choices=LEVELS,
                        help=f"Logging level (default {LOGGING_CONFIG['level']})")
    common.add_argument('--log-file', help='Also log to this file')
    common.add_argument('--settings', help='YAML file overriding tolerances (see config/system_config.yaml)')
    common.add_argument('--emit-gnuplot', action='store_true', default=None,
                        help='Write a gnuplot script next to every CSV')

    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('measure', parents=[common], help='Matrix (semi-)measure')
    p.add_argument('--matrix', help='Matrix file')
    p.add_argument('--weight-file', help='Weight matrix R')
    p.add_argument('-p', dest='p', help='1, 2 or inf (other p use the numeric limit)')
    p.add_argument('--method', choices=['auto', 'oracle', 'lmi', 'abscissa'])

    p = sub.add_parser('certify', parents=[common], help='Sampled contraction certificates')
    p.add_argument('--system', help='System document')
    p.add_argument('--weight-file', help='Weight matrix R for --weight file')
    p.add_argument('--kind', choices=['semi', 'weak', 'doubly', 'sync'])
    p.add_argument('-p', dest='p')
    p.add_argument('--weight', choices=['none', 'file', 'R_V', 'optimal', 'log_weight'])
    p.add_argument('--weak-p', help='Norm of the weak leg of a doubly contracting analysis')
    p.add_argument('--epsilon', type=float, help='Slack of the optimal weight construction')
    p.add_argument('--q', choices=['auto', 'identity', 'optimal', 'file'], help='Synchronization weight Q')
    _add_sampling(p)

    p = sub.add_parser('simulate', parents=[common], help='Integrate a system')
    p.add_argument('--system', help='System document')
    _add_integration(p)

    p = sub.add_parser('verify', parents=[common], help='Check a bound along trajectories')
    p.add_argument('--system', help='System document')
    p.add_argument('--matrix', help='Matrix for --kind coppel')
    p.add_argument('--weight-file', help='Weight matrix R for --weight file')
    p.add_argument('--kind', choices=['coppel', 'pairwise', 'rate', 'sync', 'lyapunov', 'dichotomy',
                                      'vector_field', 'subspace'])
    p.add_argument('-p', dest='p')
    p.add_argument('--weight', choices=['none', 'file', 'R_V', 'optimal', 'log_weight'])
    p.add_argument('--epsilon', type=float)
    p.add_argument('--c', type=float, help='Contraction rate to check against')
    p.add_argument('--rel-tol', type=float, help='Relative tolerance of rate comparisons')
    _add_integration(p)

    p = sub.add_parser('sync', parents=[common], help='Synchronization certificate and simulation')
    p.add_argument('--system', help='diffusive_network document')
    p.add_argument('-p', dest='p')
    p.add_argument('--q', choices=['auto', 'identity', 'optimal', 'file'])
    p.add_argument('--weight-file', help='Q for --q file')
    p.add_argument('--epsilon', type=float)
    _add_sampling(p)
    _add_integration(p)

    p = sub.add_parser('report', parents=[common], help='Certificates, simulation and rate fit in one bundle')
    p.add_argument('--system', help='Network system document')
    p.add_argument('-p', dest='p')
    p.add_argument('--epsilon', type=float)
    p.add_argument('--rel-tol', type=float)
    _add_sampling(p)
    _add_integration(p)

    return parser


def _split_flags(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    """Separate input paths from params; unset flags are dropped."""
    skip = {'command', 'config', 'settings', 'out', 'seed', 'log_level', 'log_file'}
    inputs: Dict[str, Any] = {}
    params: Dict[str, Any] = {}
    for key, value in vars(args).items():
        if key in skip or value is None:
            continue
        if key in _INPUT_FLAGS:
            inputs[_INPUT_FLAGS[key]] = value
        else:
            params[key] = list(value) if isinstance(value, list) else value
    return {'inputs': inputs, 'params': params}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    flags = _split_flags(args)
    if args.config:
        return RunConfig.from_file(
            args.config,
            command=args.command,
            inputs=flags['inputs'],
            params=flags['params'],
            seed=args.seed,
            out=args.out,
        )
    return RunConfig(
        command=args.command,
        inputs=flags['inputs'],
        params=flags['params'],
        seed=args.seed if args.seed is not None else SAMPLER_CONFIG['seed'],
        out=args.out or CLI_CONFIG['out_dir'],
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Main function."""
    args = build_parser().parse_args(argv)
    setup_logger(name='', level=args.log_level, log_file=args.log_file)
    try:
        if args.settings:
            settings = get_settings(args.settings)
            errors = settings.validate()
            if errors:
                raise ContraktError(f"invalid settings: {errors[0]}")
            settings.apply()
        cfg = resolve_config(args)
    except ContraktError as e:
        message = str(e).splitlines()[0] if str(e) else ""
        print(f"error: {type(e).__name__}: {message}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    return run(cfg)


if __name__ == '__main__':
    sys.exit(main())
