"""
Command handlers behind the contrakt CLI.

Each handler takes a resolved RunConfig and an ArtifactStorage, writes its
artifacts and returns (summary, ok). run() maps the outcome to the exit
code contract: 0 success, 1 refuted certificate or violated inequality,
2 input or numerical error.
"""

import json
import logging
import sys
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from certify.certificates import (
    Certificate,
    analyze_doubly_contracting,
    certify_semi_contraction,
    certify_weak_contraction,
    jacobian_samples,
    sync_condition,
)
from certify.sampler import DomainSampler
from cli.io import (
    load_matrix,
    load_system,
    load_system_document,
    load_vector,
    metric_columns,
    trajectory_columns,
)
from cli.run_config import RunConfig
from core.exceptions import ConfigError, ContraktError, InsufficientDecay
from core.graph import build_RV
from core.integrator import integrate, integrate_many, time_grid
from core.linalg import kernel_basis
from core.measures import (
    METHOD_LIMIT_ORACLE,
    SemiNormSpec,
    format_p,
    lmi_bisection,
    measure_limit_oracle,
    measure_value,
    optimal_R_construction,
    parse_p,
    semi_measure_via_abscissa,
)
from evaluation.metrics import distance_to, estimate_decay_rate, sync_metrics
from evaluation.verifier import (
    contraction_pairwise_check,
    coppel_verify,
    dichotomy_probe,
    lyapunov_monitor,
    subspace_distance_check,
    vector_field_decay_check,
)
from models.dyn_system import DynSystem
from models.factory import build_system
from models.lotka_volterra import d_lv, log_weak_norm, monitors
from models.toys import internal_dynamics
from utils.storage import ArtifactStorage, to_jsonable

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INPUT_ERROR = 2

Outcome = Tuple[Dict[str, Any], bool]


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def _draw_state(cfg: RunConfig, sys: DynSystem, offset: int = 0) -> np.ndarray:
    """Seeded initial state; positive orthant for systems with a log chart."""
    rng = np.random.default_rng([cfg.seed, offset])
    return rng.uniform(0.5, 2.0, sys.dim) if sys.chart is not None else rng.standard_normal(sys.dim)


def _sampler(cfg: RunConfig, dim: int) -> DomainSampler:
    box = cfg.param('box')
    if box is None:
        half = float(cfg.param('half_width', 1.0))
        box = [(-half, half)] * dim
    elif len(box) != dim:
        raise ConfigError(f"box has {len(box)} intervals for dimension {dim}")
    return DomainSampler(
        box=tuple(tuple(b) for b in box),
        grid_per_dim=int(cfg.param('grid_per_dim')),
        random_count=int(cfg.param('random_count')),
        time_samples=tuple(cfg.param('time_samples') or (0.0,)),
        seed=cfg.seed,
    )


def _initial_state(cfg: RunConfig, sys: DynSystem, key: str = 'x0', offset: int = 0) -> np.ndarray:
    if key in cfg.inputs:
        x0 = load_vector(cfg.inputs[key])
    elif cfg.param(key) is not None:
        x0 = np.asarray(cfg.param(key), dtype=float)
    else:
        x0 = _draw_state(cfg, sys, offset)
    if x0.shape != (sys.dim,):
        raise ConfigError(f"{key} has length {x0.size}, system dimension is {sys.dim}")
    return x0


def _reference_point(sys: DynSystem) -> np.ndarray:
    if sys.equilibria.point is not None:
        return np.asarray(sys.equilibria.point, dtype=float)
    return np.zeros(sys.dim)


def _norm(cfg: RunConfig, p: float, sys: Optional[DynSystem] = None,
          matrix: Optional[np.ndarray] = None, choice: Optional[str] = None) -> SemiNormSpec:
    """Semi-norm selected by the 'weight' parameter."""
    choice = choice or cfg.param('weight') or 'none'
    if choice == 'none' and 'weight' in cfg.inputs:
        choice = 'file'
    if choice == 'none':
        return SemiNormSpec(p=p)
    if choice == 'file':
        return SemiNormSpec(p=p, weight=load_matrix(cfg.require_input('weight')))
    if choice == 'R_V':
        if sys is not None and 'L' in sys.params:
            lap = np.asarray(sys.params['L'])
        elif matrix is not None:
            lap = -np.asarray(matrix)
        else:
            raise ConfigError("weight R_V needs a Laplacian-based system or matrix")
        return SemiNormSpec(p=p, weight=build_RV(lap))
    if choice == 'optimal':
        if matrix is not None:
            jac = np.asarray(matrix)
            kernel = kernel_basis(jac)
        elif sys is not None and sys.known_kernel is not None:
            jac = sys.jac(0.0, _reference_point(sys))
            kernel = sys.known_kernel
        else:
            raise ConfigError("weight 'optimal' needs a system with a known kernel")
        weight = optimal_R_construction(jac, kernel, p, cfg.param('epsilon'), seed=cfg.seed)
        return SemiNormSpec(p=p, weight=weight)
    if choice == 'log_weight':
        if sys is None:
            raise ConfigError("weight 'log_weight' needs a Lotka-Volterra system")
        return log_weak_norm(sys)
    raise ConfigError(f"unknown weight choice {choice!r}")


def _integration_kwargs(cfg: RunConfig) -> Dict[str, Any]:
    return {
        'tol': cfg.param('tol'),
        'atol': cfg.param('atol'),
        'samples': cfg.param('samples'),
        'log_uniform': bool(cfg.param('log_uniform', False)),
        'method': cfg.param('method'),
    }


def _t_final(cfg: RunConfig, sys: DynSystem) -> float:
    if cfg.param('t_final') is not None:
        return float(cfg.param('t_final'))
    rate = sys.predicted_rate.value if sys.predicted_rate is not None else None
    if rate is not None and np.isfinite(rate) and rate > 0:
        return float(min(200.0, 30.0 / rate))
    return 10.0


def _write_series(cfg: RunConfig, storage: ArtifactStorage, name: str, columns: Dict[str, Any],
                  log_y: bool = False) -> None:
    storage.write_csv(name, columns)
    if cfg.param('emit_gnuplot'):
        storage.write_gnuplot(name, list(columns), log_y=log_y)


def _certificate_summary(cert: Certificate) -> Dict[str, Any]:
    return {
        'kind': cert.kind,
        'status': cert.status,
        'rate_c': cert.rate_c,
        'global': cert.global_proof,
        'sample_count': cert.sample_count,
        'predicted_rate': cert.predicted_rate,
        'witness': None if cert.witness is None else cert.witness.to_dict(),
    }


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------

def cmd_measure(cfg: RunConfig, storage: ArtifactStorage) -> Outcome:
    a = load_matrix(cfg.require_input('matrix'))
    p = parse_p(cfg.param('p'))
    weight = load_matrix(cfg.inputs['weight']) if 'weight' in cfg.inputs else None
    s = SemiNormSpec(p=p, weight=weight)
    method = cfg.param('method')
    if method == 'auto':
        result = measure_value(a, s)
    elif method == 'oracle':
        result = measure_limit_oracle(a, s, cfg.param('h_list'))
    elif method == 'lmi':
        result = lmi_bisection(a, weight if weight is not None else np.eye(a.shape[0]))
    elif method == 'abscissa':
        result = semi_measure_via_abscissa(a, weight if weight is not None else np.eye(a.shape[0]))
    else:
        raise ConfigError(f"unknown measure method {method!r}")
    if not s.has_closed_form:
        # generic-p induced norms are maximized numerically
        estimate = 'lower'
    elif result.method == METHOD_LIMIT_ORACLE:
        estimate = 'limit'
    else:
        estimate = 'exact'
    summary = {'p': format_p(p), 'norm': s.to_dict(), **result.to_dict(), 'estimate': estimate}
    storage.write_json('measure.json', summary)
    return summary, True


# ---------------------------------------------------------------------------
# certify / sync
# ---------------------------------------------------------------------------

def _sync_certificate(cfg: RunConfig, doc: Dict[str, Any], sys: DynSystem) -> Tuple[Certificate, DynSystem]:
    if doc.get('model') != 'diffusive_network':
        raise ConfigError("synchronization needs a diffusive_network system")
    spec = (doc.get('params') or {}).get('internal', {})
    internal = internal_dynamics(spec.get('name', ''), spec.get('params', {}))
    p = parse_p(cfg.param('p', 2))
    choice = cfg.param('q') or 'auto'
    if choice == 'auto':
        choice = 'optimal' if internal.constant_jacobian else 'identity'
    if choice == 'identity':
        q = np.eye(internal.dim)
    elif choice == 'optimal':
        q = optimal_R_construction(internal.jac(0.0, np.zeros(internal.dim)), np.zeros((internal.dim, 0)),
                                   p, cfg.param('epsilon'), seed=cfg.seed)
    elif choice == 'file':
        q = load_matrix(cfg.require_input('weight'))
    else:
        raise ConfigError(f"unknown Q choice {choice!r}")
    jacs = jacobian_samples(internal, _sampler(cfg, internal.dim))
    return sync_condition(jacs, q, p, sys.params['lambda2']), internal


def cmd_certify(cfg: RunConfig, storage: ArtifactStorage) -> Outcome:
    doc = load_system_document(cfg.require_input('system'))
    sys = build_system(doc)
    kind = cfg.param('kind')
    p = parse_p(cfg.param('p'))
    notes = []

    if kind == 'sync':
        cert, _ = _sync_certificate(cfg, doc, sys)
    elif kind == 'semi':
        cert = certify_semi_contraction(sys, _norm(cfg, p, sys), _sampler(cfg, sys.dim))
    elif kind == 'weak':
        target = sys
        if sys.chart is not None:
            target = sys.chart.system
            notes.append("certified in chart coordinates")
        cert = certify_weak_contraction(target, _norm(cfg, p, sys), _sampler(cfg, target.dim))
    elif kind == 'doubly':
        if sys.known_kernel is None:
            raise ConfigError("doubly contracting analysis needs a system with a known kernel")
        weak_norm = SemiNormSpec(p=parse_p(cfg.param('weak_p') or p))
        semi_norm = _norm(cfg, p, sys, choice=cfg.param('weight') if cfg.param('weight') != 'none' else 'optimal')
        x_star = cfg.param('x_star')
        if x_star is None:
            x_star = _reference_point(sys)
        cert = analyze_doubly_contracting(sys, weak_norm, semi_norm, sys.known_kernel,
                                          _sampler(cfg, sys.dim), x_star=x_star)
    else:
        raise ConfigError(f"unknown certificate kind {kind!r}")

    cert.notes.extend(notes)
    storage.write_json('certificate.json', cert.to_dict())
    return _certificate_summary(cert), cert.certified


def cmd_sync(cfg: RunConfig, storage: ArtifactStorage) -> Outcome:
    doc = load_system_document(cfg.require_input('system'))
    sys = build_system(doc)
    cert, internal = _sync_certificate(cfg, doc, sys)
    storage.write_json('certificate.json', cert.to_dict())

    x0 = _initial_state(cfg, sys)
    traj = integrate(sys, x0, _t_final(cfg, sys), **_integration_kwargs(cfg))
    series = sync_metrics(traj, sys.params['n'], sys.params['k'])
    _write_series(cfg, storage, 'sync_metrics.csv', series.columns(), log_y=True)

    summary = _certificate_summary(cert)
    try:
        fit = estimate_decay_rate(traj, values=series.disagreement)
        summary['rate_fit'] = fit.to_dict()
    except InsufficientDecay as e:
        summary['rate_fit'] = None
        summary['rate_fit_error'] = str(e)
    return summary, cert.certified


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(cfg: RunConfig, storage: ArtifactStorage) -> Outcome:
    sys = load_system(cfg.require_input('system'))
    x0 = _initial_state(cfg, sys)
    traj = integrate(sys, x0, _t_final(cfg, sys), **_integration_kwargs(cfg))
    _write_series(cfg, storage, 'trajectory.csv', trajectory_columns(traj))

    drift = {name: float(np.max(np.abs(traj.metric_series(fn) - fn(x0)))) for name, fn in sys.conserved.items()}
    summary = {
        'system': sys.summary(),
        'x0': x0,
        'final_time': float(traj.times[-1]),
        'final_state': traj.final_state,
        'diverged': traj.diverged,
        'message': traj.message,
        'stats': traj.stats.to_dict(),
        'conserved_drift': drift,
    }
    limit = sys.equilibria.limit_point(x0)
    if limit is not None and not traj.diverged:
        summary['limit_error'] = float(np.max(np.abs(traj.final_state - limit)))
    storage.write_json('simulation.json', summary)
    return summary, True


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _verify_coppel(cfg, storage):
    p = parse_p(cfg.param('p'))
    if 'matrix' in cfg.inputs:
        a = load_matrix(cfg.inputs['matrix']).real
        s = _norm(cfg, p, matrix=a)
    else:
        sys = load_system(cfg.require_input('system'))
        if not sys.constant_jacobian:
            raise ConfigError("Coppel verification needs a linear system or a matrix")
        a = sys.jac(0.0, np.zeros(sys.dim))
        s = _norm(cfg, p, sys)
    x0 = np.asarray(cfg.param('x0'), dtype=float) if cfg.param('x0') is not None \
        else np.random.default_rng(cfg.seed).standard_normal(a.shape[0])
    grid = time_grid(float(cfg.param('t_final')), cfg.param('samples'))
    report = coppel_verify(lambda t: a, s, x0, grid, tol=cfg.param('tol'))
    _write_series(cfg, storage, 'coppel.csv', {'t': report.times.tolist(), 'value': report.values.tolist(),
                                               'lower': report.lower.tolist(), 'upper': report.upper.tolist()},
                  log_y=True)
    return report.to_dict(), report.holds


def _verify_pairwise(cfg, storage):
    sys = load_system(cfg.require_input('system'))
    s = _norm(cfg, parse_p(cfg.param('p')), sys)
    x0 = _initial_state(cfg, sys)
    y0 = _initial_state(cfg, sys, key='y0', offset=1)
    grid = time_grid(_t_final(cfg, sys), cfg.param('samples'))
    report = contraction_pairwise_check(sys, x0, y0, s, float(cfg.param('c') or 0.0), grid, tol=cfg.param('tol'))
    _write_series(cfg, storage, 'pairwise.csv', {'t': report.times.tolist(), 'distance': report.distances.tolist(),
                                                 'bound': report.bounds.tolist()})
    return report.to_dict(), report.holds and report.weak_holds


def _verify_rate(cfg, storage):
    sys = load_system(cfg.require_input('system'))
    x0 = _initial_state(cfg, sys)
    limit = sys.equilibria.limit_point(x0)
    if limit is None or sys.predicted_rate is None:
        raise ConfigError(f"{sys.name} has no predicted limit and rate for this initial state")
    traj = integrate(sys, x0, _t_final(cfg, sys), **_integration_kwargs(cfg))
    values = traj.metric_series(distance_to(limit))
    _write_series(cfg, storage, 'disagreement.csv', metric_columns(traj.times, values, 'disagreement'), log_y=True)
    fit = estimate_decay_rate(traj, values=values)
    expected = sys.predicted_rate.value
    ok = fit.matches(expected, float(cfg.param('rel_tol')))
    return {'check': 'rate', 'holds': ok, 'fit': fit.to_dict(), 'predicted_rate': expected,
            'provenance': sys.predicted_rate.provenance}, ok


def _verify_sync(cfg, storage):
    sys = load_system(cfg.require_input('system'))
    if 'n' not in sys.params or 'k' not in sys.params:
        raise ConfigError("sync verification needs a network system")
    x0 = _initial_state(cfg, sys)
    traj = integrate(sys, x0, _t_final(cfg, sys), **_integration_kwargs(cfg))
    series = sync_metrics(traj, sys.params['n'], sys.params['k'])
    _write_series(cfg, storage, 'sync_metrics.csv', series.columns(), log_y=True)
    try:
        fit = estimate_decay_rate(traj, values=series.disagreement)
    except InsufficientDecay as e:
        return {'check': 'sync', 'holds': False, 'fit': None, 'reason': str(e)}, False
    expected = sys.predicted_rate.value if sys.predicted_rate is not None else None
    if expected is None:
        ok = fit.rate > 0
    else:
        ok = fit.rate >= expected * (1.0 - float(cfg.param('rel_tol')))
    return {'check': 'sync', 'holds': ok, 'fit': fit.to_dict(), 'predicted_rate': expected}, ok


def _verify_lyapunov(cfg, storage):
    sys = load_system(cfg.require_input('system'))
    x0 = _initial_state(cfg, sys)
    t_final = _t_final(cfg, sys)
    kwargs = _integration_kwargs(cfg)
    v = np.asarray(sys.params.get('v', np.ones(sys.dim)))
    reports = {}
    if cfg.param('y0') is not None or 'y0' in cfg.inputs:
        y0 = _initial_state(cfg, sys, key='y0', offset=1)
        tx, ty = integrate_many(sys, [x0, y0], t_final, **kwargs)
        reports['d_LV'] = lyapunov_monitor(tx, lambda x, z: d_lv(x, z, v), companion=ty)
    else:
        traj = integrate(sys, x0, t_final, **kwargs)
        first, second = monitors(sys)
        if first is None:
            raise ConfigError("Lyapunov monitors need a Hurwitz Lotka-Volterra system")
        reports['V1'] = lyapunov_monitor(traj, first)
        reports['V2'] = lyapunov_monitor(traj, second)
    for name, report in reports.items():
        _write_series(cfg, storage, f'lyapunov_{name}.csv', metric_columns(report.times, report.values, name))
    ok = all(r.holds for r in reports.values())
    return {'check': 'lyapunov', 'holds': ok,
            'monitors': {k: {'holds': r.holds, 'max_increase': r.max_increase} for k, r in reports.items()}}, ok


def _verify_dichotomy(cfg, storage):
    sys = load_system(cfg.require_input('system'))
    x0_list = cfg.param('x0_list')
    if x0_list is None:
        x0_list = [_draw_state(cfg, sys, offset=i) for i in range(5)]
    report = dichotomy_probe(sys, x0_list, _t_final(cfg, sys), tol=cfg.param('tol'))
    return report.to_dict(), report.holds


def _verify_vector_field(cfg, storage):
    sys = load_system(cfg.require_input('system'))
    s = _norm(cfg, parse_p(cfg.param('p')), sys)
    grid = time_grid(_t_final(cfg, sys), cfg.param('samples'))
    report = vector_field_decay_check(sys, _initial_state(cfg, sys), s, float(cfg.param('c') or 0.0), grid,
                                      tol=cfg.param('tol'))
    return report.to_dict(), report.holds


def _verify_subspace(cfg, storage):
    sys = load_system(cfg.require_input('system'))
    s = _norm(cfg, parse_p(cfg.param('p')), sys)
    x_star = cfg.param('x_star')
    if x_star is None:
        x_star = _reference_point(sys)
    grid = time_grid(_t_final(cfg, sys), cfg.param('samples'))
    report = subspace_distance_check(sys, _initial_state(cfg, sys), x_star, s, float(cfg.param('c') or 0.0),
                                     grid, tol=cfg.param('tol'))
    return report.to_dict(), report.holds


_VERIFY: Dict[str, Callable[[RunConfig, ArtifactStorage], Outcome]] = {
    'coppel': _verify_coppel,
    'pairwise': _verify_pairwise,
    'rate': _verify_rate,
    'sync': _verify_sync,
    'lyapunov': _verify_lyapunov,
    'dichotomy': _verify_dichotomy,
    'vector_field': _verify_vector_field,
    'subspace': _verify_subspace,
}


def cmd_verify(cfg: RunConfig, storage: ArtifactStorage) -> Outcome:
    kind = cfg.param('kind')
    if kind not in _VERIFY:
        raise ConfigError(f"unknown verification kind {kind!r}; choose from {sorted(_VERIFY)}")
    report, ok = _VERIFY[kind](cfg, storage)
    storage.write_json('verification.json', report)
    return {k: v for k, v in report.items() if not isinstance(v, (list, np.ndarray))}, ok


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def cmd_report(cfg: RunConfig, storage: ArtifactStorage) -> Outcome:
    """
    Bundle one scenario: weak and semi certificates, the doubly contracting
    analysis, a trajectory, the disagreement series and its rate fit.
    """
    sys = load_system(cfg.require_input('system'))
    if sys.known_kernel is None or not sys.constant_jacobian:
        raise ConfigError("report needs a network system with constant Jacobian and known kernel")
    p = parse_p(cfg.param('p'))
    d = _sampler(cfg, sys.dim)
    weak = certify_weak_contraction(sys, SemiNormSpec(p=p), d)
    semi_norm = _norm(cfg, p, sys, choice='optimal')
    semi = certify_semi_contraction(sys, semi_norm, d)
    bundle: Dict[str, Any] = {'system': sys.summary(), 'weak': weak.to_dict(), 'semi': semi.to_dict()}
    ok = weak.certified and semi.certified
    if sys.equilibria.exists:
        doubly = analyze_doubly_contracting(sys, SemiNormSpec(p=p), semi_norm, sys.known_kernel, d,
                                            x_star=_reference_point(sys))
        bundle['doubly'] = doubly.to_dict()
        ok = ok and doubly.certified

    x0 = _initial_state(cfg, sys)
    traj = integrate(sys, x0, _t_final(cfg, sys), **_integration_kwargs(cfg))
    _write_series(cfg, storage, 'trajectory.csv', trajectory_columns(traj))
    limit = sys.equilibria.limit_point(x0)
    if limit is not None and sys.predicted_rate is not None:
        values = traj.metric_series(distance_to(limit))
        _write_series(cfg, storage, 'disagreement.csv', metric_columns(traj.times, values, 'disagreement'),
                      log_y=True)
        fit = estimate_decay_rate(traj, values=values)
        expected = sys.predicted_rate.value
        matches = fit.matches(expected, float(cfg.param('rel_tol')))
        bundle['rate'] = {'fit': fit.to_dict(), 'predicted_rate': expected,
                          'provenance': sys.predicted_rate.provenance, 'matches': matches}
        ok = ok and matches
    storage.write_json('report.json', bundle)

    summary = {
        'weak': weak.status,
        'semi': semi.status,
        'semi_rate_c': semi.rate_c,
        'doubly': bundle.get('doubly', {}).get('status'),
        'rate': bundle.get('rate', {}).get('fit', {}).get('rate'),
        'predicted_rate': bundle.get('rate', {}).get('predicted_rate'),
    }
    return summary, ok


HANDLERS: Dict[str, Callable[[RunConfig, ArtifactStorage], Outcome]] = {
    'measure': cmd_measure,
    'certify': cmd_certify,
    'simulate': cmd_simulate,
    'verify': cmd_verify,
    'sync': cmd_sync,
    'report': cmd_report,
}


def run(cfg: RunConfig) -> int:
    """
    Execute one command and write its manifest.

    Returns:
        0 on success, 1 on a refuted certificate or violated inequality,
        2 on input or numerical errors
    """
    try:
        storage = ArtifactStorage(cfg.out)
        summary, ok = HANDLERS[cfg.command](cfg, storage)
        outcome = {'command': cfg.command, 'status': 'ok' if ok else 'violated', 'summary': summary}
        storage.write_manifest(cfg.to_dict(), outcome)
    except (ContraktError, OSError, ValueError) as e:
        message = str(e).splitlines()[0] if str(e) else ''
        print(f"error: {type(e).__name__}: {message}", file=sys.stderr)
        logger.debug("command failed", exc_info=True)
        return EXIT_INPUT_ERROR

    print(json.dumps(to_jsonable(outcome), sort_keys=True))
    return EXIT_OK if ok else EXIT_VIOLATED
