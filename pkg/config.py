import os
from typing import Dict, Any

# Linear algebra tolerances
LINALG_CONFIG = {
    'rank_tol': 1e-12,          # relative to the largest singular value
    'defective_cond': 1e10,     # eigenvector condition number above which A is treated as defective
    'invariance_tol': 1e-8,     # residual allowed when testing subspace invariance
}

# Graph Laplacian settings
GRAPH_CONFIG = {
    'lambda2_tol': 1e-10,       # below this the undirected graph is disconnected
    'zero_eig_tol': 1e-9,       # |lambda| below this counts as a zero eigenvalue
    'epsilon_default': 1e-4,    # slack for R_epsilon
    'perturbation_budget': 60,  # halvings of delta before giving up
    'perturbation_seed': 0,
}

# Matrix measure settings
MEASURE_CONFIG = {
    'oracle_h_list': [1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
    'oracle_restarts': 8,       # power-method starts for generic p
    'oracle_iterations': 200,
    'lmi_tol': 1e-9,
    'positive_spectrum_tol': 1e-9,
}

# (2,p)-tensor norm oracle
TENSOR_CONFIG = {
    'restarts': 32,
    'xatol': 1e-8,
    'fatol': 1e-12,
    'max_iter': 4000,
    'reconstruct_tol': 1e-9,
    'max_size': 16,             # n * k limit for brute force
    'seed': 0,
}

# Model zoo
SYSTEMS_CONFIG = {
    'metzler_tol': 1e-12,
    'convexity_tol': 1e-9,
    'convexity_samples': 20,
    'conservation_tol': 1e-12,
}

# Domain sampling
SAMPLER_CONFIG = {
    'grid_per_dim': 5,
    'max_grid_dims': 6,
    'random_count': 200,
    'seed': 0,
}

# Certification thresholds
CERTIFY_CONFIG = {
    'weak_tol': 1e-9,
    'invariance_tol': 1e-8,
    'equilibrium_tol': 1e-8,
    'singular_q_cond': 1e12,
}

# ODE integration
INTEGRATOR_CONFIG = {
    'method': 'RK45',
    'rtol': 1e-9,
    'atol': 1e-11,
    'min_samples': 200,
    'divergence_norm': 1e12,
    'max_steps': 2_000_000,
}

# Trajectory verification
VERIFY_CONFIG = {
    'coppel_slack': 1e-6,
    'pairwise_slack': 1e-6,
    'lyapunov_slack': 1e-8,
    'growth_factor': 100.0,
    'decay_slack': 1e-6,
}

# Decay-rate fitting
RATE_FIT_CONFIG = {
    'floor': 1e-10,
    'upper_fraction': 0.1,      # fit only below this fraction of the initial metric
    'transient_decades': 0.2,   # fraction of decades skipped at the start
    'min_samples': 10,
    'noise_factor': 100.0,      # floor is raised to noise_factor * rtol * max|x| of the trajectory
}

# Command-line surface
CLI_CONFIG = {
    'out_dir': 'contrakt_out',
    'threads_env': 'CONTRAKT_THREADS',
    'float_format': '%.17g',
}

# Logging Configuration
LOGGING_CONFIG = {
    'level': os.getenv('CONTRAKT_LOG_LEVEL', 'INFO'),
    'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    'file': None,
}


def get_config() -> Dict[str, Any]:
    """Get the complete default configuration."""
    return {
        'linalg': LINALG_CONFIG,
        'graph': GRAPH_CONFIG,
        'measures': MEASURE_CONFIG,
        'tensor_norm': TENSOR_CONFIG,
        'systems': SYSTEMS_CONFIG,
        'sampler': SAMPLER_CONFIG,
        'certify': CERTIFY_CONFIG,
        'integrator': INTEGRATOR_CONFIG,
        'verify': VERIFY_CONFIG,
        'rate_fit': RATE_FIT_CONFIG,
        'cli': CLI_CONFIG,
        'logging': LOGGING_CONFIG,
    }
