"""Numerical toolkit for memory-reinforced random walks driven by urn functions.

Exact finite-N distributions, reproducible Monte Carlo, fixed-point and
phase-diagram analysis, path-space rate functionals, and cumulant generating
functions for walks whose next step copies the majority of k randomly drawn
past steps (and related reinforcement maps).
"""

__version__ = "0.1.0"

from .cgf import (
    CgfCurve,
    cgf_closed_form_k1,
    cgf_ode,
    closed_form_curve_k1,
    default_lambda_grid,
    finite_n_cgf,
    legendre_entropy,
    singular_order,
)
from .errors import (
    DomainBreachError,
    ErwalkError,
    InvalidPathError,
    NonConvergenceError,
    NotDifferentiableError,
    ResourceLimitError,
    UnsupportedUrnError,
)
from .exact import (
    DistributionTable,
    EntropyCurve,
    WalkInit,
    decay_exponent,
    entropy_profile,
    evolve,
    evolve_checkpoints,
    extrapolated_entropy,
    interval_log_mass,
)
from .paths import (
    CurrentCheckReport,
    Trajectory,
    bernoulli_kl,
    current_conservation_check,
    neg_bernoulli_kl,
    optimal_path,
    path_rate,
    zero_cost_path,
)
from .phase import PhaseCell, Region, attractors, classify, scan
from .sampling import (
    CrossingSummary,
    EnsembleResult,
    chi_square_equivalence,
    crossing_stats,
    ensemble,
    ensemble_direct,
    sample_walk,
    sample_walk_direct,
    total_variation_vs_table,
)
from .urn import (
    CriticalParams,
    Crossing,
    FixedPoint,
    KgwUrn,
    LinearUrn,
    MajorityMemory,
    StepLimitUrn,
    critical_params,
    fixed_points,
    majority_prob,
    majority_prob_slope,
    x_from_y,
    y_from_x,
)

__all__ = [
    "__version__",
    # urn
    "MajorityMemory", "LinearUrn", "KgwUrn", "StepLimitUrn",
    "Crossing", "FixedPoint", "CriticalParams",
    "majority_prob", "majority_prob_slope", "fixed_points", "critical_params",
    "x_from_y", "y_from_x",
    # exact
    "WalkInit", "DistributionTable", "EntropyCurve",
    "evolve", "evolve_checkpoints", "interval_log_mass", "entropy_profile",
    "extrapolated_entropy", "decay_exponent",
    # sampling
    "EnsembleResult", "CrossingSummary",
    "sample_walk", "sample_walk_direct", "ensemble", "ensemble_direct",
    "crossing_stats", "chi_square_equivalence", "total_variation_vs_table",
    # paths
    "Trajectory", "bernoulli_kl", "neg_bernoulli_kl", "path_rate",
    "zero_cost_path", "optimal_path", "current_conservation_check",
    "CurrentCheckReport",
    # cgf
    "CgfCurve", "finite_n_cgf", "cgf_ode", "cgf_closed_form_k1",
    "closed_form_curve_k1", "legendre_entropy", "singular_order",
    "default_lambda_grid",
    # phase
    "Region", "PhaseCell", "attractors", "classify", "scan",
    # errors
    "ErwalkError", "NotDifferentiableError", "UnsupportedUrnError",
    "InvalidPathError", "DomainBreachError", "NonConvergenceError",
    "ResourceLimitError",
]
