"""Robust l_p regression (0 <= p <= 1) by iteratively reweighted least squares.

The solver alternates weighted least-squares solves with weight updates
``max(|r_i|, eps)^(p-2)``, where the smoothing parameter ``eps`` follows a
pluggable rule. Companion modules provide diagnostics for the range space
property and rate bounds, synthetic data generators, baselines and
application pipelines.
"""

from .apps import (
    gen_rpr,
    gen_rr,
    gen_slr,
    least_squares,
    phase_retrieval_pipeline,
    relative_error,
    restoration_pipeline,
    salt_pepper_corrupt,
    subgradient_baseline,
    synthetic_face_matrix,
)
from .diagnostics import (
    basis_pursuit_equivalence_check,
    brute_force_lp_min,
    gaussian_rsp_condition,
    global_linear_envelope,
    global_linear_rate,
    local_rate_constants,
    rsp_exact,
    rsp_randomized_lower_bound,
)
from .irls import (
    best_k_term_error,
    irls_solve,
    lp_objective,
    quadratic_majorizer,
    smoothed_objective,
    update_epsilon,
    update_weights,
)
from .model import (
    BestKTerm,
    DimensionTooLarge,
    ExponentialDecay,
    Fixed,
    InvalidRegime,
    IrlsConfig,
    IrlsResult,
    IterationTrace,
    LpIrlsError,
    MissingStepNorm,
    NoSparseSolution,
    NoUniqueSolution,
    NoValidC,
    RegressionInstance,
    ResidualQuantile,
    RspReport,
    SingularSystem,
    SmoothingState,
    TheoryConstants,
    ZeroGroundTruth,
    validate_instance,
)
from .wls import solve_wls, spectral_norm

__version__ = "0.1.0"
