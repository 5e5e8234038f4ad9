"""Local search for decentralized LQR problems.

Static output feedback with structural constraints on the gain matrix:
cost and derivatives through closed-loop Gramians, projected search
directions (Anderson-Moore, Newton-CG, gradient descent) under Armijo
line search, an augmented Lagrangian outer loop, exhaustive component
atlases of the stabilizing set, and batch experiments measuring jumps
between connected components under aggressive step sizes.
"""

from ._backend import BACKEND_NAME, load_backend
from .atlas import (
    BOUNDARY_LABEL,
    ComponentAtlas,
    atlas_from_json_dict,
    atlas_slice,
    atlas_to_json_dict,
    build_atlas,
    classify,
    count_jumps,
    fibonacci,
    fibonacci_bound_probe,
    load_atlas,
    normalize_box,
    philox_rng,
    sample_stabilizing,
    save_atlas,
    trajectory_labels,
)
from .bench import available_backends, format_table, run_benchmarks
from .derivatives import (
    AlmState,
    GradientEval,
    alm_gradient,
    alm_hessian_action,
    alm_value,
    gain_residual,
    gradient,
    hessian_action,
)
from .errors import (
    DegenerateStepError,
    DlqrError,
    InvalidParameterError,
    LineSearchError,
    LyapunovSingularError,
    NotStabilizingError,
    NumericFailureError,
    OutOfAtlasError,
    SamplingError,
    UnsupportedDimensionError,
)
from .experiment import JumpExperimentConfig, JumpReport, run_jump_experiment
from .lyap import (
    DEFAULT_TOLERANCES,
    GramianPair,
    StabilityReport,
    Tolerances,
    closed_loop,
    closed_loop_gramians,
    cost,
    is_stabilizing,
    solve_lyapunov,
    spectral_abscissa,
    stability_report,
    weighted_state_cost,
)
from .model import (
    ChainFamilyParams,
    LtiSystem,
    PerformanceWeights,
    StructureMask,
    alm_case_study,
    build_chain_system,
    default_chain_params,
    inverse_optimal_weights,
    problem_from_json,
    problem_to_json,
)
from .search import (
    PROJECTION_METHODS,
    STATUS_CONVERGED,
    STATUS_LINE_SEARCH_FAILED,
    STATUS_MAX_ITERS,
    STATUS_NUMERIC_FAILURE,
    AlmParams,
    ArmijoParams,
    Iterate,
    RunRecord,
    alm_anderson_moore_direction,
    anderson_moore_direction,
    armijo_search,
    is_descent_direction,
    newton_cg_direction,
    solve_alm,
    solve_projection_method,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "BOUNDARY_LABEL",
    "DEFAULT_TOLERANCES",
    "PROJECTION_METHODS",
    "STATUS_CONVERGED",
    "STATUS_LINE_SEARCH_FAILED",
    "STATUS_MAX_ITERS",
    "STATUS_NUMERIC_FAILURE",
    "AlmParams",
    "AlmState",
    "ArmijoParams",
    "ChainFamilyParams",
    "ComponentAtlas",
    "DegenerateStepError",
    "DlqrError",
    "GradientEval",
    "GramianPair",
    "InvalidParameterError",
    "Iterate",
    "JumpExperimentConfig",
    "JumpReport",
    "LineSearchError",
    "LtiSystem",
    "LyapunovSingularError",
    "NotStabilizingError",
    "NumericFailureError",
    "OutOfAtlasError",
    "PerformanceWeights",
    "RunRecord",
    "SamplingError",
    "StabilityReport",
    "StructureMask",
    "Tolerances",
    "UnsupportedDimensionError",
    "alm_anderson_moore_direction",
    "alm_case_study",
    "alm_gradient",
    "alm_hessian_action",
    "alm_value",
    "anderson_moore_direction",
    "armijo_search",
    "atlas_from_json_dict",
    "atlas_slice",
    "atlas_to_json_dict",
    "available_backends",
    "build_atlas",
    "build_chain_system",
    "classify",
    "closed_loop",
    "closed_loop_gramians",
    "cost",
    "count_jumps",
    "default_chain_params",
    "fibonacci",
    "fibonacci_bound_probe",
    "format_table",
    "gain_residual",
    "gradient",
    "hessian_action",
    "inverse_optimal_weights",
    "is_descent_direction",
    "is_stabilizing",
    "load_atlas",
    "load_backend",
    "newton_cg_direction",
    "normalize_box",
    "philox_rng",
    "problem_from_json",
    "problem_to_json",
    "run_benchmarks",
    "run_jump_experiment",
    "sample_stabilizing",
    "save_atlas",
    "solve_alm",
    "solve_lyapunov",
    "solve_projection_method",
    "spectral_abscissa",
    "stability_report",
    "trajectory_labels",
    "weighted_state_cost",
]
