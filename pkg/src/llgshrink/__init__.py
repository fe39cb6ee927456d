"""Self-similar shrinker profiles of the 1-D Landau-Lifshitz-Gilbert equation.

Numerical construction of the profiles by Serret-Frenet frame integration,
extraction of their limiting constants and limit great circles, and
verification of the quantitative bounds and identities they satisfy.
"""

from .errors import (
    BudgetExceededError,
    DefectError,
    DegenerateGeometryError,
    ExtractionError,
    IntegrationError,
    LLGShrinkError,
    ParameterError,
    RangeError,
)
from .integrator import (
    AugmentedState,
    Frame,
    Trace,
    TraceStats,
    explicit_alpha1,
    explicit_c0,
    frame_at,
    frames_at,
    gj_residual,
    gradient_magnitude_check,
    initial_state,
    integrate,
    max_feasible_x,
    profile_residual,
    reflect,
    write_trace_binary,
    write_trace_csv,
)
from .constants import (
    ContinuityRow,
    IdentityReport,
    LimitConstants,
    compute_constants,
    constants_report,
    continuity_scan,
    extract_by_matching,
    extract_by_quadrature,
    identity_suite,
    matching_truncation_point,
)
from .asymptotics import (
    ZERO_FLOOR,
    AsymptoticEval,
    BoundCheck,
    BoundSuiteReport,
    CorFacilReport,
    DecayFit,
    OscDefect,
    OscIntegral,
    b_asymptotic,
    bound_report,
    bound_suite,
    corfacil_check,
    decay_regression,
    m_asymptotic,
    mprime_asymptotic,
    osc_integral,
    osc_leading_defect,
    w_asymptotic,
)
from .geometry import (
    AngleBoundReport,
    AngleScanRow,
    CircleGeom,
    angle_bound_check,
    angle_limit_scan,
    build_geometry,
    circle_report,
    dist_bound_check,
    dist_to_circle,
    dist_to_plane,
)
from .cli import (
    RunConfig,
    UsageError,
    main,
)
from .shrinker import (
    MAX_PANEL_DPSI,
    BlowupRow,
    ConvergenceRow,
    ShrinkerSolution,
    TestFunction,
    WeakLimitRow,
    blowup_table,
    bump_testfn,
    circle_convergence_scan,
    eval_solution,
    gaussian_weight_identities,
    grad_magnitude,
    grad_magnitude_fd,
    make_solution,
    max_usable_t,
    similarity_variable,
    weak_limit_report,
    weak_limit_scan,
    write_solution_csv,
)
from .params import (
    TWO_PI,
    X_CAP,
    Params,
    PhaseValue,
    TruncationPoint,
    gauss_tail,
    make_params,
    phase_value,
    phi,
    phi_asymptotic,
    tail_bound,
    truncation_point,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "LLGShrinkError",
    "ParameterError",
    "IntegrationError",
    "BudgetExceededError",
    "DefectError",
    "RangeError",
    "ExtractionError",
    "DegenerateGeometryError",
    "Frame",
    "AugmentedState",
    "Trace",
    "TraceStats",
    "initial_state",
    "integrate",
    "frame_at",
    "frames_at",
    "reflect",
    "explicit_alpha1",
    "explicit_c0",
    "profile_residual",
    "gradient_magnitude_check",
    "gj_residual",
    "max_feasible_x",
    "write_trace_csv",
    "write_trace_binary",
    "LimitConstants",
    "IdentityReport",
    "ContinuityRow",
    "extract_by_quadrature",
    "extract_by_matching",
    "matching_truncation_point",
    "identity_suite",
    "compute_constants",
    "continuity_scan",
    "constants_report",
    "ZERO_FLOOR",
    "AsymptoticEval",
    "OscIntegral",
    "OscDefect",
    "CorFacilReport",
    "BoundCheck",
    "BoundSuiteReport",
    "DecayFit",
    "m_asymptotic",
    "mprime_asymptotic",
    "b_asymptotic",
    "w_asymptotic",
    "osc_integral",
    "osc_leading_defect",
    "corfacil_check",
    "bound_suite",
    "bound_report",
    "decay_regression",
    "CircleGeom",
    "AngleBoundReport",
    "AngleScanRow",
    "build_geometry",
    "dist_to_plane",
    "dist_to_circle",
    "dist_bound_check",
    "angle_bound_check",
    "angle_limit_scan",
    "circle_report",
    "MAX_PANEL_DPSI",
    "ShrinkerSolution",
    "RunConfig",
    "UsageError",
    "main",
    "ConvergenceRow",
    "WeakLimitRow",
    "BlowupRow",
    "TestFunction",
    "make_solution",
    "eval_solution",
    "similarity_variable",
    "max_usable_t",
    "grad_magnitude",
    "grad_magnitude_fd",
    "circle_convergence_scan",
    "weak_limit_scan",
    "weak_limit_report",
    "bump_testfn",
    "gaussian_weight_identities",
    "blowup_table",
    "write_solution_csv",
    "TWO_PI",
    "X_CAP",
    "Params",
    "PhaseValue",
    "TruncationPoint",
    "make_params",
    "phi",
    "phase_value",
    "phi_asymptotic",
    "gauss_tail",
    "tail_bound",
    "truncation_point",
]
