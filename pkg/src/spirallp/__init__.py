"""PDHG for linear programs: spiral trajectory analysis and a simplex-free
crossover.

The package is organized around five building blocks:

- model: problem containers (standard, box, general form) and the
  equality-form reformulation with slack variables.
- mps: a fixed- and free-format MPS reader producing general-form problems.
- pdhg: the primal-dual hybrid gradient iteration, relative KKT residuals,
  trajectory recording, and infeasibility certificates.
- spiral: exact closed-form geometry of the iterates between basis changes
  (centers, rays, rotation operators, phase segmentation).
- crossover: a simplex-free push to an exactly-feasible vertex with a
  verified basis.
"""

from .linalg import (
    IterativeSolveError,
    LsSolveReport,
    LuSelection,
    RankCompletionError,
    SpectralEstimateError,
    SpectralSummary,
    least_squares,
    lu_select_independent_columns,
    project_kernel,
    spectral_norm_estimate,
    svd_summary,
)
from .model import (
    BoxLp,
    GeneralLp,
    ReformulatedLp,
    StandardLp,
    as_box,
    reformulate,
    toy_example,
)
from .mps import MpsParseError, parse_mps, parse_mps_file
from .scaling import ScaledLp, ruiz_equilibrate
from .pdhg import (
    IdvEstimate,
    NonFiniteIterateError,
    PdhgState,
    Residuals,
    SolveResult,
    StepConfig,
    Trajectory,
    estimate_idv,
    initial_state,
    m_norm,
    pdhg_step,
    resolve_eta,
    residuals,
    solve,
    trajectory_to_csv,
)
from .spiral import (
    BasisChangeEvent,
    BasisPartition,
    Phase,
    SpiralRay,
    apply_rotation,
    classify_basis,
    classify_basis_change,
    closed_form_iterate,
    closed_form_trajectory,
    gap_drift,
    phases_to_json,
    rotation_matrix,
    segment_phases,
    spiral_of_phase,
)
from .crossover import (
    CrossoverConfig,
    CrossoverFailed,
    CrossoverResult,
    CrossoverState,
    CrossoverTimeout,
    Perturbation,
    PushStep,
    VertexReport,
    build_dual_aux,
    build_primal_aux,
    dual_direction,
    dual_push,
    identify_sets,
    independence_check,
    primal_direction,
    primal_push,
    run_crossover,
    support_count,
    verify_vertex,
)

__version__ = "0.1.0"

__all__ = [
    "BasisChangeEvent",
    "BasisPartition",
    "BoxLp",
    "CrossoverConfig",
    "CrossoverFailed",
    "CrossoverResult",
    "CrossoverState",
    "CrossoverTimeout",
    "GeneralLp",
    "IdvEstimate",
    "IterativeSolveError",
    "LsSolveReport",
    "LuSelection",
    "MpsParseError",
    "NonFiniteIterateError",
    "PdhgState",
    "Perturbation",
    "Phase",
    "PushStep",
    "RankCompletionError",
    "ReformulatedLp",
    "Residuals",
    "ScaledLp",
    "SolveResult",
    "SpectralEstimateError",
    "SpectralSummary",
    "SpiralRay",
    "StandardLp",
    "StepConfig",
    "Trajectory",
    "VertexReport",
    "apply_rotation",
    "as_box",
    "build_dual_aux",
    "build_primal_aux",
    "classify_basis",
    "classify_basis_change",
    "closed_form_iterate",
    "closed_form_trajectory",
    "dual_direction",
    "dual_push",
    "estimate_idv",
    "gap_drift",
    "identify_sets",
    "independence_check",
    "initial_state",
    "least_squares",
    "lu_select_independent_columns",
    "m_norm",
    "parse_mps",
    "parse_mps_file",
    "pdhg_step",
    "phases_to_json",
    "primal_direction",
    "primal_push",
    "project_kernel",
    "reformulate",
    "residuals",
    "resolve_eta",
    "rotation_matrix",
    "ruiz_equilibrate",
    "run_crossover",
    "segment_phases",
    "solve",
    "spectral_norm_estimate",
    "spiral_of_phase",
    "support_count",
    "svd_summary",
    "toy_example",
    "trajectory_to_csv",
    "verify_vertex",
]
