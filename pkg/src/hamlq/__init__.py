"""Structural analysis and nonrecursive solution of discrete-time LQ problems.

The package computes, for a plant (A, B) with stage cost |C x + D u|^2:

* the stabilizing Riccati solution (P, K, Rw) and closed loop A_K = A + B K,
* the closed-loop Gramian W,
* closed-form bases V1, V2, Vbar2 for the forward and backward solution
  families of the coupled state/costate/input relations, with rank
  diagnostics explaining when V2 loses rank,
* finite-horizon trajectories in closed form, checked against two
  independent oracles.
"""

from .errors import (
    BoundaryInconsistent,
    ConvergenceFailure,
    HamlqError,
    Infeasible,
    NotStabilizable,
    NotStable,
    SingularMatrix,
    SingularWeight,
)
from .golden import GoldenResult, golden_check, golden_system
from .hamsubspace import (
    AnalysisBundle,
    DimensionReport,
    InvariantBases,
    ResidualNorms,
    analyze,
    assemble_v1,
    assemble_v2,
    assemble_vbar2,
    dimension_report,
    residuals_v1,
    residuals_v2,
)
from .lqtraj import (
    Trajectory,
    TrajectoryProblem,
    cost,
    kkt_oracle,
    riccati_recursion_oracle,
    solve_nonrecursive,
    stage_costs,
)
from .matcore import DEFAULT_TOL, ToleranceConfig
from .reachdecomp import (
    StaircaseForm,
    SystemQuadruple,
    reachability_matrix,
    staircase,
    zero_row_indices,
)
from .riccati import (
    RestrictedSolution,
    RiccatiSolution,
    gain_partition,
    solve_dare,
    solve_dare_restricted,
)
from .stablyap import (
    GramianSolution,
    closed_loop_gramian,
    solve_dlyap_stable,
    stability_certificate,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "HamlqError",
    "SingularMatrix",
    "ConvergenceFailure",
    "NotStabilizable",
    "SingularWeight",
    "NotStable",
    "BoundaryInconsistent",
    "Infeasible",
    "ToleranceConfig",
    "DEFAULT_TOL",
    "SystemQuadruple",
    "StaircaseForm",
    "reachability_matrix",
    "staircase",
    "zero_row_indices",
    "GramianSolution",
    "solve_dlyap_stable",
    "closed_loop_gramian",
    "stability_certificate",
    "RiccatiSolution",
    "RestrictedSolution",
    "solve_dare",
    "solve_dare_restricted",
    "gain_partition",
    "ResidualNorms",
    "InvariantBases",
    "DimensionReport",
    "AnalysisBundle",
    "assemble_v1",
    "assemble_vbar2",
    "assemble_v2",
    "residuals_v1",
    "residuals_v2",
    "analyze",
    "dimension_report",
    "TrajectoryProblem",
    "Trajectory",
    "solve_nonrecursive",
    "riccati_recursion_oracle",
    "kkt_oracle",
    "cost",
    "stage_costs",
    "GoldenResult",
    "golden_check",
    "golden_system",
]
