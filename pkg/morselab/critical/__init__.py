"""
Critical-point analysis: location, classification, invariant manifolds and connections.
"""

from .connections import (
    BottDimensionReport,
    BranchKind,
    Connection,
    ConnectionReport,
    ExtremumCheck,
    LevelSample,
    NormalHessian,
    UnresolvedBranch,
    bott_dimension,
    eigen_directions,
    find_connections,
    level_slice_samples,
    manifold_branches,
    match_point,
    normal_hessian,
    restriction_extremum,
    unstable_sphere_samples,
)
from .points import (
    CriticalPoint,
    PointClass,
    SweepResult,
    classify,
    degeneracy_tol,
    find_critical,
    merge_points,
    sweep_critical,
)
from .surveys import (
    ConvergenceSurvey,
    LengthSurvey,
    convergence_survey,
    enter_once_check,
    length_survey,
    near_blocks,
)

__all__ = [
    "CriticalPoint",
    "PointClass",
    "SweepResult",
    "classify",
    "degeneracy_tol",
    "find_critical",
    "merge_points",
    "sweep_critical",
    "BranchKind",
    "Connection",
    "ConnectionReport",
    "UnresolvedBranch",
    "LevelSample",
    "NormalHessian",
    "BottDimensionReport",
    "ExtremumCheck",
    "eigen_directions",
    "unstable_sphere_samples",
    "manifold_branches",
    "find_connections",
    "match_point",
    "level_slice_samples",
    "normal_hessian",
    "bott_dimension",
    "restriction_extremum",
    "ConvergenceSurvey",
    "LengthSurvey",
    "convergence_survey",
    "enter_once_check",
    "length_survey",
    "near_blocks",
]
