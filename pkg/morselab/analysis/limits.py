"""
Coverage of a critical manifold by flow limits.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from .fits import AnalysisFit, bound_violation, fit_power_law
from .lojasiewicz import BOUND_SLACK
from ..exceptions import InsufficientDataError
from ..fields.base import ScalarField
from ..flow.batch import integrate_many
from ..flow.config import IntegratorConfig
from ..log_utils import get_logger
from ..manifolds import CriticalManifoldModel

logger = get_logger(__name__)

DEFAULT_LOCATE_TOL = 1e-4
LENGTH_FACTOR = 2.0


@dataclass
class CoverageReport:
    """
    Attributes:
        limits: Projections onto N of the converged endpoints
        max_gap: Largest distance from a mesh point of N to its nearest limit
        parameter_gap: Largest gap between sorted limit parameters on a closed curve
        nominal_spacing: Period divided by the number of limits, on closed curves
        start_distances: dist(x0, N) for the converged starts
        arc_lengths: Total arc length of the converged flows
        length_fit: Power-law fit of arc length against start distance, when distances vary
        length_constant: Twice the fitted constant, the C of the bound arc_length <= C dist^alpha
        length_bounded: Whether every converged start satisfies that bound
        unconverged: Indices of starts that did not converge or ended off N
    """
    limits: np.ndarray
    max_gap: float
    parameter_gap: Optional[float] = None
    nominal_spacing: Optional[float] = None
    start_distances: np.ndarray = field(default_factory=lambda: np.empty(0))
    arc_lengths: np.ndarray = field(default_factory=lambda: np.empty(0))
    length_fit: Optional[AnalysisFit] = None
    length_constant: Optional[float] = None
    length_bounded: Optional[bool] = None
    unconverged: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "limits": int(len(self.limits)),
            "max_gap": self.max_gap,
            "parameter_gap": self.parameter_gap,
            "nominal_spacing": self.nominal_spacing,
            "length_fit": self.length_fit.to_dict() if self.length_fit else None,
            "length_constant": self.length_constant,
            "length_bounded": self.length_bounded,
            "unconverged": list(self.unconverged),
        }


def _parameter_gap(manifold: CriticalManifoldModel, limits: np.ndarray) -> Tuple[float, float]:
    period = float(manifold.periodic_parameter)
    params = np.sort([manifold.parameter(p) for p in limits])
    gaps = np.diff(np.append(params, params[0] + period))
    return float(np.max(gaps)), period / len(params)


def dense_limit_survey(
    field: ScalarField,
    manifold: CriticalManifoldModel,
    starts: Sequence[Sequence[float]],
    cfg: Optional[IntegratorConfig] = None,
    mesh_count: Optional[int] = None,
    mesh_bounds: Tuple[float, float] = (-1.0, 1.0),
    locate_tol: float = DEFAULT_LOCATE_TOL,
    max_workers: int = 1,
) -> CoverageReport:
    """
    Integrate every start and measure how densely the limits fill N.

    Non-convergent starts, and starts whose endpoint is farther than
    `locate_tol` from N, are listed in `unconverged` and left out of the
    gaps. When the start distances to N vary, arc length is fitted against
    distance as a power law, and the bound with twice the fitted constant
    is checked at every converged start.

    Args:
        mesh_count: Mesh points on N; defaults to the number of starts
        mesh_bounds: Parameter bounds of the mesh on unbounded N

    Raises:
        InsufficientDataError: No start converged onto N
    """
    batch = integrate_many(field, starts, cfg, max_workers)
    limits, dists, lengths, missed = [], [], [], []
    for i, traj in enumerate(batch.trajectories):
        if traj is None or not traj.converged or manifold.distance(traj.endpoint) > locate_tol:
            missed.append(i)
            continue
        limits.append(manifold.project(traj.endpoint))
        dists.append(manifold.distance(traj.points[0]))
        lengths.append(traj.total_length)
    if not limits:
        raise InsufficientDataError("No flow converged onto the manifold", available=0, required=1)
    if missed:
        logger.warning("%d of %d starts did not reach the manifold", len(missed), len(batch))

    limit_arr = np.array(limits)
    mesh = manifold.mesh(mesh_count or len(starts), *mesh_bounds)
    max_gap = float(np.max(np.min(cdist(mesh, limit_arr), axis=1)))

    report = CoverageReport(
        limits=limit_arr,
        max_gap=max_gap,
        start_distances=np.array(dists),
        arc_lengths=np.array(lengths),
        unconverged=missed,
    )
    if manifold.periodic_parameter is not None:
        report.parameter_gap, report.nominal_spacing = _parameter_gap(manifold, limit_arr)

    d, l = report.start_distances, report.arc_lengths
    usable = (d > 0) & (l > 0)
    if np.count_nonzero(usable) and np.ptp(d[usable]) > 1e-9 * np.max(d[usable]):
        try:
            fit = fit_power_law(d[usable], l[usable], (0, len(d)))
        except InsufficientDataError as e:
            logger.debug("No length fit: %s", e)
        else:
            report.length_fit = fit
            report.length_constant, violation = bound_violation(fit, d[usable], l[usable], LENGTH_FACTOR, lower=False)
            report.length_bounded = violation <= BOUND_SLACK
    return report
