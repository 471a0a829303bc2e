"""
Monte Carlo surveys over many flow lines: where they end, how they pass
critical points, and how long they are.
"""

from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .connections import DEFAULT_LOCATE_TOL
from ..fields.base import ScalarField
from ..flow.batch import integrate_many
from ..flow.config import IntegratorConfig
from ..flow.trajectory import Trajectory
from ..log_utils import get_logger

logger = get_logger(__name__)


@dataclass
class ConvergenceSurvey:
    """How many starts flowed into a local minimum."""
    total: int
    to_minimum: int
    unconverged: int
    failures: int
    endpoints: List[np.ndarray] = dc_field(default_factory=list, repr=False)

    @property
    def fraction(self) -> float:
        return self.to_minimum / self.total if self.total else 0.0


def convergence_survey(
    field: ScalarField,
    starts: Sequence[Sequence[float]],
    minima: Sequence[Sequence[float]],
    cfg: Optional[IntegratorConfig] = None,
    locate_tol: float = DEFAULT_LOCATE_TOL,
    max_workers: int = 1,
) -> ConvergenceSurvey:
    """
    Integrate from every start and count endpoints within locate_tol of a listed minimum.

    Starts on the stable manifold of a saddle form a null set, so on a
    compact Morse domain the fraction should be essentially 1.
    """
    batch = integrate_many(field, starts, cfg, max_workers)
    mins = [np.asarray(m, dtype=float) for m in minima]
    hits = 0
    unconverged = 0
    endpoints = []
    for traj in batch.trajectories:
        if traj is None:
            continue
        endpoints.append(traj.endpoint)
        if not traj.converged:
            unconverged += 1
            continue
        if any(field.domain.distance(traj.endpoint, m) < locate_tol for m in mins):
            hits += 1
    survey = ConvergenceSurvey(len(batch), hits, unconverged, batch.failure_count, endpoints)
    logger.info("Convergence survey on %s: %d/%d to a minimum", field.field_id, hits, len(batch))
    return survey


def near_blocks(
    traj: Trajectory, point: Sequence[float], radius: float, field: Optional[ScalarField] = None
) -> List[range]:
    """Maximal runs of consecutive sample indices within `radius` of a point."""
    p = np.asarray(point, dtype=float)
    if field is not None:
        dists = np.array([field.domain.distance(x, p) for x in traj.points])
    else:
        dists = np.linalg.norm(traj.points - p, axis=1)
    inside = dists < radius
    blocks: List[range] = []
    start = None
    for i, flag in enumerate(inside):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            blocks.append(range(start, i))
            start = None
    if start is not None:
        blocks.append(range(start, len(inside)))
    return blocks


def enter_once_check(
    traj: Trajectory,
    points: Sequence[Sequence[float]],
    radius: float = 0.1,
    field: Optional[ScalarField] = None,
) -> Dict[int, bool]:
    """
    For each point, whether the samples inside its ball form one contiguous block.

    A trajectory that never enters the ball passes trivially.
    """
    return {i: len(near_blocks(traj, p, radius, field)) <= 1 for i, p in enumerate(points)}


@dataclass
class LengthSurvey:
    """Total arc lengths of flows from many starts."""
    lengths: np.ndarray
    bound: Optional[float] = None

    @property
    def max_length(self) -> float:
        return float(np.max(self.lengths)) if len(self.lengths) else 0.0

    @property
    def bounded(self) -> bool:
        if not len(self.lengths) or not np.all(np.isfinite(self.lengths)):
            return False
        return self.bound is None or self.max_length <= self.bound


def length_survey(
    field: ScalarField,
    starts: Sequence[Sequence[float]],
    cfg: Optional[IntegratorConfig] = None,
    bound: Optional[float] = None,
    max_workers: int = 1,
) -> LengthSurvey:
    """
    Arc lengths of complete flow lines; their maximum witnesses a uniform length bound.

    Only converged trajectories contribute.
    """
    batch = integrate_many(field, starts, cfg, max_workers)
    lengths = np.array([t.total_length for t in batch.succeeded if t.converged])
    return LengthSurvey(lengths=lengths, bound=bound)
