"""
Tangential versus normal approach to a critical manifold.

For a flow line converging to p on a critical manifold N, write
d = gamma(t) - p and split it with the projectors of T_pN (P) and of the
normal space (Q). The normal-bias ratio |P d| / |Q d|^2 stays bounded,
and the secant d / |d| converges to a normal direction.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from ..exceptions import InputError, InsufficientDataError
from ..flow.trajectory import Trajectory
from ..log_utils import get_logger
from ..manifolds import CriticalManifoldModel

logger = get_logger(__name__)

NORMAL_FLOOR = 1e-12
# |Q d|^2 below this multiple of 64 eps |p| is dominated by rounding in P d
ROUNDING_MULTIPLE = 1e3
DEFAULT_LOCATE_TOL = 1e-4
TREND_FACTOR = 2.0


def _check_limit(manifold: CriticalManifoldModel, p: Sequence[float], locate_tol: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    dist = manifold.distance(p)
    if dist > locate_tol:
        raise InputError(
            f"Limit point lies {dist:.3g} from the critical manifold (tolerance {locate_tol:g})",
            parameter="p",
        )
    return p


@dataclass
class BiasReport:
    """
    Normal-bias ratio series over a trajectory tail.

    Attributes:
        times: Sample times that passed the floors
        ratios: |P d| / |Q d|^2 at those times
        tail_sup: Largest ratio over the last half of the series
        tail_median: Median ratio over the last half
        limit_point: p
        manifold: Model of N
    """
    times: np.ndarray
    ratios: np.ndarray
    tail_sup: float
    tail_median: float
    limit_point: np.ndarray
    manifold: CriticalManifoldModel = field(repr=False)

    @property
    def bounded(self) -> bool:
        """Trend-free tail: nothing in the last half exceeds twice its median."""
        return bool(np.isfinite(self.tail_sup) and self.tail_sup <= TREND_FACTOR * self.tail_median)

    def relative_change(self, other: "BiasReport") -> float:
        """|tail_sup - other.tail_sup| relative to the larger of the two (0 when both vanish)."""
        scale = max(abs(self.tail_sup), abs(other.tail_sup))
        return abs(self.tail_sup - other.tail_sup) / scale if scale > 0 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tail_sup": self.tail_sup,
            "tail_median": self.tail_median,
            "bounded": self.bounded,
            "samples": int(self.ratios.size),
            "limit_point": self.limit_point.tolist(),
            "manifold": self.manifold.describe(),
        }


def normal_bias(
    traj: Trajectory,
    manifold: CriticalManifoldModel,
    p: Sequence[float],
    locate_tol: float = DEFAULT_LOCATE_TOL,
) -> BiasReport:
    """
    Ratio |P(gamma - p)| / |Q(gamma - p)|^2 along the trajectory.

    Samples with |Q d| <= 1e-12, or with |Q d|^2 inside the rounding band of
    |P d|, are skipped.

    Raises:
        InputError: p farther than locate_tol from the manifold
        InsufficientDataError: No sample passes the floors
    """
    p = _check_limit(manifold, p, locate_tol)
    proj_t = manifold.tangent_projector(p)
    proj_n = manifold.normal_projector(p)
    noise = ROUNDING_MULTIPLE * 64.0 * np.finfo(float).eps * max(1.0, float(np.linalg.norm(p)))

    d = traj.points - p
    tangential = np.linalg.norm(d @ proj_t.T, axis=1)
    normal = np.linalg.norm(d @ proj_n.T, axis=1)
    keep = (normal > NORMAL_FLOOR) & (normal ** 2 >= noise)
    if not np.any(keep):
        raise InsufficientDataError("No sample has a resolvable normal displacement", available=0, required=1)

    ratios = tangential[keep] / normal[keep] ** 2
    tail = ratios[ratios.size // 2:]
    report = BiasReport(
        times=traj.times[keep].copy(),
        ratios=ratios,
        tail_sup=float(np.max(tail)),
        tail_median=float(np.median(tail)),
        limit_point=p,
        manifold=manifold,
    )
    logger.debug("Normal bias on %s: tail_sup=%.4g over %d samples", traj.field_id, report.tail_sup, ratios.size)
    return report


@dataclass
class SecantReport:
    """
    Unit secants (gamma(t) - p) / |gamma(t) - p| over a trajectory.

    Attributes:
        times: Sample times with |gamma - p| above the floor
        directions: Unit secants, one row per time
        limit_estimate: Secant at the last usable sample
        tangent_angle: Angle between limit_estimate and T_pN, in radians
        tail_spread: Largest pairwise angle among the last quarter of secants
    """
    times: np.ndarray
    directions: np.ndarray
    limit_estimate: np.ndarray
    tangent_angle: float
    tail_spread: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "limit_estimate": self.limit_estimate.tolist(),
            "tangent_angle": self.tangent_angle,
            "tail_spread": self.tail_spread,
            "samples": int(len(self.times)),
        }


def secant_limit(
    traj: Trajectory,
    manifold: CriticalManifoldModel,
    p: Sequence[float],
    locate_tol: float = DEFAULT_LOCATE_TOL,
) -> SecantReport:
    """
    Limit of the secant direction and its angle to the tangent space.

    Raises:
        InputError: p farther than locate_tol from the manifold
        InsufficientDataError: The trajectory never leaves p
    """
    p = _check_limit(manifold, p, locate_tol)
    d = traj.points - p
    lengths = np.linalg.norm(d, axis=1)
    keep = lengths > NORMAL_FLOOR
    if not np.any(keep):
        raise InsufficientDataError("Trajectory never leaves the limit point", available=0, required=1)

    directions = d[keep] / lengths[keep, None]
    limit = directions[-1]
    along = float(np.linalg.norm(manifold.tangent_projector(p) @ limit))
    tangent_angle = float(np.arccos(np.clip(along, 0.0, 1.0)))

    quarter = directions[directions.shape[0] - max(directions.shape[0] // 4, 1):]
    if quarter.shape[0] > 1:
        cosines = 1.0 - pdist(quarter, metric="cosine")
        spread = float(np.max(np.arccos(np.clip(cosines, -1.0, 1.0))))
    else:
        spread = 0.0

    return SecantReport(
        times=traj.times[keep].copy(),
        directions=directions,
        limit_estimate=limit,
        tangent_angle=tangent_angle,
        tail_spread=spread,
    )
