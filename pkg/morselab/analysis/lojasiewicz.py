"""
Exponent estimates near a limit point.

All fits work on a converged (or at least long) trajectory and read the
samples only; nothing is re-integrated here.

Example:
    >>> from morselab.fields import create_field
    >>> from morselab.flow import integrate_flow
    >>> f = create_field("power_well", {"k": 2})
    >>> fit = estimate_lojasiewicz(f, integrate_flow(f, [1.0]), [0.0], f_p=0.0)
    >>> round(fit.exponent, 3), fit.checks["in_range"]
    (0.75, True)
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .fits import AnalysisFit, bound_violation, fit_line, fit_power_law, tail_indices
from ..exceptions import InputError, InsufficientDataError
from ..fields.base import ScalarField
from ..flow.engine import tail_arc_length
from ..flow.trajectory import Trajectory
from ..log_utils import get_logger
from ..manifolds import CriticalManifoldModel

logger = get_logger(__name__)

VALUE_FLOOR = 1e-13
DISTANCE_FLOOR = 1e-12
TAIL_FRACTION = 0.6
THETA_RANGE = (0.45, 1.0)
BOUND_FACTOR = 0.5
BOUND_SLACK = 1e-9
TAIL_LENGTH_RESOLUTION = 1e6
K_MARGIN = 0.05


def _limit_value(traj: Trajectory, f_p: Optional[float]) -> float:
    return float(traj.values[-1]) if f_p is None else float(f_p)


def estimate_lojasiewicz(
    field: ScalarField,
    traj: Trajectory,
    p: Sequence[float],
    f_p: Optional[float] = None,
    tail_fraction: float = TAIL_FRACTION,
) -> AnalysisFit:
    """
    Fit |grad f| = C (f - f(p))^theta on the tail of a trajectory.

    The window is the last `tail_fraction` of the samples with
    f - f(p) > 1e-13. The fit passes when theta lies in [0.45, 1) and the
    bound |grad f| >= 0.5 C (f - f(p))^theta holds on every window sample.

    Args:
        field: The integrated field
        traj: Trajectory converging to p
        p: Limit point
        f_p: f(p); defaults to the terminal value of the trajectory

    Raises:
        InsufficientDataError: Fewer than 8 usable samples
    """
    p = field.check_point(p)
    if field.domain.distance(traj.endpoint, p) > 1e-3:
        logger.warning("Trajectory of %s ends %.3g away from the given limit", field.field_id,
                       field.domain.distance(traj.endpoint, p))
    f_p = _limit_value(traj, f_p)
    gaps = traj.values - f_p
    idx = tail_indices((gaps > VALUE_FLOOR) & (traj.grad_norms > 0), tail_fraction)
    if idx.size == 0:
        raise InsufficientDataError("No samples above the value floor", available=0)

    fit = fit_power_law(gaps[idx], traj.grad_norms[idx], (int(idx[0]), int(idx[-1]) + 1))
    _, violation = bound_violation(fit, gaps[idx], traj.grad_norms[idx], BOUND_FACTOR)
    lo, hi = THETA_RANGE
    checks = {
        "in_range": bool(lo <= fit.exponent < hi),
        "pointwise_bound": violation == 0.0,
    }
    return AnalysisFit(
        exponent=fit.exponent,
        log_constant=fit.log_constant,
        residual=fit.residual,
        window=fit.window,
        sample_count=fit.sample_count,
        checks=checks,
        details={"f_p": f_p, "quantity": "theta"},
        xs=fit.xs,
        ys=fit.ys,
    )


def check_distance_inequality(
    field: ScalarField,
    manifold: CriticalManifoldModel,
    samples: Sequence[Sequence[float]],
    exponent_grid: Optional[Sequence[float]] = None,
    radius: Optional[float] = None,
) -> AnalysisFit:
    """
    Fit f(x) >= C dist(x, N)^alpha around a critical manifold N with f = 0 on N.

    alpha and C come from regressing log f on log dist over the samples
    within `radius` of N. The bound is then checked with half the fitted
    constant, as for the gradient inequality, and fails when any sample
    falls below it by more than 1e-9 relative. Each exponent in
    `exponent_grid` gets its largest admissible constant in
    `details["grid_constants"]`.

    Raises:
        InsufficientDataError: Too few samples off N
        InputError: A sample has f < 0
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    dists = np.array([manifold.distance(x) for x in pts])
    values = np.array([field.value(x) for x in pts])
    if np.any(values < -BOUND_SLACK):
        raise InputError("Distance inequality needs f >= 0 on the samples", parameter="samples")

    mask = dists >= DISTANCE_FLOOR
    if radius is not None:
        mask &= dists < radius
    mask &= values > 0
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise InsufficientDataError("Every sample lies on the manifold", available=0)

    fit = fit_power_law(dists[idx], values[idx], (int(idx[0]), int(idx[-1]) + 1))
    c_bound, violation = bound_violation(fit, dists[idx], values[idx], BOUND_FACTOR)

    grid = {}
    for alpha in exponent_grid or ():
        grid[float(alpha)] = float(np.min(values[idx] / dists[idx] ** float(alpha)))

    return AnalysisFit(
        exponent=fit.exponent,
        log_constant=fit.log_constant,
        residual=fit.residual,
        window=fit.window,
        sample_count=fit.sample_count,
        checks={"lower_bound": bool(violation <= BOUND_SLACK)},
        details={
            "quantity": "alpha",
            "bound_constant": c_bound,
            "max_violation": violation,
            "grid_constants": grid,
        },
        xs=fit.xs,
        ys=fit.ys,
    )


def tail_length_rate(
    traj: Trajectory,
    p: Sequence[float],
    f_p: Optional[float] = None,
) -> AnalysisFit:
    """
    Fit length(gamma[t, end]) = C (f(gamma(t)) - f(p))^beta.

    Only samples whose value gap exceeds 1e6 times the terminal gap are
    used, so the unintegrated part of the tail stays negligible.

    Raises:
        InputError: The trajectory did not converge
        InsufficientDataError: Constant trajectory or too few usable samples
    """
    if len(traj) < 2:
        raise InsufficientDataError("Trajectory is constant", available=len(traj))
    f_p = _limit_value(traj, f_p)
    gaps = traj.values - f_p
    end_gap = max(float(gaps[-1]), 0.0)
    tails = np.array([tail_arc_length(traj, float(t)) for t in traj.times])
    mask = (gaps > VALUE_FLOOR) & (gaps >= TAIL_LENGTH_RESOLUTION * end_gap) & (tails > 0)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise InsufficientDataError("No decay to fit", available=0)

    fit = fit_power_law(gaps[idx], tails[idx], (int(idx[0]), int(idx[-1]) + 1))
    return AnalysisFit(
        exponent=fit.exponent,
        log_constant=fit.log_constant,
        residual=fit.residual,
        window=fit.window,
        sample_count=fit.sample_count,
        checks={"in_range": bool(0.0 < fit.exponent < 1.0)},
        details={"f_p": f_p, "quantity": "beta", "limit": np.asarray(p, dtype=float).tolist()},
        xs=fit.xs,
        ys=fit.ys,
    )


def exponential_decay_rate(
    traj: Trajectory,
    p: Sequence[float],
    field: Optional[ScalarField] = None,
    tail_fraction: float = TAIL_FRACTION,
) -> AnalysisFit:
    """
    Fit |gamma(t) - p| = C exp(-rate t); `exponent` holds the rate.

    A positive rate with a small residual means exponential convergence,
    which is what a non-degenerate (Morse-Bott) minimum produces.
    """
    dists = distance_series(traj, p, field)
    idx = tail_indices(dists > DISTANCE_FLOOR, tail_fraction)
    if idx.size == 0:
        raise InsufficientDataError("Trajectory never leaves the limit point", available=0)
    fit = fit_line(traj.times[idx], np.log(dists[idx]), (int(idx[0]), int(idx[-1]) + 1))
    return AnalysisFit(
        exponent=-fit.exponent,
        log_constant=fit.log_constant,
        residual=fit.residual,
        window=fit.window,
        sample_count=fit.sample_count,
        checks={"decaying": bool(fit.exponent < 0)},
        details={"quantity": "rate"},
        xs=fit.xs,
        ys=fit.ys,
    )


def distance_series(traj: Trajectory, p: Sequence[float], field: Optional[ScalarField] = None) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if field is not None:
        return np.array([field.domain.distance(x, p) for x in traj.points])
    return np.linalg.norm(traj.points - p, axis=1)


@dataclass(frozen=True)
class DistanceEnvelope:
    """max over s >= t of |gamma(s) - p| at every sample time t."""
    times: np.ndarray
    envelope: np.ndarray

    @property
    def final(self) -> float:
        return float(self.envelope[-1])

    def vanishes(self, tol: float) -> bool:
        """Whether the envelope falls below tol by the end of the run."""
        return self.final < tol


def distance_envelope(
    traj: Trajectory, p: Sequence[float], field: Optional[ScalarField] = None
) -> DistanceEnvelope:
    """
    Suffix maximum of the distance to p.

    It is non-increasing by construction; convergence of the whole
    trajectory (not just a subsequence) shows up as the envelope reaching 0.
    """
    dists = distance_series(traj, p, field)
    envelope = np.maximum.accumulate(dists[::-1])[::-1]
    return DistanceEnvelope(times=traj.times.copy(), envelope=envelope)


def lojasiewicz_threshold(theta: float, margin: float = K_MARGIN) -> int:
    """
    Smallest integer k with 2 k theta' < 2 k - 1, where theta' = theta + margin.

    Example:
        >>> lojasiewicz_threshold(0.5), lojasiewicz_threshold(0.75)
        (2, 3)

    Raises:
        InputError: theta + margin outside [0, 1)
    """
    widened = float(theta) + float(margin)
    if not np.isfinite(widened) or widened >= 1.0 or widened < 0.0:
        raise InputError(f"Exponent {theta} with margin {margin} leaves no admissible k", parameter="theta")
    return int(np.floor(1.0 / (2.0 * (1.0 - widened)))) + 1
