"""
Gradient-flow integration.

Solves x' = -grad f(x) with an embedded adaptive Runge-Kutta pair from
scipy. The arc length s' = |grad f(x)| is carried as an extra state
component, so it is integrated at the same order and from the same
stage evaluations as the state.

Example:
    >>> from morselab.fields import create_field
    >>> traj = integrate_flow(create_field("power_well"), [1.0])
    >>> traj.stop_reason
    <StopReason.GRAD_NORM_MET: 'grad_norm_met'>
    >>> round(float(traj.state_at(1.0)[0]), 6)
    0.135335
"""

from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import roots_legendre

from .config import IntegratorConfig
from .trajectory import StopReason, Trajectory
from ..exceptions import InputError, IntegrationError
from ..fields.base import ScalarField
from ..log_utils import get_logger

logger = get_logger(__name__)

# nodes for averaging |grad f|^2 over one sample interval
_GAUSS_NODES, _GAUSS_WEIGHTS = roots_legendre(6)


def integrate_flow(
    field: ScalarField,
    x0: Sequence[float],
    cfg: Optional[IntegratorConfig] = None,
) -> Trajectory:
    """
    Integrate the negative gradient flow from x0.

    Args:
        field: Field to descend
        x0: Start point
        cfg: Integrator settings (defaults to `IntegratorConfig()`)

    Returns:
        Trajectory with one sample per accepted step. Step underflow and
        reaching the horizon are recorded in `stop_reason`, not raised.

    Raises:
        InputError: Invalid start point
        IntegrationError: The state or gradient became non-finite
    """
    cfg = cfg or IntegratorConfig()
    x0 = field.check_point(x0)
    n = field.dimension
    threshold = cfg.grad_threshold

    g0 = np.asarray(field._gradient(x0), dtype=float)
    if not np.all(np.isfinite(g0)):
        raise IntegrationError("Non-finite gradient at the start point", time=0.0)
    norm0 = float(np.linalg.norm(g0))
    if norm0 < threshold:
        return Trajectory(
            times=[0.0],
            points=[x0],
            values=[field._value(x0)],
            grad_norms=[norm0],
            arc_lengths=[0.0],
            stop_reason=StopReason.GRAD_NORM_MET,
            field_id=field.field_id,
            variable_names=field.variable_names,
        )

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        x = y[:n]
        if not np.all(np.isfinite(x)):
            raise IntegrationError("Flow state became non-finite", time=float(t))
        g = np.asarray(field._gradient(x), dtype=float)
        if not np.all(np.isfinite(g)):
            raise IntegrationError("Gradient became non-finite", time=float(t))
        out = np.empty(n + 1)
        out[:n] = -g
        out[n] = np.linalg.norm(g)
        return out

    def converged(t: float, y: np.ndarray) -> float:
        return float(np.linalg.norm(field._gradient(y[:n]))) - threshold

    converged.terminal = True  # type: ignore[attr-defined]
    converged.direction = -1  # type: ignore[attr-defined]

    def escaped(t: float, y: np.ndarray) -> float:
        return cfg.escape_norm - float(np.linalg.norm(y[:n]))

    escaped.terminal = True  # type: ignore[attr-defined]
    escaped.direction = -1  # type: ignore[attr-defined]

    y0 = np.append(x0, 0.0)
    sol = solve_ivp(
        rhs,
        (0.0, cfg.t_max),
        y0,
        method=cfg.method,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.max_step,
        events=[converged, escaped],
        dense_output=True,
    )

    if sol.status == -1:
        stop = StopReason.STEP_UNDERFLOW
        logger.warning("Integration of %s from %s stopped early: %s", field.field_id, x0.tolist(), sol.message)
    elif sol.status == 1 and len(sol.t_events[0]) > 0:
        stop = StopReason.GRAD_NORM_MET
    else:
        stop = StopReason.HORIZON_REACHED
        if sol.status == 1:
            logger.debug("Flow of %s from %s left the ball of radius %g", field.field_id, x0.tolist(), cfg.escape_norm)

    points = sol.y[:n].T
    if not np.all(np.isfinite(points)):
        raise IntegrationError("Flow produced non-finite samples", time=float(sol.t[-1]))

    values = np.array([field._value(x) for x in points])
    norms = np.array([np.linalg.norm(field._gradient(x)) for x in points])

    return Trajectory(
        times=sol.t,
        points=points,
        values=values,
        grad_norms=norms,
        arc_lengths=sol.y[n],
        stop_reason=stop,
        field_id=field.field_id,
        dense=sol.sol,
        variable_names=field.variable_names,
    )


def dissipation_residual(field: ScalarField, traj: Trajectory) -> float:
    """
    Largest violation of d/dt f(gamma) = -|grad f(gamma)|^2 along a trajectory.

    For each sample interval the difference quotient of f is compared with the
    interval average of |grad f|^2, taken by Gauss-Legendre quadrature on the
    dense output (midpoint rule without it).

    Raises:
        InputError: Fewer than two samples on a trajectory that did not
            start at a critical point
    """
    if len(traj) == 1 and traj.converged:
        return 0.0
    if len(traj) < 2:
        raise InputError("Dissipation needs at least two samples", parameter="traj")

    worst = 0.0
    for i in range(len(traj) - 1):
        t0, t1 = float(traj.times[i]), float(traj.times[i + 1])
        dt = t1 - t0
        slope = (traj.values[i + 1] - traj.values[i]) / dt
        if traj.dense is not None:
            nodes = 0.5 * (t0 + t1) + 0.5 * dt * _GAUSS_NODES
            states = traj.dense(nodes)[: field.dimension].T
            sq = np.array([np.dot(g, g) for g in (field._gradient(x) for x in states)])
            mean_sq = 0.5 * float(np.dot(_GAUSS_WEIGHTS, sq))
        else:
            mid = 0.5 * (traj.points[i] + traj.points[i + 1])
            g = field._gradient(mid)
            mean_sq = float(np.dot(g, g))
        worst = max(worst, abs(slope + mean_sq))
    return worst


def tail_arc_length(traj: Trajectory, t: float) -> float:
    """
    Arc length of the trajectory after time t.

    Numerical stand-in for the length of the flow line on [t, infinity),
    exact up to the part beyond the stopping time.

    Raises:
        InputError: The trajectory did not converge, or t is outside its range
    """
    if not traj.converged:
        raise InputError(
            f"Tail length needs a converged trajectory (stop reason {traj.stop_reason})",
            parameter="traj",
        )
    return max(traj.total_length - traj.arc_length_at(t), 0.0)
