"""
Crossings of the Z-set {f - f(p) = |x - p|^(2k)} around a local minimum.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .lojasiewicz import K_MARGIN, estimate_lojasiewicz, lojasiewicz_threshold
from ..exceptions import InputError
from ..fields.base import ScalarField
from ..flow.events import Crossing, event_crossings
from ..flow.trajectory import Trajectory


@dataclass
class ZSetReport:
    """
    Attributes:
        k: Power used in the Z-set
        k_min: Smallest admissible k for the exponent estimate
        theta: Exponent the threshold was computed from
        crossings: Refined zeros of tau along the trajectory
    """
    k: int
    k_min: int
    theta: float
    crossings: List[Crossing] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.crossings)

    @property
    def rates(self) -> List[float]:
        return [c.rate for c in self.crossings]

    @property
    def transversal(self) -> bool:
        return all(c.rate < 0 for c in self.crossings)

    @property
    def passed(self) -> bool:
        return self.count <= 1 and self.transversal

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "k_min": self.k_min,
            "theta": self.theta,
            "count": self.count,
            "rates": self.rates,
            "passed": self.passed,
        }


def z_set_crossings(
    field: ScalarField,
    traj: Trajectory,
    p: Sequence[float],
    k: int,
    theta_hat: Optional[float] = None,
    f_p: Optional[float] = None,
    margin: float = K_MARGIN,
) -> ZSetReport:
    """
    Count sign changes of tau(t) = (f(gamma) - f(p)) - |gamma - p|^(2k).

    d tau / dt at each crossing is computed exactly by the chain rule; it
    must be negative.

    Args:
        field: The integrated field
        traj: Trajectory near the minimum p
        p: Local minimum
        k: Z-set power
        theta_hat: Lojasiewicz exponent at p; estimated from traj when omitted
        f_p: f(p); defaults to f evaluated at p
        margin: Added to theta_hat before computing the admissible k

    Raises:
        InputError: k below the admissible threshold (the message names it)
    """
    p = field.check_point(p)
    f_p = field.value(p) if f_p is None else float(f_p)
    if theta_hat is None:
        theta_hat = estimate_lojasiewicz(field, traj, p, f_p).exponent
    k_min = lojasiewicz_threshold(theta_hat, margin)
    if int(k) < k_min:
        raise InputError(
            f"k={k} is too small for theta={theta_hat:.4f}; the smallest admissible k is {k_min}",
            parameter="k",
        )
    power = 2 * int(k)

    def tau(x: np.ndarray) -> float:
        d = field.domain.displacement(p, x)
        return float(field._value(x) - f_p - float(np.dot(d, d)) ** (power // 2))

    def tau_gradient(x: np.ndarray) -> np.ndarray:
        d = field.domain.displacement(p, x)
        r2 = float(np.dot(d, d))
        return np.asarray(field._gradient(x), dtype=float) - power * r2 ** (power // 2 - 1) * d

    crossings = event_crossings(traj, tau, tau_gradient, field)
    return ZSetReport(k=int(k), k_min=k_min, theta=float(theta_hat), crossings=crossings)
