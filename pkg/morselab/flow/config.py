"""
Integrator settings.
"""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class IntegratorConfig(BaseModel):
    """
    Settings for `integrate_flow`.

    The flow stops at the first time the gradient norm drops below
    `grad_threshold`, when |x| exceeds `escape_norm`, or at `t_max`.

    Example:
        >>> cfg = IntegratorConfig(rel_tol=1e-9, t_max=50.0)
        >>> cfg.grad_threshold
        1e-08
    """

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    rel_tol: float = Field(default=1e-10, gt=0, description="Relative tolerance of the RK pair")
    abs_tol: float = Field(default=1e-12, gt=0, description="Absolute tolerance of the RK pair")
    max_step: float = Field(default=100.0, gt=0, description="Largest time step, also the sample spacing bound")
    t_max: float = Field(default=1e6, gt=0, description="Integration horizon")
    stop_grad_norm: float = Field(default=1e-8, gt=0, description="Stop once |grad f| falls below")
    stop_value_delta: float = Field(
        default=0.0, ge=0, description="Stop once the decay rate |grad f|^2 of f falls below"
    )
    escape_norm: float = Field(default=1e6, gt=0, description="Stop once |x| exceeds (recorded as horizon_reached)")
    method: Literal["DOP853", "RK45"] = Field(default="DOP853", description="Embedded Runge-Kutta pair")

    @property
    def grad_threshold(self) -> float:
        """Gradient norm below which the flow counts as converged."""
        return max(self.stop_grad_norm, float(np.sqrt(self.stop_value_delta)))

    def tightened(self, factor: float) -> "IntegratorConfig":
        """Copy with both tolerances divided by `factor`."""
        return self.model_copy(
            update={"rel_tol": self.rel_tol / factor, "abs_tol": self.abs_tol / factor}
        )

    def with_horizon(self, t_max: float) -> "IntegratorConfig":
        return self.model_copy(update={"t_max": t_max})
