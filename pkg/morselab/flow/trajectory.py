"""
Sampled gradient-flow solutions.
"""

import json
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.integrate import OdeSolution

from ..exceptions import InputError

CSV_FLOAT_FORMAT = "%.17g"


class StopReason(StrEnum):
    GRAD_NORM_MET = "grad_norm_met"
    HORIZON_REACHED = "horizon_reached"
    STEP_UNDERFLOW = "step_underflow"


def _frozen(arr: Any) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Trajectory:
    """
    Time-ordered samples of one flow line of -grad f.

    Attributes:
        times: Strictly increasing sample times, shape (m,)
        points: States, shape (m, n); torus states are unwrapped
        values: f at each sample
        grad_norms: |grad f| at each sample
        arc_lengths: Cumulative arc length, integrated with the state
        stop_reason: Why integration ended
        field_id: Id of the integrated field
        dense: Continuous interpolant of the augmented state [x, s], if any
        variable_names: Coordinate names for CSV headers
    """

    times: np.ndarray
    points: np.ndarray
    values: np.ndarray
    grad_norms: np.ndarray
    arc_lengths: np.ndarray
    stop_reason: StopReason
    field_id: str = ""
    dense: Optional[OdeSolution] = field(default=None, repr=False, compare=False)
    variable_names: Sequence[str] = ()

    def __post_init__(self) -> None:
        for name in ("times", "values", "grad_norms", "arc_lengths"):
            object.__setattr__(self, name, _frozen(getattr(self, name)).reshape(-1))
        points = _frozen(self.points)
        object.__setattr__(self, "points", points.reshape(len(self.times), -1))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    @property
    def converged(self) -> bool:
        return self.stop_reason == StopReason.GRAD_NORM_MET

    @property
    def total_length(self) -> float:
        return float(self.arc_lengths[-1])

    @property
    def samples(self) -> List[Dict[str, Any]]:
        """Samples as records (t, x, f_value, grad_norm, arc_length)."""
        return [
            {
                "t": float(t),
                "x": x.tolist(),
                "f_value": float(f),
                "grad_norm": float(g),
                "arc_length": float(s),
            }
            for t, x, f, g, s in zip(
                self.times, self.points, self.values, self.grad_norms, self.arc_lengths
            )
        ]

    def _check_time(self, t: float) -> None:
        if not np.isfinite(t) or t < self.times[0] or t > self.times[-1]:
            raise InputError(
                f"Time {t} outside the sampled range [{self.times[0]}, {self.times[-1]}]",
                parameter="t",
            )

    def augmented_at(self, t: float) -> np.ndarray:
        """Interpolated [x, arc_length] at time t."""
        self._check_time(t)
        if self.dense is not None:
            return np.asarray(self.dense(t), dtype=float)
        columns = np.column_stack([self.points, self.arc_lengths])
        return np.array([np.interp(t, self.times, col) for col in columns.T])

    def state_at(self, t: float) -> np.ndarray:
        """Interpolated state at time t (dense output when available)."""
        return self.augmented_at(t)[: self.dimension]

    def arc_length_at(self, t: float) -> float:
        return float(self.augmented_at(t)[self.dimension])

    def column_names(self) -> List[str]:
        return ["t"] + [f"x_{i + 1}" for i in range(self.dimension)] + ["f", "grad_norm", "arc_length"]

    def to_frame(self) -> pd.DataFrame:
        data = np.column_stack(
            [self.times, self.points, self.values, self.grad_norms, self.arc_lengths]
        )
        return pd.DataFrame(data, columns=self.column_names())

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Write samples as CSV with columns t, x_1..x_n, f, grad_norm, arc_length."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return path

    def summary(self) -> Dict[str, Any]:
        return {
            "field_id": self.field_id,
            "start": self.points[0].tolist(),
            "endpoint": self.endpoint.tolist(),
            "stop_reason": str(self.stop_reason),
            "t_end": self.t_end,
            "samples": len(self),
            "f_start": float(self.values[0]),
            "f_end": float(self.values[-1]),
            "grad_norm_end": float(self.grad_norms[-1]),
            "total_length": self.total_length,
        }

    def write_summary(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        return path
