"""
Least-squares fits shared by the analyses.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from ..exceptions import InsufficientDataError

MIN_SAMPLES = 8


@dataclass(frozen=True)
class AnalysisFit:
    """
    A straight-line fit y = exponent * x + log_constant, usually in log-log space.

    Attributes:
        exponent: Fitted slope (theta, alpha or beta)
        log_constant: Fitted intercept
        residual: Root-mean-square residual of the fit
        window: Half-open range of trajectory sample indices used
        sample_count: Number of samples that entered the fit
        checks: Named pass/fail results attached by the analysis
        details: Extra measured values for reports
    """

    exponent: float
    log_constant: float
    residual: float
    window: Tuple[int, int]
    sample_count: int
    checks: Dict[str, bool] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)
    xs: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False, compare=False)
    ys: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False, compare=False)

    @property
    def constant(self) -> float:
        return float(np.exp(self.log_constant))

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def predict(self, x: Any) -> np.ndarray:
        return self.exponent * np.asarray(x, dtype=float) + self.log_constant

    def to_dict(self) -> Dict[str, Any]:
        return {
            "exponent": self.exponent,
            "log_constant": self.log_constant,
            "residual": self.residual,
            "window": list(self.window),
            "sample_count": self.sample_count,
            "checks": dict(self.checks),
            "details": dict(self.details),
        }


def fit_line(
    xs: Sequence[float],
    ys: Sequence[float],
    window: Tuple[int, int],
    min_samples: int = MIN_SAMPLES,
) -> AnalysisFit:
    """
    Ordinary least squares of ys against xs.

    Raises:
        InsufficientDataError: Fewer than `min_samples` points, or no spread in xs
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < min_samples:
        raise InsufficientDataError(available=int(x.size), required=min_samples)
    if np.ptp(x) == 0.0:
        raise InsufficientDataError("Fit abscissae do not vary", available=int(x.size), required=min_samples)
    result = linregress(x, y)
    resid = y - (result.slope * x + result.intercept)
    return AnalysisFit(
        exponent=float(result.slope),
        log_constant=float(result.intercept),
        residual=float(np.sqrt(np.mean(resid ** 2))),
        window=(int(window[0]), int(window[1])),
        sample_count=int(x.size),
        xs=x,
        ys=y,
    )


def fit_power_law(
    xs: Sequence[float],
    ys: Sequence[float],
    window: Tuple[int, int],
    min_samples: int = MIN_SAMPLES,
) -> AnalysisFit:
    """Fit y = C x^a by regressing log y on log x. Inputs must be positive."""
    return fit_line(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float)), window, min_samples)


def tail_indices(mask: np.ndarray, fraction: float) -> np.ndarray:
    """Indices of the last `fraction` of the True entries of mask."""
    idx = np.flatnonzero(mask)
    keep = int(np.ceil(fraction * idx.size))
    return idx[idx.size - keep:] if keep else idx[:0]


def bound_violation(
    fit: AnalysisFit,
    xs: Sequence[float],
    ys: Sequence[float],
    factor: float,
    lower: bool = True,
) -> Tuple[float, float]:
    """
    Scale a power-law fit's constant by `factor` and measure how far ys cross the bound.

    With `lower=True` the bound is ys >= factor * C * xs^a, otherwise
    ys <= factor * C * xs^a. The violation is relative to the bound.

    Returns:
        (factor * C, worst relative violation, 0 when the bound holds everywhere)
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    c = factor * fit.constant
    envelope = c * x ** fit.exponent
    excess = envelope - y if lower else y - envelope
    return c, max(0.0, float(np.max(excess / envelope)))
