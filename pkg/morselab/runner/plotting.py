"""
Static SVG plots with their raw data as CSV.

Plots are written, never shown: the Agg backend is selected at import and
SVG output carries no date and a fixed hash salt, so identical data gives
identical files.
"""

from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from pydantic import BaseModel, ConfigDict  # noqa: E402

from ..analysis.bias import BiasReport  # noqa: E402
from ..analysis.fits import AnalysisFit  # noqa: E402
from ..exceptions import InputError  # noqa: E402
from ..flow.trajectory import CSV_FLOAT_FORMAT  # noqa: E402

_RC = {"svg.hashsalt": "morselab", "svg.fonttype": "none", "font.size": 10}


class PlotStyle(BaseModel):
    """
    How a series is drawn.

    `fit_slope` and `fit_intercept` add a fitted line: a power law
    y = exp(intercept) x^slope on log-log axes, else y = slope x + intercept.
    `median_band` shades [median / 2, 2 median] around the median of y.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: str = "line"
    log_x: bool = False
    log_y: bool = False
    title: str = ""
    x_label: str = "x"
    y_label: str = "y"
    fit_slope: Optional[float] = None
    fit_intercept: Optional[float] = None
    median_band: bool = False


def _series_arrays(series: Union[pd.DataFrame, Tuple[Sequence[float], Sequence[float]]]) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(series, pd.DataFrame):
        if series.shape[1] < 2:
            raise InputError("A plot series needs two columns", parameter="series")
        x, y = series.iloc[:, 0].to_numpy(float), series.iloc[:, 1].to_numpy(float)
    else:
        x, y = (np.asarray(a, dtype=float).reshape(-1) for a in series)
    if x.size != y.size:
        raise InputError("Series columns differ in length", parameter="series")
    if x.size < 2:
        raise InputError(f"A plot series needs at least 2 points, got {x.size}", parameter="series")
    return x, y


def emit_plot_data(
    series: Union[pd.DataFrame, Tuple[Sequence[float], Sequence[float]]],
    style: PlotStyle,
    stem: Union[str, Path],
) -> Tuple[Path, Path]:
    """
    Write `<stem>.svg` and `<stem>.csv`.

    Args:
        series: (x, y) arrays or a DataFrame whose first two columns are x and y
        style: Axes, labels and overlays
        stem: Output path without suffix

    Returns:
        Paths of the SVG and the CSV

    Raises:
        InputError: Fewer than two points, or mismatched columns
    """
    x, y = _series_arrays(series)
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    csv_path = stem.with_suffix(".csv")
    svg_path = stem.with_suffix(".svg")

    pd.DataFrame({style.x_label: x, style.y_label: y}).to_csv(
        csv_path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
    )

    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        if style.kind == "scatter":
            ax.scatter(x, y, s=8, label="data")
        else:
            ax.plot(x, y, marker=".", linewidth=1.0, label="data")

        if style.fit_slope is not None and style.fit_intercept is not None:
            grid = np.geomspace(x[x > 0].min(), x.max(), 100) if style.log_x and np.any(x > 0) else np.linspace(x.min(), x.max(), 100)
            if style.log_x and style.log_y:
                fitted = np.exp(style.fit_intercept) * grid ** style.fit_slope
            else:
                fitted = style.fit_slope * grid + style.fit_intercept
            ax.plot(grid, fitted, linestyle="--", color="black", label=f"fit, slope {style.fit_slope:.4g}")

        if style.median_band:
            median = float(np.median(y))
            ax.axhline(median, color="gray", linewidth=0.8, label=f"median {median:.4g}")
            if median > 0:
                ax.axhspan(0.5 * median, 2.0 * median, color="gray", alpha=0.2)

        if style.log_x:
            ax.set_xscale("log")
        if style.log_y:
            ax.set_yscale("log")
        ax.set_xlabel(style.x_label)
        ax.set_ylabel(style.y_label)
        if style.title:
            ax.set_title(style.title)
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
        plt.close(fig)

    return svg_path, csv_path


def plot_fit(fit: AnalysisFit, stem: Union[str, Path], x_label: str, y_label: str, title: str = "") -> Tuple[Path, Path]:
    """Log-log scatter of a fit's data with the fitted power law."""
    style = PlotStyle(
        kind="scatter", log_x=True, log_y=True, title=title, x_label=x_label, y_label=y_label,
        fit_slope=fit.exponent, fit_intercept=fit.log_constant,
    )
    return emit_plot_data((np.exp(fit.xs), np.exp(fit.ys)), style, stem)


def plot_bias(report: BiasReport, stem: Union[str, Path], title: str = "") -> Tuple[Path, Path]:
    """Normal-bias ratio over time with its median band."""
    style = PlotStyle(title=title, x_label="t", y_label="bias_ratio", median_band=True)
    return emit_plot_data((report.times, report.ratios), style, stem)
