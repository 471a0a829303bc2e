"""
Tests for SVG plots and their CSV data.
"""

import pytest
import os
import sys

import numpy as np
import pandas as pd
from pydantic import ValidationError

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from morselab.exceptions import InputError
from morselab.runner import PlotStyle, emit_plot_data
from morselab.runner.plotting import plot_fit
from morselab.analysis.fits import fit_power_law


class TestEmitPlotData:
    """Tests for emit_plot_data."""

    def test_writes_svg_and_csv(self, tmp_path):
        svg, csv = emit_plot_data(([0.0, 1.0, 2.0], [1.0, 0.5, 0.25]), PlotStyle(x_label="t", y_label="f"),
                                  tmp_path / "plots" / "decay")
        assert svg.suffix == ".svg" and svg.is_file()
        assert csv.suffix == ".csv" and csv.is_file()
        frame = pd.read_csv(csv)
        assert list(frame.columns) == ["t", "f"]
        np.testing.assert_allclose(frame["f"], [1.0, 0.5, 0.25])

    def test_deterministic(self, tmp_path):
        style = PlotStyle(kind="scatter", log_x=True, log_y=True, fit_slope=2.0, fit_intercept=0.0, title="fit")
        data = (np.geomspace(1e-3, 1.0, 10), np.geomspace(1e-6, 1.0, 10))
        first = emit_plot_data(data, style, tmp_path / "one")
        second = emit_plot_data(data, style, tmp_path / "two")
        assert first[0].read_bytes() == second[0].read_bytes()
        assert first[1].read_bytes() == second[1].read_bytes()

    def test_dataframe_series(self, tmp_path):
        frame = pd.DataFrame({"t": [0.0, 1.0], "ratio": [0.2, 0.3]})
        svg, _ = emit_plot_data(frame, PlotStyle(median_band=True), tmp_path / "bias")
        assert svg.read_text().lstrip().startswith("<?xml")

    @pytest.mark.parametrize("series", [
        ([1.0], [2.0]),
        ([1.0, 2.0], [1.0]),
        pd.DataFrame({"x": [1.0, 2.0]}),
    ])
    def test_bad_series(self, tmp_path, series):
        with pytest.raises(InputError):
            emit_plot_data(series, PlotStyle(), tmp_path / "bad")

    def test_style_forbids_unknown_options(self):
        with pytest.raises(ValidationError):
            PlotStyle(colour="red")


class TestPlotFit:
    """Tests for plot_fit."""

    def test_fit_data_recovered(self, tmp_path):
        xs = np.geomspace(1e-4, 1.0, 12)
        fit = fit_power_law(xs, 3.0 * xs ** 0.5, (0, 12))
        svg, csv = plot_fit(fit, tmp_path / "fit", "gap", "grad")
        frame = pd.read_csv(csv)
        np.testing.assert_allclose(frame["gap"], xs, rtol=1e-12)
        assert svg.is_file()
