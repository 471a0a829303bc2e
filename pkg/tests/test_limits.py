"""
Tests for coverage of critical manifolds by flow limits.
"""

import pytest
import os
import sys

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from morselab.analysis import dense_limit_survey
from morselab.exceptions import InsufficientDataError
from morselab.fields import create_field
from morselab.manifolds import AxisLine, UnitCircle


class TestDenseLimits:
    """Tests for dense_limit_survey."""

    def test_circle_limits_fill_circle(self):
        n = 16
        angles = 2 * np.pi * np.arange(n) / n
        radii = 1.1 + 0.1 * (np.arange(n) % 5)
        starts = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
        cov = dense_limit_survey(create_field("circle_well"), UnitCircle(), starts, max_workers=2)
        assert cov.unconverged == []
        assert len(cov.limits) == n
        assert cov.nominal_spacing == pytest.approx(2 * np.pi / n)
        assert cov.parameter_gap < 2.0 * 2 * np.pi / n
        assert cov.length_fit is not None
        assert cov.length_bounded
        assert cov.length_constant == pytest.approx(2.0, rel=1e-3)
        assert np.all(cov.arc_lengths <= cov.length_constant * cov.start_distances ** cov.length_fit.exponent + 1e-12)

    def test_trough_limits_are_exact(self):
        ys = np.linspace(-1.0, 1.0, 9)
        starts = np.column_stack([np.ones(9), ys])
        cov = dense_limit_survey(create_field("trough"), AxisLine(2, 1), starts)
        assert cov.max_gap < 1e-6
        assert cov.parameter_gap is None
        # every start is at distance 1, so there is nothing to fit
        assert cov.length_fit is None
        np.testing.assert_allclose(cov.arc_lengths, 1.0, atol=1e-8)

    def test_starts_off_the_manifold_listed(self):
        """The central maximum is critical but not on the ring."""
        starts = [[1.2, 0.0], [0.0, 0.0]]
        cov = dense_limit_survey(create_field("circle_well"), UnitCircle(), starts)
        assert cov.unconverged == [1]
        assert len(cov.limits) == 1

    def test_nothing_converges(self):
        with pytest.raises(InsufficientDataError):
            dense_limit_survey(create_field("linear"), AxisLine(2, 1), [[0.0, 0.0]])

    def test_to_dict(self):
        starts = np.column_stack([np.ones(3), [-0.5, 0.0, 0.5]])
        data = dense_limit_survey(create_field("trough"), AxisLine(2, 1), starts).to_dict()
        assert data["limits"] == 3
        assert data["unconverged"] == []
