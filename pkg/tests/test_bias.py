"""
Tests for normal bias and secant limits near critical manifolds.
"""

import pytest
import os
import sys

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from morselab.analysis import normal_bias, secant_limit
from morselab.exceptions import InputError, InsufficientDataError
from morselab.fields import create_field
from morselab.flow import IntegratorConfig, integrate_flow
from morselab.manifolds import AxisLine, UnitCircle

Z_AXIS = AxisLine(2, 1)


@pytest.fixture(scope="module")
def warped():
    """(1 + z^2) y^2 from (0.5, 0.5); z drifts while y decays."""
    field = create_field("warped_bott")
    traj = integrate_flow(field, [0.5, 0.5])
    return field, traj, Z_AXIS.project(traj.endpoint)


class TestNormalBias:
    """Tests for normal_bias."""

    def test_warped_ratio_bounded(self, warped):
        field, traj, p = warped
        report = normal_bias(traj, Z_AXIS, p)
        assert report.ratios.size > 0
        assert np.isfinite(report.tail_sup)
        assert report.tail_sup < 1.0

    def test_trough_has_no_tangential_drift(self):
        field = create_field("trough")
        traj = integrate_flow(field, [1.0, 0.3])
        report = normal_bias(traj, Z_AXIS, [0.0, 0.3])
        assert report.tail_sup == 0.0
        assert report.relative_change(report) == 0.0

    def test_circle_ratio_small(self):
        field = create_field("circle_well")
        traj = integrate_flow(field, [1.05, 0.0])
        report = normal_bias(traj, UnitCircle(), [1.0, 0.0])
        assert report.tail_sup < 1e-6

    def test_limit_off_manifold(self, warped):
        field, traj, p = warped
        with pytest.raises(InputError):
            normal_bias(traj, Z_AXIS, [0.5, 0.5])

    def test_no_normal_displacement(self):
        field = create_field("trough")
        traj = integrate_flow(field, [0.0, 0.3])
        with pytest.raises(InsufficientDataError):
            normal_bias(traj, Z_AXIS, [0.0, 0.3])

    def test_relative_change(self, warped):
        field, traj, p = warped
        a = normal_bias(traj, Z_AXIS, p)
        b = normal_bias(integrate_flow(field, [0.5, 0.5], None), Z_AXIS, p)
        assert a.relative_change(b) == pytest.approx(0.0, abs=1e-12)

    def test_stable_across_horizons(self):
        """Truncating at t = 2 and t = 4 gives the same tail bound against one shared limit."""
        field = create_field("warped_bott")
        cfg = IntegratorConfig().tightened(100.0)
        p = Z_AXIS.project(integrate_flow(field, [0.5, 0.5], cfg).endpoint)
        short, long = (normal_bias(integrate_flow(field, [0.5, 0.5], cfg.with_horizon(t)), Z_AXIS, p) for t in (2.0, 4.0))
        assert short.limit_point.tolist() == long.limit_point.tolist()
        assert short.relative_change(long) < 0.1
        assert long.tail_sup < 1.0

    def test_to_dict(self, warped):
        field, traj, p = warped
        data = normal_bias(traj, Z_AXIS, p).to_dict()
        assert data["manifold"]["kind"] == "AxisLine"
        assert isinstance(data["bounded"], bool)


class TestSecantLimit:
    """Tests for secant_limit."""

    def test_trough_secants_are_normal(self):
        field = create_field("trough")
        traj = integrate_flow(field, [1.0, 0.3])
        report = secant_limit(traj, Z_AXIS, [0.0, 0.3])
        np.testing.assert_allclose(report.limit_estimate, [1.0, 0.0])
        assert report.tangent_angle == pytest.approx(np.pi / 2)
        assert report.tail_spread == pytest.approx(0.0, abs=1e-7)

    def test_warped_secant_approaches_normal(self, warped):
        field, traj, p = warped
        report = secant_limit(traj, Z_AXIS, p)
        assert report.tangent_angle > 1.4
        assert set(report.to_dict()) == {"limit_estimate", "tangent_angle", "tail_spread", "samples"}

    def test_constant_trajectory(self):
        field = create_field("trough")
        traj = integrate_flow(field, [0.0, 0.3])
        with pytest.raises(InsufficientDataError):
            secant_limit(traj, Z_AXIS, [0.0, 0.3])
