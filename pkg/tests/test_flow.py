"""
Tests for the flow engine, trajectories and batches.
"""

import hashlib
import pytest
import os
import sys

import numpy as np
import pandas as pd
from pydantic import ValidationError

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from morselab.exceptions import InputError, IntegrationError
from morselab.fields import ScalarField, create_field
from morselab.flow import (
    IntegratorConfig,
    StopReason,
    dissipation_residual,
    integrate_flow,
    integrate_many,
    tail_arc_length,
)


class NanField(ScalarField):
    """A field whose gradient is undefined everywhere."""

    def __init__(self):
        super().__init__(1, field_id="nan")

    def _value(self, x):
        return 0.0

    def _gradient(self, x):
        return np.array([np.nan])

    def _hessian(self, x):
        return np.zeros((1, 1))


class TestIntegratorConfig:
    """Tests for IntegratorConfig."""

    def test_defaults(self):
        """Defaults are the documented ones."""
        cfg = IntegratorConfig()
        assert cfg.rel_tol == 1e-10
        assert cfg.abs_tol == 1e-12
        assert cfg.t_max == 1e6
        assert cfg.method == "DOP853"
        assert cfg.grad_threshold == 1e-8

    @pytest.mark.parametrize("update", [{"rel_tol": 0.0}, {"abs_tol": -1.0}, {"t_max": float("nan")},
                                        {"method": "Euler"}, {"unknown": 1}])
    def test_rejected(self, update):
        """Non-positive, non-finite and unknown settings are rejected."""
        with pytest.raises(ValidationError):
            IntegratorConfig(**update)

    def test_value_delta_threshold(self):
        """A value-decay stop raises the gradient threshold to its square root."""
        assert IntegratorConfig(stop_value_delta=1e-12).grad_threshold == pytest.approx(1e-6)

    def test_copies(self):
        """tightened and with_horizon return modified copies."""
        cfg = IntegratorConfig()
        tight = cfg.tightened(10.0)
        assert tight.rel_tol == pytest.approx(1e-11)
        assert tight.abs_tol == pytest.approx(1e-13)
        assert cfg.with_horizon(5.0).t_max == 5.0
        assert cfg.t_max == 1e6


class TestIntegrateFlow:
    """Tests for integrate_flow."""

    def test_exponential_decay(self):
        """x' = -2x from 1 follows exp(-2t)."""
        traj = integrate_flow(create_field("power_well", {"k": 1}), [1.0])
        assert traj.stop_reason == StopReason.GRAD_NORM_MET
        assert traj.converged
        for t in (0.1, 0.5, 1.0, 3.0):
            assert traj.state_at(t)[0] == pytest.approx(np.exp(-2 * t), rel=1e-8)

    def test_monotone_samples(self):
        """Times increase strictly and f never increases."""
        traj = integrate_flow(create_field("torus_height"), [0.4, 2.0])
        assert np.all(np.diff(traj.times) > 0)
        assert np.all(np.diff(traj.values) <= 1e-12)
        assert np.all(np.diff(traj.arc_lengths) >= 0)

    def test_arc_length(self):
        """On a line the arc length is the distance travelled."""
        traj = integrate_flow(create_field("power_well", {"k": 1}), [1.0])
        assert traj.total_length == pytest.approx(1.0 - traj.endpoint[0], rel=1e-8)

    def test_start_at_critical_point(self):
        """A critical start gives one sample and converges immediately."""
        traj = integrate_flow(create_field("quadratic"), [0.0, 0.0])
        assert len(traj) == 1
        assert traj.converged
        assert traj.total_length == 0.0

    def test_horizon(self):
        """Stopping at t_max is reported as horizon_reached."""
        traj = integrate_flow(create_field("power_well", {"k": 2}), [1.0], IntegratorConfig(t_max=1.0))
        assert traj.stop_reason == StopReason.HORIZON_REACHED
        assert traj.t_end == pytest.approx(1.0)

    def test_escape(self):
        """Leaving the escape ball stops the flow as horizon_reached."""
        cfg = IntegratorConfig(escape_norm=10.0)
        traj = integrate_flow(create_field("quad_saddle"), [1e-3, 0.5], cfg)
        assert traj.stop_reason == StopReason.HORIZON_REACHED
        assert np.linalg.norm(traj.endpoint) == pytest.approx(10.0, rel=1e-6)
        assert traj.t_end < cfg.t_max

    def test_bad_start(self):
        """Start points are validated."""
        with pytest.raises(InputError):
            integrate_flow(create_field("quadratic"), [1.0])

    def test_non_finite_gradient(self):
        """A non-finite gradient raises IntegrationError."""
        with pytest.raises(IntegrationError) as exc:
            integrate_flow(NanField(), [1.0])
        assert exc.value.time == 0.0

    def test_closed_form_x4y2(self):
        """The degenerate x^4 + y^2 flow matches its closed form."""
        f = create_field("x4y2")
        flow = f.reference_facts().closed_form
        traj = integrate_flow(f, [1.0, 1.0, 0.0])
        x0 = np.array([1.0, 1.0, 0.0])
        for t in (0.5, 5.0, 50.0):
            exact = flow(x0, t)
            assert np.max(np.abs(traj.state_at(t) - exact)) <= 1e-6 * np.max(np.abs(exact))

    @pytest.mark.parametrize("name, x0", [("quadratic", [1.0, 0.5]), ("torus_height", [0.4, 2.0])])
    def test_tolerance_halving(self, name, x0):
        """Halving both tolerances moves the endpoint by less than ten tolerances."""
        field = create_field(name)
        cfg = IntegratorConfig(t_max=2.0)
        coarse = integrate_flow(field, x0, cfg)
        fine = integrate_flow(field, x0, cfg.tightened(2.0))
        assert coarse.stop_reason == fine.stop_reason == StopReason.HORIZON_REACHED
        scale = max(1.0, float(np.linalg.norm(coarse.endpoint)))
        assert field.domain.distance(coarse.endpoint, fine.endpoint) < 10.0 * (cfg.rel_tol * scale + cfg.abs_tol)

    @pytest.mark.parametrize("name, x0", [("quadratic", [1.0, 0.5]), ("torus_height", [0.4, 2.0])])
    def test_time_shift(self, name, x0):
        """Flowing for t1 and then t2 lands where flowing for t1 + t2 does."""
        field = create_field(name)
        cfg = IntegratorConfig()
        t1, t2 = 0.7, 1.3
        first = integrate_flow(field, x0, cfg.with_horizon(t1))
        second = integrate_flow(field, first.endpoint, cfg.with_horizon(t2))
        single = integrate_flow(field, x0, cfg.with_horizon(t1 + t2))
        assert single.stop_reason == StopReason.HORIZON_REACHED
        scale = max(1.0, float(np.linalg.norm(single.endpoint)))
        assert field.domain.distance(second.endpoint, single.endpoint) < 10.0 * (cfg.rel_tol * scale + cfg.abs_tol)


class TestDissipation:
    """Tests for the energy dissipation identity."""

    @pytest.mark.parametrize("name,x0", [("torus_height", [0.4, 2.0]), ("circle_well", [1.4, 0.3]),
                                         ("x4y2", [0.8, -0.5, 1.0])])
    def test_identity_holds(self, name, x0):
        """d/dt f = -|grad f|^2 along computed flows."""
        f = create_field(name)
        assert dissipation_residual(f, integrate_flow(f, x0)) < 1e-3

    def test_single_sample(self):
        """A trajectory resting at a critical point has zero residual."""
        f = create_field("quadratic")
        assert dissipation_residual(f, integrate_flow(f, [0.0, 0.0])) == 0.0


class TestTrajectory:
    """Tests for Trajectory accessors and artifacts."""

    @pytest.fixture
    def traj(self):
        return integrate_flow(create_field("trough"), [1.0, 0.3])

    def test_read_only(self, traj):
        """Sample arrays cannot be modified."""
        with pytest.raises(ValueError):
            traj.points[0, 0] = 5.0

    def test_state_out_of_range(self, traj):
        """Times outside the samples are rejected."""
        with pytest.raises(InputError):
            traj.state_at(-1.0)
        with pytest.raises(InputError):
            traj.state_at(traj.t_end + 1.0)

    def test_tail_length(self, traj):
        """The tail from 0 is the whole length and shrinks with t."""
        assert tail_arc_length(traj, 0.0) == pytest.approx(traj.total_length)
        assert tail_arc_length(traj, 1.0) == pytest.approx(np.exp(-2.0), rel=1e-6)

    def test_tail_length_needs_convergence(self):
        """Tail lengths of unfinished flows are refused."""
        traj = integrate_flow(create_field("trough"), [1.0, 0.3], IntegratorConfig(t_max=0.5))
        with pytest.raises(InputError):
            tail_arc_length(traj, 0.1)

    def test_csv_columns(self, traj, tmp_path):
        """CSV artifacts have the documented columns."""
        frame = pd.read_csv(traj.to_csv(tmp_path / "t.csv"))
        assert list(frame.columns) == ["t", "x_1", "x_2", "f", "grad_norm", "arc_length"]
        assert len(frame) == len(traj)
        assert np.array_equal(frame["t"].to_numpy(), traj.times)

    def test_csv_deterministic(self, tmp_path):
        """Identical runs write byte-identical CSV files."""
        f = create_field("torus_height")
        digests = [
            hashlib.sha256(integrate_flow(f, [1.0, 2.5]).to_csv(tmp_path / f"{i}.csv").read_bytes()).hexdigest()
            for i in range(2)
        ]
        assert digests[0] == digests[1]

    def test_summary(self, traj):
        """summary reports the stop reason and endpoints."""
        s = traj.summary()
        assert s["stop_reason"] == "grad_norm_met"
        assert s["samples"] == len(traj)
        assert s["field_id"] == "trough"


class TestIntegrateMany:
    """Tests for batches."""

    def test_order_and_parallel(self):
        """Batches keep start order, serial and threaded alike."""
        f = create_field("torus_height")
        starts = np.random.default_rng(1).uniform(0, 2 * np.pi, size=(8, 2))
        serial = integrate_many(f, starts)
        threaded = integrate_many(f, starts, max_workers=4)
        assert len(serial) == len(threaded) == 8
        for a, b, x0 in zip(serial.trajectories, threaded.trajectories, starts):
            assert np.array_equal(a.points[0], x0)
            assert np.array_equal(a.points, b.points)

    def test_errors_collected(self):
        """Failing starts are recorded, the rest still run."""
        batch = integrate_many(create_field("quadratic"), [[1.0, 0.0], [1.0], [0.0, 1.0]])
        assert batch.failure_count == 1
        assert isinstance(batch.errors[1], InputError)
        assert batch.trajectories[1] is None
        assert len(batch.succeeded) == 2
