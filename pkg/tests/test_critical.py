"""
Tests for locating and classifying critical points.
"""

import pytest
import os
import sys

import numpy as np
from scipy.stats import special_ortho_group

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from morselab.critical import (
    PointClass,
    classify,
    find_critical,
    merge_points,
    sweep_critical,
)
from morselab.exceptions import CriticalPointNotFound, InputError
from morselab.fields import ScalarField, create_field


class TestFindCritical:
    """Tests for find_critical."""

    def test_saddle(self):
        """-x^2 + y^2 has an index-1 saddle at the origin."""
        field = create_field("quad_saddle")
        cp = find_critical(field, [0.3, -0.2])
        np.testing.assert_allclose(cp.location, [0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(cp.eigenvalues, [-2.0, 2.0])
        assert cp.index == 1
        assert cp.nullity == 0
        assert cp.kind == PointClass.SADDLE
        assert cp.residual < 1e-12

    def test_minimum_of_quadratic(self):
        field = create_field("quadratic", {"coefficients": [1.0, 3.0]})
        cp = find_critical(field, [2.0, -1.0])
        assert cp.kind == PointClass.LOCAL_MIN
        assert cp.iterations >= 1

    def test_torus_wraps_location(self):
        """A seed near 2*pi converges to the maximum reported at 0."""
        field = create_field("torus_height")
        cp = find_critical(field, [2 * np.pi - 0.2, 0.1])
        assert cp.kind == PointClass.LOCAL_MAX
        assert field.domain.distance(cp.location, [0.0, 0.0]) < 1e-10
        assert np.all(cp.location >= 0.0)

    def test_no_critical_point(self):
        """A linear field has nowhere to go."""
        field = create_field("linear", {"coefficients": [1.0, 2.0]})
        with pytest.raises(CriticalPointNotFound) as exc:
            find_critical(field, [0.0, 0.0])
        assert exc.value.seed == [0.0, 0.0]

    def test_nonpositive_tolerance(self):
        field = create_field("quad_saddle")
        with pytest.raises(InputError):
            find_critical(field, [0.1, 0.1], tol=0.0)

    def test_wrong_dimension(self):
        field = create_field("quad_saddle")
        with pytest.raises(InputError):
            find_critical(field, [0.1, 0.1, 0.1])


class TestClassify:
    """Tests for classify."""

    def test_degenerate_minimum(self):
        """x^4 + y^2 on R^3 has two null directions at the origin."""
        field = create_field("x4y2")
        cp = classify(field, [0.0, 0.0, 0.0])
        assert cp.kind == PointClass.DEGENERATE
        assert cp.degenerate
        assert cp.nullity == 2
        assert cp.index == 0

    def test_circle_well_center_is_maximum(self):
        cp = classify(create_field("circle_well"), [0.0, 0.0])
        assert cp.kind == PointClass.LOCAL_MAX
        assert cp.index == 2

    def test_circle_well_ring_is_degenerate(self):
        cp = classify(create_field("circle_well"), [1.0, 0.0])
        assert cp.nullity == 1
        assert cp.kind == PointClass.DEGENERATE

    def test_to_dict(self):
        data = classify(create_field("quad_saddle"), [0.0, 0.0]).to_dict()
        assert data["class"] == "saddle"
        assert data["index"] == 1
        assert isinstance(data["location"], list)


class RotatedField(ScalarField):
    """A catalog field composed with a rotation: g(x) = f(R^T x)."""

    def __init__(self, base: ScalarField, rotation: np.ndarray):
        super().__init__(base.dimension, field_id=f"rotated_{base.field_id}")
        self.base = base
        self.rotation = rotation

    def _value(self, x):
        return self.base._value(self.rotation.T @ x)

    def _gradient(self, x):
        return self.rotation @ self.base._gradient(self.rotation.T @ x)

    def _hessian(self, x):
        return self.rotation @ self.base._hessian(self.rotation.T @ x) @ self.rotation.T


class TestRotationInvariance:
    """Index and nullity do not depend on the choice of orthonormal coordinates."""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_rotated_saddle(self, seed):
        rotation = special_ortho_group.rvs(2, random_state=seed)
        field = create_field("quadratic", {"coefficients": [-1.0, 1.0], "rotation": rotation.tolist()})
        cp = find_critical(field, [0.3, -0.2])
        reference = find_critical(create_field("quad_saddle"), [0.3, -0.2])
        np.testing.assert_allclose(cp.location, [0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(cp.eigenvalues, reference.eigenvalues, atol=1e-12)
        assert (cp.index, cp.nullity, cp.kind) == (reference.index, reference.nullity, reference.kind)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_rotated_x4y2(self, seed):
        rotation = special_ortho_group.rvs(3, random_state=seed)
        base = create_field("x4y2")
        field = RotatedField(base, rotation)
        for z in (0.0, 0.7):
            reference = classify(base, [0.0, 0.0, z])
            cp = classify(field, rotation @ np.array([0.0, 0.0, z]))
            assert (cp.index, cp.nullity, cp.kind) == (reference.index, reference.nullity, reference.kind) == (0, 2, PointClass.DEGENERATE)

        found = find_critical(field, rotation @ np.array([0.3, -0.2, 0.7]))
        assert (found.index, found.nullity) == (0, 2)
        np.testing.assert_allclose(base.gradient(rotation.T @ found.location), 0.0, atol=1e-12)
        assert (rotation.T @ found.location)[2] == pytest.approx(0.7, abs=1e-9)


class TestSweep:
    """Tests for sweep_critical and merge_points."""

    def test_torus_counts(self):
        """cos x + cos y has one maximum, two saddles and one minimum."""
        field = create_field("torus_height")
        result = sweep_critical(field, [0.0, 0.0], [2 * np.pi, 2 * np.pi], [6, 6])
        assert len(result) == 4
        assert result.counts() == {"local_max": 1, "saddle": 2, "local_min": 1}
        assert result.seeds == 36
        assert result.failures == 0
        assert sorted(cp.index for cp in result.points) == [0, 1, 1, 2]

    def test_circle_well_ring_and_center(self):
        """Every point found for (r^2 - 1)^2 lies on the unit circle or is the central maximum."""
        result = sweep_critical(create_field("circle_well"), [-2.0, -2.0], [2.0, 2.0], [8, 8])
        ring = [cp for cp in result.points if abs(np.linalg.norm(cp.location) - 1.0) < 1e-6]
        center = [cp for cp in result.points if np.linalg.norm(cp.location) < 1e-6]
        assert len(ring) + len(center) == len(result)
        assert len(center) == 1
        assert center[0].kind == PointClass.LOCAL_MAX
        assert len(ring) > 1
        assert all(cp.nullity == 1 for cp in ring)

    def test_sweep_parallel_matches_serial(self):
        field = create_field("torus_height")
        box = ([0.0, 0.0], [2 * np.pi, 2 * np.pi], [4, 4])
        serial = sweep_critical(field, *box)
        threaded = sweep_critical(field, *box, max_workers=4)
        np.testing.assert_allclose(
            [cp.location for cp in serial.points], [cp.location for cp in threaded.points]
        )

    def test_linear_sweep_records_failures(self):
        field = create_field("linear")
        result = sweep_critical(field, [-1.0, -1.0], [1.0, 1.0], [2, 2])
        assert len(result) == 0
        assert result.failures == 4

    def test_points_outside_box_dropped(self):
        field = create_field("quad_saddle")
        result = sweep_critical(field, [1.0, 1.0], [2.0, 2.0], [2, 2])
        assert len(result) == 0

    @pytest.mark.parametrize("lower,upper,grid", [
        ([0.0, 0.0], [0.0, 1.0], [2, 2]),
        ([1.0, 0.0], [0.0, 1.0], [2, 2]),
        ([0.0], [1.0], [2]),
        ([0.0, 0.0], [1.0, 1.0], [2, 0]),
    ])
    def test_bad_box(self, lower, upper, grid):
        with pytest.raises(InputError):
            sweep_critical(create_field("quad_saddle"), lower, upper, grid)

    def test_merge_points(self):
        field = create_field("quad_saddle")
        a = classify(field, [0.0, 0.0])
        b = classify(field, [1e-9, 0.0])
        c = classify(field, [0.5, 0.0])
        kept = merge_points(field, [c, b, a], radius=1e-6)
        assert len(kept) == 2
        assert kept[0] is a

    def test_merge_across_torus_seam(self):
        field = create_field("torus_height")
        a = classify(field, [1e-9, 0.0])
        b = classify(field, [2 * np.pi - 1e-9, 0.0])
        assert len(merge_points(field, [a, b], radius=1e-6)) == 1
