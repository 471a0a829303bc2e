"""
Tests for Monte Carlo surveys over many flow lines.
"""

import pytest
import os
import sys

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from morselab.critical import convergence_survey, enter_once_check, length_survey, near_blocks
from morselab.fields import create_field
from morselab.flow import integrate_flow


@pytest.fixture(scope="module")
def torus_starts():
    rng = np.random.default_rng(7)
    return rng.uniform(0.0, 2 * np.pi, size=(20, 2))


class TestConvergenceSurvey:
    """Tests for convergence_survey."""

    def test_torus_flows_reach_minimum(self, torus_starts):
        field = create_field("torus_height")
        survey = convergence_survey(field, torus_starts, [[np.pi, np.pi]], max_workers=2)
        assert survey.total == 20
        assert survey.to_minimum == 20
        assert survey.fraction == 1.0
        assert survey.failures == 0
        assert len(survey.endpoints) == 20

    def test_escaping_flows_are_unconverged(self):
        field = create_field("linear")
        survey = convergence_survey(field, [[0.0, 0.0], [1.0, 1.0]], [[0.0, 0.0]])
        assert survey.to_minimum == 0
        assert survey.unconverged == 2
        assert survey.fraction == 0.0

    def test_empty_survey(self):
        survey = convergence_survey(create_field("quadratic"), [], [[0.0, 0.0]])
        assert survey.fraction == 0.0


class TestEnterOnce:
    """Tests for near_blocks and enter_once_check."""

    def test_flow_enters_ball_once(self):
        field = create_field("quadratic")
        traj = integrate_flow(field, [1.0, 1.0])
        blocks = near_blocks(traj, [0.0, 0.0], 0.1)
        assert len(blocks) == 1
        assert blocks[0].stop == len(traj)
        assert enter_once_check(traj, [[0.0, 0.0], [5.0, 5.0]], radius=0.1) == {0: True, 1: True}

    def test_torus_distance_used(self, torus_starts):
        field = create_field("torus_height")
        traj = integrate_flow(field, torus_starts[0])
        result = enter_once_check(traj, [[np.pi, np.pi], [0.0, np.pi], [np.pi, 0.0]], radius=0.1, field=field)
        assert all(result.values())


class TestLengthSurvey:
    """Tests for length_survey."""

    def test_torus_lengths_bounded(self, torus_starts):
        field = create_field("torus_height")
        survey = length_survey(field, torus_starts, bound=2 * np.pi)
        assert len(survey.lengths) == 20
        assert survey.bounded
        assert 0.0 < survey.max_length <= 2 * np.pi

    def test_no_converged_flows(self):
        survey = length_survey(create_field("linear"), [[0.0, 0.0]])
        assert not survey.bounded
        assert survey.max_length == 0.0
