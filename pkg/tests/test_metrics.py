import json
import math
import os
import tempfile
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from flock_sa.core import SimParams
from flock_sa.exporters import write_trajectory_jsonl
from flock_sa.metrics import episode_cost, velocity_variance_term
from flock_sa.sim import run_episode

velocity_arrays = arrays(
    np.float64,
    st.tuples(st.integers(min_value=1, max_value=40), st.just(2)),
    elements=st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False),
)
shifts = st.tuples(
    st.floats(min_value=-100.0, max_value=100.0, allow_nan=False, allow_infinity=False),
    st.floats(min_value=-100.0, max_value=100.0, allow_nan=False, allow_infinity=False),
)


class TestVelocityVarianceTerm(unittest.TestCase):

    def test_equal_velocities(self):
        self.assertEqual(velocity_variance_term(np.tile([1.5, -0.5], (7, 1))), 0.0)

    def test_symmetric_pair(self):
        self.assertAlmostEqual(velocity_variance_term(np.array([[1.0, 0.0], [-1.0, 0.0]])), 1.0, delta=1e-12)

    def test_four_unit_directions(self):
        v = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
        self.assertAlmostEqual(velocity_variance_term(v), 1.0, delta=1e-12)

    @settings(max_examples=200, deadline=None, derandomize=True)
    @given(data=st.data(), velocities=velocity_arrays, shift=shifts)
    def test_translation_and_permutation_invariance(self, data, velocities, shift):
        base = velocity_variance_term(velocities)
        tolerance = 1e-9 * max(1.0, base)
        self.assertAlmostEqual(velocity_variance_term(velocities + np.array(shift)), base, delta=tolerance)
        order = data.draw(st.permutations(range(velocities.shape[0])))
        self.assertAlmostEqual(velocity_variance_term(velocities[list(order)]), base, delta=tolerance)


class TestEpisodeCost(unittest.TestCase):

    def test_resting_episode_costs_nothing(self):
        record = run_episode(SimParams(n_agents=5, v_max=0.0, n_steps=10), 'none')
        self.assertEqual(episode_cost(record).total_cost, 0.0)

    def test_single_step_episode(self):
        record = run_episode(SimParams(n_agents=8, v_max=2.0, n_steps=1, seed=4), 'local')
        summary = episode_cost(record)
        self.assertEqual(summary.total_cost, record.per_step_cost_terms[0])
        self.assertEqual(summary.initial_step_cost, summary.final_step_cost)

    def test_summary_fields(self):
        record = run_episode(SimParams(n_agents=15, v_max=1.0, n_steps=30, seed=2), 'local')
        summary = episode_cost(record)
        self.assertEqual(summary.initial_step_cost, record.per_step_cost_terms[0])
        self.assertEqual(summary.final_step_cost, record.per_step_cost_terms[-1])
        self.assertEqual((summary.isolated_at_end, summary.components_at_end), record.connectivity_history[-1])
        self.assertGreaterEqual(summary.total_cost, 0.0)

    def test_total_matches_trajectory_dump(self):
        record = run_episode(SimParams(n_agents=12, v_max=2.5, n_steps=60, seed=6), 'local', keep_trajectory=True)
        with tempfile.TemporaryDirectory() as temp_dir:
            path = os.path.join(temp_dir, 'trajectory.jsonl')
            write_trajectory_jsonl(record, path)
            with open(path, 'r', encoding='utf-8') as f:
                frames = [json.loads(line) for line in f]

        self.assertEqual(len(frames), 60)
        recomputed = math.fsum(velocity_variance_term(np.array(frame['velocities'])) for frame in frames)
        self.assertAlmostEqual(episode_cost(record).total_cost, recomputed, places=12)
        self.assertEqual(
            set(frames[0]),
            {'step', 'positions', 'velocities', 'cost_term', 'isolated_count', 'component_count'},
        )


if __name__ == '__main__':
    unittest.main()
