import unittest

import numpy as np

from flock_sa.controller_strategies import ControllerRegistry, ControllerStrategy
from flock_sa.core import (
    CoincidentAgentsError,
    ControlAction,
    LengthMismatchError,
    NonFiniteActionError,
    NonFiniteStateError,
    SimParams,
    SimulationError,
    SwarmState,
    init_swarm,
)
from flock_sa.graph import build_graph, connectivity
from flock_sa.sim import default_score_steps, run_episode, step


class FailingController(ControllerStrategy):
    """Raises on a chosen step to check error reporting."""

    def __init__(self, fail_at: int):
        super().__init__('failing')
        self.fail_at = fail_at

    def compute(self, state, graph):
        if state.step_index == self.fail_at:
            raise CoincidentAgentsError("agents 0 and 1 coincide")
        return ControlAction.zeros(state.n_agents)


class TestStep(unittest.TestCase):

    def test_ballistic(self):
        state = SwarmState([[0.0, 0.0]], [[1.0, 0.0]])
        nxt = step(state, ControlAction.zeros(1), 0.01)
        self.assertEqual(nxt.positions.tolist(), [[0.01, 0.0]])
        self.assertEqual(nxt.velocities.tolist(), [[1.0, 0.0]])
        self.assertEqual(nxt.step_index, 1)

    def test_constant_acceleration(self):
        state = SwarmState([[0.0, 0.0]], [[0.0, 0.0]])
        nxt = step(state, ControlAction([[2.0, 0.0]]), 0.5)
        self.assertEqual(nxt.positions.tolist(), [[0.25, 0.0]])
        self.assertEqual(nxt.velocities.tolist(), [[1.0, 0.0]])

    def test_two_half_steps_equal_one_step(self):
        rng = np.random.default_rng(4)
        state = SwarmState(rng.normal(size=(10, 2)), rng.normal(size=(10, 2)))
        action = ControlAction(rng.normal(size=(10, 2)))
        full = step(state, action, 0.2)
        halves = step(step(state, action, 0.1), action, 0.1)
        np.testing.assert_allclose(halves.positions, full.positions, rtol=1e-13, atol=1e-14)
        np.testing.assert_allclose(halves.velocities, full.velocities, rtol=1e-13, atol=1e-14)

    def test_non_finite_action(self):
        state = SwarmState([[0.0, 0.0], [1.0, 1.0]], np.zeros((2, 2)))
        with self.assertRaises(NonFiniteActionError):
            step(state, ControlAction([[0.0, 0.0], [np.inf, 0.0]]), 0.01)

    def test_length_mismatch(self):
        state = SwarmState([[0.0, 0.0], [1.0, 1.0]], np.zeros((2, 2)))
        with self.assertRaises(LengthMismatchError):
            step(state, ControlAction.zeros(3), 0.01)


class TestRunEpisode(unittest.TestCase):

    def setUp(self):
        self.params = SimParams(n_agents=20, comm_radius=1.5, v_max=2.0, n_steps=40, seed=9)

    def tearDown(self):
        ControllerRegistry.unregister('failing')

    def test_record_shape(self):
        record = run_episode(self.params, 'local')
        self.assertEqual(len(record.per_step_cost_terms), 40)
        self.assertTrue(all(term >= 0.0 for term in record.per_step_cost_terms))
        self.assertEqual(len(record.connectivity_history), 40)
        self.assertEqual(record.final_state.step_index, 40)
        self.assertEqual([s.step for s in record.score_history], [0, 20, 39])
        self.assertEqual(record.initial_state_hash, init_swarm(self.params).state_hash())

    def test_default_score_steps(self):
        self.assertEqual(default_score_steps(10), [0, 5, 9])
        self.assertEqual(default_score_steps(1), [0])

    def test_full_scores_and_trajectory(self):
        record = run_episode(self.params, 'global', full_scores=True, keep_trajectory=True)
        self.assertEqual(len(record.score_history), 40)
        self.assertEqual([f.step for f in record.trajectory], list(range(1, 41)))
        self.assertEqual(record.trajectory[-1].cost_term, record.per_step_cost_terms[-1])

    def test_same_seed_same_record(self):
        for controller in ('local', 'global', 'none'):
            self.assertEqual(run_episode(self.params, controller), run_episode(self.params, controller))

    def test_resting_swarm_stays_at_rest(self):
        params = SimParams(n_agents=10, v_max=0.0, n_steps=25, seed=1)
        record = run_episode(params, 'none')
        self.assertEqual(record.per_step_cost_terms, tuple([0.0] * 25))
        self.assertEqual(record.final_state.positions.tolist(), init_swarm(params).positions.tolist())

    def test_auxiliary_has_no_effect_on_uniform_velocity(self):
        params = SimParams(n_agents=10, v_max=0.0, n_steps=25, seed=1, aux_enabled=True)
        with_aux = run_episode(params, 'none')
        without_aux = run_episode(SimParams(n_agents=10, v_max=0.0, n_steps=25, seed=1, aux_enabled=False), 'none')
        self.assertEqual(with_aux.per_step_cost_terms, without_aux.per_step_cost_terms)
        self.assertEqual(with_aux.final_state, without_aux.final_state)

    def test_ballistic_momentum_conserved(self):
        params = SimParams(n_agents=30, v_max=3.0, n_steps=50, seed=12, aux_enabled=False)
        record = run_episode(params, 'none')
        initial = init_swarm(params).velocities
        self.assertTrue(np.array_equal(record.final_state.velocities.sum(axis=0), initial.sum(axis=0)))

    def test_auxiliary_changes_local_run(self):
        on = run_episode(self.params, 'local')
        off = run_episode(SimParams(**{**self.params.to_dict(), 'aux_enabled': False}), 'local')
        self.assertEqual(on.initial_state_hash, off.initial_state_hash)
        self.assertNotEqual(on.per_step_cost_terms, off.per_step_cost_terms)

    def test_error_reports_step(self):
        ControllerRegistry.register(FailingController(fail_at=3))
        with self.assertRaises(SimulationError) as ctx:
            run_episode(self.params, 'failing')
        self.assertEqual(ctx.exception.step_index, 3)
        self.assertIn('step 3', str(ctx.exception))
        self.assertIsInstance(ctx.exception.__cause__, CoincidentAgentsError)

    def test_divergence_reports_step(self):
        params = SimParams(n_agents=5, sampling_time=10.0, n_steps=400, aux_enabled=False)
        with self.assertRaises(SimulationError) as ctx:
            run_episode(params, 'global')
        self.assertLess(ctx.exception.step_index, 400)
        self.assertIsInstance(ctx.exception.__cause__, (NonFiniteStateError, NonFiniteActionError))

    def test_frame_connectivity_comes_from_previous_state(self):
        record = run_episode(self.params, 'local', keep_trajectory=True)
        for n, frame in enumerate(record.trajectory):
            self.assertEqual(frame.step, n + 1)
            self.assertEqual((frame.isolated_count, frame.component_count), record.connectivity_history[n])
        first = init_swarm(self.params)
        self.assertEqual(
            (record.trajectory[0].isolated_count, record.trajectory[0].component_count),
            connectivity(build_graph(first, self.params.comm_radius)),
        )

    def test_unknown_controller(self):
        with self.assertRaises(ValueError):
            run_episode(self.params, 'dagnn')


if __name__ == '__main__':
    unittest.main()
