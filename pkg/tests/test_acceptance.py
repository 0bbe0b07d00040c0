"""
End-to-end behaviour of the auxiliary controller on full-length episodes.

The paired N = 100 cases take up to a minute each. The global-controller sweep
over the default radius grid only runs when FLOCK_SA_SLOW_TESTS is set.
"""

import os
import unittest
from dataclasses import replace

import numpy as np

from flock_sa.core import SimParams
from flock_sa.metrics import episode_cost
from flock_sa.sim import run_episode
from flock_sa.sweep import DEFAULT_COMM_RADIUS_VALUES, SweepSpec, run_sweep, summarize_sweep

PAIRED_SEEDS = range(10)


def _paired_means(params, controller):
    on_costs, off_costs, on_isolated, off_isolated = [], [], [], []
    for seed in PAIRED_SEEDS:
        on = episode_cost(run_episode(replace(params, seed=seed, aux_enabled=True), controller))
        off = episode_cost(run_episode(replace(params, seed=seed, aux_enabled=False), controller))
        on_costs.append(on.total_cost)
        off_costs.append(off.total_cost)
        on_isolated.append(on.isolated_at_end)
        off_isolated.append(off.isolated_at_end)
    return np.mean(on_costs), np.mean(off_costs), np.mean(on_isolated), np.mean(off_isolated)


class TestAuxiliaryImprovesLocalController(unittest.TestCase):

    def test_lower_cost_and_no_more_isolation(self):
        params = SimParams(n_agents=100, comm_radius=1.0, v_max=3.5, n_steps=500)
        cost_on, cost_off, isolated_on, isolated_off = _paired_means(params, 'local')
        self.assertLess(cost_on, cost_off)
        self.assertLessEqual(isolated_on, isolated_off)


class TestAuxiliaryImprovesGlobalController(unittest.TestCase):

    def test_lower_cost_at_two_metre_radius(self):
        params = SimParams(n_agents=100, comm_radius=2.0, v_max=3.5, n_steps=500)
        cost_on, cost_off, _, _ = _paired_means(params, 'global')
        self.assertLess(cost_on, cost_off)


class TestGlobalControllerAlignment(unittest.TestCase):

    def test_velocity_variance_collapses(self):
        params = SimParams(n_agents=20, comm_radius=100.0, v_max=1.0, n_steps=500, aux_enabled=False)
        record = run_episode(params, 'global')
        summary = episode_cost(record)
        self.assertGreater(summary.initial_step_cost, 0.0)
        self.assertLess(summary.final_step_cost, 0.01 * summary.initial_step_cost)


@unittest.skipUnless(os.environ.get('FLOCK_SA_SLOW_TESTS'), 'set FLOCK_SA_SLOW_TESTS to run')
class TestAuxiliaryHelpsGlobalController(unittest.TestCase):

    def test_majority_of_radius_grid(self):
        spec = SweepSpec(
            base=SimParams(n_agents=100, v_max=3.5, n_steps=500),
            n_agents_values=[100],
            comm_radius_values=DEFAULT_COMM_RADIUS_VALUES,
            v_max_values=[3.5],
            top_k_values=[3],
            seeds_per_cell=len(PAIRED_SEEDS),
            controllers=['global'],
        )
        summary = summarize_sweep(run_sweep(spec, max_workers=os.cpu_count() or 1))
        self.assertGreater(int(summary['aux_helps'].sum()), len(summary) // 2)


if __name__ == '__main__':
    unittest.main()
