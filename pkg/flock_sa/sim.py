"""
Discrete-time episode engine.

Control is held constant over each sampling interval, so the double
integrator is advanced with its exact closed form:

    p' = p + v*T + 0.5*u*T^2
    v' = v + u*T

Per step the pipeline is: graph -> scores -> base action -> auxiliary action
-> compose -> record connectivity -> integrate -> record cost of the new state.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from flock_sa.confscore import ConfScores, assistant_acceleration, compute_confscores
from flock_sa.controller_strategies import ControllerRegistry, compose
from flock_sa.core import (
    ControlAction,
    FlockSaError,
    LengthMismatchError,
    NonFiniteActionError,
    SimParams,
    SimulationError,
    SwarmState,
    init_swarm,
)
from flock_sa.graph import build_graph, connectivity
from flock_sa.metrics import velocity_variance_term

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ScoreSample:
    step: int
    positions: np.ndarray
    scores: ConfScores


@dataclass(frozen=True, eq=False)
class TrajectoryFrame:
    """One integrated step.

    ``positions``, ``velocities`` and ``cost_term`` describe the state after
    integration (index ``step``). ``isolated_count`` and ``component_count``
    describe the graph the action was computed on, i.e. the state at
    ``step - 1``.
    """
    step: int
    positions: np.ndarray
    velocities: np.ndarray
    cost_term: float
    isolated_count: int
    component_count: int


@dataclass(frozen=True, eq=False)
class EpisodeRecord:
    params: SimParams
    controller_name: str
    initial_state_hash: str
    per_step_cost_terms: Tuple[float, ...]
    final_state: SwarmState
    score_history: Tuple[ScoreSample, ...] = ()
    connectivity_history: Tuple[Tuple[int, int], ...] = ()
    trajectory: Tuple[TrajectoryFrame, ...] = field(default=())

    def __eq__(self, other) -> bool:
        if not isinstance(other, EpisodeRecord):
            return NotImplemented
        return (
            self.params == other.params
            and self.controller_name == other.controller_name
            and self.initial_state_hash == other.initial_state_hash
            and self.per_step_cost_terms == other.per_step_cost_terms
            and self.final_state == other.final_state
            and self.connectivity_history == other.connectivity_history
            and len(self.score_history) == len(other.score_history)
            and all(
                a.step == b.step
                and np.array_equal(a.positions, b.positions)
                and np.array_equal(a.scores.scores, b.scores.scores)
                for a, b in zip(self.score_history, other.score_history)
            )
        )


def step(state: SwarmState, action: ControlAction, sampling_time: float) -> SwarmState:
    if len(action) != state.n_agents:
        raise LengthMismatchError(
            f"Action has {len(action)} rows but the swarm has {state.n_agents} agents"
        )
    if sampling_time <= 0:
        raise ValueError("sampling_time must be positive")
    u = action.accels
    if not np.all(np.isfinite(u)):
        bad = np.flatnonzero(~np.all(np.isfinite(u), axis=1))
        raise NonFiniteActionError(f"Non-finite acceleration for agents {bad.tolist()}")
    t = sampling_time
    positions = state.positions + state.velocities * t + 0.5 * u * (t * t)
    velocities = state.velocities + u * t
    return SwarmState(positions, velocities, state.step_index + 1)


def default_score_steps(n_steps: int) -> List[int]:
    return sorted({0, n_steps // 2, n_steps - 1})


def run_episode(params: SimParams, controller_name: str, *, full_scores: bool = False,
                keep_trajectory: bool = False, graph_method: str = "grid") -> EpisodeRecord:
    """
    Roll out one episode of ``params.n_steps`` steps.

    Args:
        params: Simulation parameters (seed included).
        controller_name: Registered base controller ("local", "global", "none").
        full_scores: Sample ConfScores at every step instead of {0, mid, last}.
        keep_trajectory: Store one frame per integrated step for the JSONL dump.
        graph_method: "grid" or "bruteforce" neighbour search.

    Returns:
        EpisodeRecord; identical params give an identical record.
    """
    controller = ControllerRegistry.get(controller_name)
    lam = params.effective_lambda()
    score_steps = set(range(params.n_steps)) if full_scores else set(default_score_steps(params.n_steps))

    state = init_swarm(params)
    initial_hash = state.state_hash()
    logger.info(
        f"Episode start: controller={controller.name} N={params.n_agents} R={params.comm_radius} "
        f"V={params.v_max} k={params.top_k} lambda={lam:.6g} aux={params.aux_enabled} "
        f"seed={params.seed} init_hash={initial_hash[:12]}"
    )

    cost_terms = []
    connectivity_history = []
    score_history = []
    trajectory = []

    for n in range(params.n_steps):
        try:
            graph = build_graph(state, params.comm_radius, graph_method)
            scores = None
            if params.aux_enabled or n in score_steps:
                scores = compute_confscores(state, graph)
            action = controller.compute(state, graph)
            if params.aux_enabled:
                aux = assistant_acceleration(state, graph, scores, params.top_k, lam)
                action = compose(action, aux)
            isolated, components = connectivity(graph)
            next_state = step(state, action, params.sampling_time)
        except FlockSaError as e:
            logger.error(f"Episode failed at step {n}: {e}")
            raise SimulationError(n, str(e)) from e

        if n in score_steps:
            score_history.append(ScoreSample(n, state.positions, scores))
        connectivity_history.append((isolated, components))

        state = next_state
        term = velocity_variance_term(state)
        cost_terms.append(term)
        if keep_trajectory:
            trajectory.append(TrajectoryFrame(
                state.step_index, state.positions, state.velocities, term, isolated, components
            ))

    logger.info(f"Episode done: total cost {sum(cost_terms):.6g}, final term {cost_terms[-1]:.6g}")
    return EpisodeRecord(
        params=params,
        controller_name=controller.name,
        initial_state_hash=initial_hash,
        per_step_cost_terms=tuple(cost_terms),
        final_state=state,
        score_history=tuple(score_history),
        connectivity_history=tuple(connectivity_history),
        trajectory=tuple(trajectory),
    )
