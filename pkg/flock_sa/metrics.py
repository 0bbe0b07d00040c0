import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Any, Dict, Union

import numpy as np

from flock_sa.core import SwarmState

if TYPE_CHECKING:
    from flock_sa.sim import EpisodeRecord


@dataclass(frozen=True)
class CostSummary:
    total_cost: float
    initial_step_cost: float
    final_step_cost: float
    isolated_at_end: int
    components_at_end: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def velocity_variance_term(state: Union[SwarmState, np.ndarray]) -> float:
    """(1/N) * sum_j |v_j - mean(v)|^2 for one step.

    Accepts a SwarmState or an (N, 2) velocity array.
    """
    v = state.velocities if isinstance(state, SwarmState) else np.asarray(state, dtype=np.float64)
    if v.shape[0] < 1:
        raise ValueError("velocity_variance_term needs at least one agent")
    dev = v - v.mean(axis=0)
    return float(np.sum(dev[:, 0] * dev[:, 0] + dev[:, 1] * dev[:, 1]) / v.shape[0])


def episode_cost(record: "EpisodeRecord") -> CostSummary:
    """Summed cost over the recorded steps plus end-of-episode connectivity."""
    terms = record.per_step_cost_terms
    isolated, components = record.connectivity_history[-1]
    return CostSummary(
        total_cost=math.fsum(terms),
        initial_step_cost=terms[0],
        final_step_cost=terms[-1],
        isolated_at_end=isolated,
        components_at_end=components,
    )
