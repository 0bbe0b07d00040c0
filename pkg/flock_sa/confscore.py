"""
ConfScores and the assistant acceleration built from them.

C_i sums the cosine similarity between agent i's velocity and each
neighbour's velocity. Each agent then follows the neighbours that rank in its
top-k by score and score strictly higher than itself:

    u_bar_i = mean over leaders j of  lambda * (C_j - C_i) * (v_j - v_i)

Per-agent sums are accumulated in ascending neighbour index order so results
do not depend on how the work is vectorised.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from flock_sa.core import ControlAction, SwarmState, default_lambda  # noqa: F401 (re-export)
from flock_sa.graph import NeighborGraph

logger = logging.getLogger(__name__)

# Velocities slower than this (m/s) make a cosine term contribute 0.
SPEED_EPSILON = 1e-9


@dataclass(frozen=True, eq=False)
class ConfScores:
    scores: np.ndarray

    def __post_init__(self):
        arr = np.array(self.scores, dtype=np.float64).reshape(-1)
        arr.flags.writeable = False
        object.__setattr__(self, "scores", arr)

    def __len__(self) -> int:
        return self.scores.shape[0]

    def __getitem__(self, i: int) -> float:
        return float(self.scores[i])


def _edge_sum(graph: NeighborGraph, values: np.ndarray) -> np.ndarray:
    # bincount adds weights in input order; edges are sorted by (src, dst)
    return np.bincount(graph.src, weights=values, minlength=graph.n_agents)


def compute_confscores(state: SwarmState, graph: NeighborGraph) -> ConfScores:
    v = state.velocities
    speed = np.hypot(v[:, 0], v[:, 1])
    vi = v[graph.src]
    vj = v[graph.dst]
    dot = vi[:, 0] * vj[:, 0] + vi[:, 1] * vj[:, 1]
    denom = speed[graph.src] * speed[graph.dst]
    valid = (speed[graph.src] >= SPEED_EPSILON) & (speed[graph.dst] >= SPEED_EPSILON)
    cos = np.zeros_like(dot)
    np.divide(dot, denom, out=cos, where=valid)
    # rounding can push |cos| past 1
    np.clip(cos, -1.0, 1.0, out=cos)
    return ConfScores(_edge_sum(graph, cos))


def top_k_by_score(graph: NeighborGraph, scores: ConfScores, i: int, k: int) -> List[int]:
    """Agent i's k highest-scored neighbours, ties to the lower index."""
    if k < 1:
        raise ValueError("k must be at least 1")
    ranked = sorted(graph.neighbors[i], key=lambda j: (-scores.scores[j], j))
    return ranked[:k]


def _top_k_mask(graph: NeighborGraph, c: np.ndarray, k: int) -> np.ndarray:
    """Vectorised top_k_by_score over every edge: True where dst is in src's top-k."""
    if graph.src.size == 0:
        return np.zeros(0, dtype=bool)
    order = np.lexsort((graph.dst, -c[graph.dst], graph.src))
    sorted_src = graph.src[order]
    group_start = np.searchsorted(sorted_src, sorted_src, side="left")
    rank = np.arange(order.size) - group_start
    mask = np.zeros(order.size, dtype=bool)
    mask[order[rank < k]] = True
    return mask


def assistant_acceleration(state: SwarmState, graph: NeighborGraph, scores: ConfScores,
                           k: int, lam: float) -> ControlAction:
    if k < 1:
        raise ValueError("k must be at least 1")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    n = state.n_agents
    c = scores.scores
    v = state.velocities

    leader = _top_k_mask(graph, c, k) & (c[graph.dst] > c[graph.src])
    src = graph.src[leader]
    dst = graph.dst[leader]
    coef = lam * (c[dst] - c[src])
    dvx = v[dst, 0] - v[src, 0]
    dvy = v[dst, 1] - v[src, 1]

    counts = np.bincount(src, minlength=n)
    sum_x = np.bincount(src, weights=coef * dvx, minlength=n)
    sum_y = np.bincount(src, weights=coef * dvy, minlength=n)
    accels = np.zeros((n, 2))
    has_leader = counts > 0
    accels[has_leader, 0] = sum_x[has_leader] / counts[has_leader]
    accels[has_leader, 1] = sum_y[has_leader] / counts[has_leader]
    return ControlAction(accels)


def normalize_scores_for_export(scores: ConfScores) -> np.ndarray:
    """Min-max map onto [0, 1]; a constant score vector maps to 0.5."""
    c = scores.scores
    if c.size == 0:
        raise ValueError("Cannot normalize an empty score vector")
    lo = c.min()
    hi = c.max()
    if hi == lo:
        return np.full(c.shape, 0.5)
    return (c - lo) / (hi - lo)


def score_centrality(positions: np.ndarray, scores: ConfScores) -> Optional[float]:
    """Correlation between score and closeness to the swarm centroid.

    Positive when central agents score higher. None if either quantity is constant.
    """
    p = np.asarray(positions, dtype=np.float64)
    centroid = p.mean(axis=0)
    closeness = -np.hypot(p[:, 0] - centroid[0], p[:, 1] - centroid[1])
    c = scores.scores
    if np.ptp(c) == 0 or np.ptp(closeness) == 0:
        return None
    return float(np.corrcoef(closeness, c)[0, 1])
