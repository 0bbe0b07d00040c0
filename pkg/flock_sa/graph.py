"""
Radius-limited communication graph.

Two agents are neighbours when their distance is at most the communication
radius (boundary inclusive). ``build_graph_bruteforce`` scans every pair and
serves as the reference; ``build_graph_grid`` buckets agents into a uniform
grid of cell size R and only tests pairs from the 3x3 cell neighbourhood.
Both compare squared distances computed by the same expression, so their
outputs are identical.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from flock_sa.core import SwarmState
from flock_sa.utils.union_find import RankUnionFind

logger = logging.getLogger(__name__)

GRAPH_METHODS = ("grid", "bruteforce")


def _squared_distance(dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    return dx * dx + dy * dy


@dataclass(frozen=True, eq=False)
class NeighborGraph:
    """Neighbour lists N_i plus the same edges as flat (src, dst) arrays.

    Edges are directed pairs sorted by (src, dst); every undirected link
    appears twice.
    """
    neighbors: Tuple[Tuple[int, ...], ...]
    src: np.ndarray
    dst: np.ndarray

    @classmethod
    def from_pairs(cls, n_agents: int, src: np.ndarray, dst: np.ndarray) -> "NeighborGraph":
        order = np.lexsort((dst, src))
        src = np.ascontiguousarray(src[order], dtype=np.int64)
        dst = np.ascontiguousarray(dst[order], dtype=np.int64)
        src.flags.writeable = False
        dst.flags.writeable = False
        bounds = np.searchsorted(src, np.arange(n_agents + 1))
        neighbors = tuple(
            tuple(int(j) for j in dst[bounds[i]:bounds[i + 1]]) for i in range(n_agents)
        )
        return cls(neighbors, src, dst)

    @property
    def n_agents(self) -> int:
        return len(self.neighbors)

    def degrees(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.n_agents)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NeighborGraph):
            return NotImplemented
        return self.neighbors == other.neighbors


def build_graph_bruteforce(state: SwarmState, comm_radius: float) -> NeighborGraph:
    """All-pairs O(N^2) reference construction."""
    if comm_radius <= 0:
        raise ValueError("comm_radius must be positive")
    p = state.positions
    dx = p[:, None, 0] - p[None, :, 0]
    dy = p[:, None, 1] - p[None, :, 1]
    within = _squared_distance(dx, dy) <= comm_radius * comm_radius
    np.fill_diagonal(within, False)
    src, dst = np.nonzero(within)
    return NeighborGraph.from_pairs(state.n_agents, src, dst)


def build_graph_grid(state: SwarmState, comm_radius: float) -> NeighborGraph:
    """Uniform-grid spatial hash with cell size R."""
    if comm_radius <= 0:
        raise ValueError("comm_radius must be positive")
    p = state.positions
    n = state.n_agents

    cells = np.floor(p / comm_radius).astype(np.int64)
    # one empty ring of cells so neighbour offsets never go negative
    cells -= cells.min(axis=0) - 1
    width = int(cells[:, 1].max()) + 2
    keys = cells[:, 0] * width + cells[:, 1]

    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]

    src_parts = []
    dst_parts = []
    agent_ids = np.arange(n)
    for ox in (-1, 0, 1):
        for oy in (-1, 0, 1):
            target = keys + ox * width + oy
            start = np.searchsorted(sorted_keys, target, side="left")
            stop = np.searchsorted(sorted_keys, target, side="right")
            counts = stop - start
            total = int(counts.sum())
            if total == 0:
                continue
            src = np.repeat(agent_ids, counts)
            # position of each candidate inside its cell bucket
            offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
            dst = order[np.repeat(start, counts) + offsets]
            src_parts.append(src)
            dst_parts.append(dst)

    if not src_parts:
        return NeighborGraph.from_pairs(n, np.empty(0, np.int64), np.empty(0, np.int64))

    src = np.concatenate(src_parts)
    dst = np.concatenate(dst_parts)
    dx = p[src, 0] - p[dst, 0]
    dy = p[src, 1] - p[dst, 1]
    keep = (src != dst) & (_squared_distance(dx, dy) <= comm_radius * comm_radius)
    return NeighborGraph.from_pairs(n, src[keep], dst[keep])


def build_graph(state: SwarmState, comm_radius: float, method: str = "grid") -> NeighborGraph:
    if method == "grid":
        return build_graph_grid(state, comm_radius)
    if method == "bruteforce":
        return build_graph_bruteforce(state, comm_radius)
    raise ValueError(f"Unknown graph method '{method}', expected one of {GRAPH_METHODS}")


def connectivity(graph: NeighborGraph) -> Tuple[int, int]:
    """Return (isolated_count, component_count); isolated agents count as components."""
    uf = RankUnionFind()
    for i, j in zip(graph.src.tolist(), graph.dst.tolist()):
        if i < j:
            uf.union(i, j)
    isolated = sum(1 for nbrs in graph.neighbors if not nbrs)
    return isolated, uf.count_sets(range(graph.n_agents))
