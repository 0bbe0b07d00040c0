from abc import ABC, abstractmethod
from typing import Dict, List, Union

import numpy as np

from flock_sa.core import (
    CoincidentAgentsError,
    ControlAction,
    LengthMismatchError,
    SwarmState,
    Vec2,
)
from flock_sa.graph import NeighborGraph

# Distances below D_MIN (m) are evaluated at D_MIN; gradients are capped at G_MAX (m/s^2).
D_MIN = 0.01
G_MAX = 100.0


def potential_gradient(r: Union[Vec2, np.ndarray]) -> np.ndarray:
    """
    Gradient of U(r) = 1/|r|^2 + log |r|^2 with respect to the displacement r.

    Accepts one displacement of shape (2,) or a batch of shape (M, 2).

    Returns:
        (-2/|r|^4 + 2/|r|^2) * r, with |r| clamped below at D_MIN and the
        result's magnitude clamped at G_MAX.
    """
    r = np.asarray(r, dtype=np.float64)
    single = r.ndim == 1
    rr = r.reshape(-1, 2)
    dist = np.hypot(rr[:, 0], rr[:, 1])
    if np.any(dist == 0.0):
        raise CoincidentAgentsError("Potential gradient undefined for coincident agents")

    d = np.maximum(dist, D_MIN)
    d2 = d * d
    # radial derivative dU/d|r| = -2/d^3 + 2/d
    radial = (-2.0 / (d2 * d2) + 2.0 / d2) * d
    magnitude = np.clip(radial, -G_MAX, G_MAX)
    grad = (magnitude / dist)[:, None] * rr
    return grad[0] if single else grad


def _edge_sum(graph: NeighborGraph, values: np.ndarray) -> np.ndarray:
    n = graph.n_agents
    return np.column_stack((
        np.bincount(graph.src, weights=values[:, 0], minlength=n),
        np.bincount(graph.src, weights=values[:, 1], minlength=n),
    ))


def tanner_local(state: SwarmState, graph: NeighborGraph) -> ControlAction:
    """Velocity alignment plus potential gradient over the radius-R neighbours."""
    p = state.positions
    v = state.velocities
    velocity_term = _edge_sum(graph, v[graph.src] - v[graph.dst])
    if graph.src.size:
        potential_term = _edge_sum(graph, potential_gradient(p[graph.src] - p[graph.dst]))
    else:
        potential_term = np.zeros_like(velocity_term)
    return ControlAction(-velocity_term - potential_term)


def tanner_global(state: SwarmState) -> ControlAction:
    """The same law summed over every other agent, regardless of distance."""
    p = state.positions
    v = state.velocities
    n = state.n_agents
    velocity_term = (v[:, None, :] - v[None, :, :]).sum(axis=1)

    off_diagonal = ~np.eye(n, dtype=bool)
    r = (p[:, None, :] - p[None, :, :])[off_diagonal]
    grads = potential_gradient(r).reshape(n, n - 1, 2)
    potential_term = grads.sum(axis=1)
    return ControlAction(-velocity_term - potential_term)


def compose(base: ControlAction, aux: ControlAction) -> ControlAction:
    """Total action u + u_bar."""
    if len(base) != len(aux):
        raise LengthMismatchError(f"Cannot compose actions of length {len(base)} and {len(aux)}")
    return ControlAction(base.accels + aux.accels)


class ControllerStrategy(ABC):
    def __init__(self, name: str):
        self.name = name

    @abstractmethod
    def compute(self, state: SwarmState, graph: NeighborGraph) -> ControlAction:
        """Map the current state (and its neighbour graph) to per-agent accelerations."""
        pass


class LocalController(ControllerStrategy):
    def __init__(self):
        super().__init__("local")

    def compute(self, state: SwarmState, graph: NeighborGraph) -> ControlAction:
        return tanner_local(state, graph)


class GlobalController(ControllerStrategy):
    def __init__(self):
        super().__init__("global")

    def compute(self, state: SwarmState, graph: NeighborGraph) -> ControlAction:
        return tanner_global(state)


class NoControl(ControllerStrategy):
    """Ballistic drift: zero acceleration for everyone."""

    def __init__(self):
        super().__init__("none")

    def compute(self, state: SwarmState, graph: NeighborGraph) -> ControlAction:
        return ControlAction.zeros(state.n_agents)


class ControllerRegistry:
    _controllers: Dict[str, ControllerStrategy] = {
        'local': LocalController(),
        'global': GlobalController(),
        'none': NoControl(),
    }

    @classmethod
    def get(cls, name: str) -> ControllerStrategy:
        try:
            return cls._controllers[name.lower()]
        except KeyError:
            raise ValueError(
                f"Unknown controller '{name}', expected one of: {', '.join(cls.list_controllers())}"
            ) from None

    @classmethod
    def register(cls, controller: ControllerStrategy):
        cls._controllers[controller.name.lower()] = controller

    @classmethod
    def unregister(cls, name: str):
        cls._controllers.pop(name.lower(), None)

    @classmethod
    def list_controllers(cls) -> List[str]:
        return list(cls._controllers.keys())
