"""
Core domain types for the flocking simulation.

Holds the simulation parameters, the immutable swarm state and control action
containers, the exception hierarchy and seeded swarm initialization.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Iterator, NamedTuple, Optional, Union

import numpy as np

logger = logging.getLogger(__name__)

# Candidate draws allowed per agent before initialization gives up.
MAX_PLACEMENT_ATTEMPTS = 1000

LAMBDA_NON_LEARNING = 30.0
LAMBDA_LEARNING = 15.0


class FlockSaError(Exception):
    """Base class for all simulation errors."""


class ConfigError(FlockSaError, ValueError):
    """Invalid parameters or malformed config document."""


class InitializationError(FlockSaError):
    """Rejection sampling could not place every agent."""


class CoincidentAgentsError(FlockSaError, ValueError):
    """Two agents occupy exactly the same position."""


class NonFiniteActionError(FlockSaError, ValueError):
    """A control action contains NaN or Inf."""


class NonFiniteStateError(FlockSaError, ValueError):
    """Positions or velocities overflowed to NaN or Inf."""


class LengthMismatchError(FlockSaError, ValueError):
    """Per-agent sequences of different lengths were combined."""


class SimulationError(FlockSaError):
    """An error raised while an episode was running."""

    def __init__(self, step_index: int, message: str):
        super().__init__(f"step {step_index}: {message}")
        self.step_index = step_index


class Vec2(NamedTuple):
    x: float
    y: float


class AgentState(NamedTuple):
    position: Vec2
    velocity: Vec2


def _frozen_array(values, name: str, n_rows: Optional[int] = None) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1, 2)
    if n_rows is not None and arr.shape[0] != n_rows:
        raise LengthMismatchError(f"{name} has {arr.shape[0]} rows, expected {n_rows}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SwarmState:
    """Positions and velocities of all agents at step ``step_index``.

    Agent identity is the row index; arrays are read-only copies.
    """
    positions: np.ndarray
    velocities: np.ndarray
    step_index: int = 0

    def __post_init__(self):
        positions = _frozen_array(self.positions, "positions")
        velocities = _frozen_array(self.velocities, "velocities", positions.shape[0])
        if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(velocities))):
            raise NonFiniteStateError("Swarm state contains non-finite components")
        if self.step_index < 0:
            raise ValueError("step_index must be non-negative")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "velocities", velocities)

    @property
    def n_agents(self) -> int:
        return self.positions.shape[0]

    @property
    def agents(self) -> Iterator[AgentState]:
        for p, v in zip(self.positions, self.velocities):
            yield AgentState(Vec2(float(p[0]), float(p[1])), Vec2(float(v[0]), float(v[1])))

    def state_hash(self) -> str:
        digest = hashlib.sha256()
        digest.update(self.positions.tobytes())
        digest.update(self.velocities.tobytes())
        return digest.hexdigest()

    def __eq__(self, other) -> bool:
        if not isinstance(other, SwarmState):
            return NotImplemented
        return (self.step_index == other.step_index
                and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.velocities, other.velocities))


@dataclass(frozen=True, eq=False)
class ControlAction:
    """Per-agent accelerations, one row per agent."""
    accels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "accels", _frozen_array(self.accels, "accels"))

    @classmethod
    def zeros(cls, n_agents: int) -> "ControlAction":
        return cls(np.zeros((n_agents, 2)))

    def __len__(self) -> int:
        return self.accels.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ControlAction):
            return NotImplemented
        return np.array_equal(self.accels, other.accels)


def default_lambda(n_agents: int, learning_based: bool = False) -> float:
    """Heuristic magnitude coefficient: 30/N, or 15/N for learning-based controllers."""
    if n_agents < 1:
        raise ValueError("n_agents must be at least 1")
    numerator = LAMBDA_LEARNING if learning_based else LAMBDA_NON_LEARNING
    return numerator / n_agents


@dataclass(frozen=True)
class SimParams:
    n_agents: int = 100
    comm_radius: float = 1.0
    v_max: float = 3.5
    sampling_time: float = 0.01
    n_steps: int = 500
    top_k: int = 3
    lambda_override: Optional[float] = None
    aux_enabled: bool = True
    seed: int = 0
    init_min_separation: float = 0.1
    init_box_side: Optional[float] = None

    def __post_init__(self):
        if self.init_box_side is None:
            object.__setattr__(self, "init_box_side", 1.0 * math.sqrt(max(self.n_agents, 1)))
        self._validate()

    def _validate(self):
        checks = [
            (isinstance(self.n_agents, int) and self.n_agents >= 2, "n_agents must be an integer >= 2"),
            (self.comm_radius > 0, "comm_radius must be positive"),
            (self.v_max >= 0, "v_max must be non-negative"),
            (self.sampling_time > 0, "sampling_time must be positive"),
            (isinstance(self.n_steps, int) and self.n_steps >= 1, "n_steps must be a positive integer"),
            (isinstance(self.top_k, int) and self.top_k >= 1, "top_k must be a positive integer"),
            (isinstance(self.aux_enabled, bool), "aux_enabled must be true or false"),
            (self.lambda_override is None or self.lambda_override >= 0, "lambda_override must be non-negative"),
            (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64, "seed must be a 64-bit unsigned integer"),
            (self.init_min_separation > 0, "init_min_separation must be positive"),
            (self.init_box_side > 0, "init_box_side must be positive"),
            (self.init_min_separation < self.init_box_side, "init_min_separation must be smaller than init_box_side"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        for name in ("comm_radius", "v_max", "sampling_time", "init_min_separation", "init_box_side"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    def effective_lambda(self) -> float:
        if self.lambda_override is not None:
            return float(self.lambda_override)
        return default_lambda(self.n_agents, learning_based=False)

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "SimParams":
        """Build parameters from the SimParams keys of a config document.

        Keys that are not SimParams fields are ignored here; ``load_config``
        rejects keys nobody understands.
        """
        kwargs = {name: doc[name] for name in cls.field_names() if name in doc}
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise ConfigError(f"Invalid parameter value: {e}") from e

    def with_overrides(self, **overrides) -> "SimParams":
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **overrides) if overrides else self


def load_config(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a JSON config document and check its keys."""
    # Imported here to keep core free of the sweep layer at import time.
    from flock_sa.sweep import SWEEP_KEYS

    config_path = Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")
    with open(config_path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Could not parse config {config_path}: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"Config {config_path} must contain a JSON object")

    known = set(SimParams.field_names()) | set(SWEEP_KEYS) | {"controller"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
    logger.info(f"Loaded config from {config_path}")
    return doc


def init_swarm(params: SimParams) -> SwarmState:
    """Seeded initial state: min-separation positions in a square, velocities in a disk.

    The generator is numpy's PCG64 seeded with ``params.seed``; positions are
    drawn first, then velocities.
    """
    rng = np.random.Generator(np.random.PCG64(params.seed))
    n = params.n_agents
    side = params.init_box_side
    min_sep_sq = params.init_min_separation ** 2

    positions = np.empty((n, 2))
    for i in range(n):
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            candidate = rng.uniform(0.0, side, size=2)
            if i == 0:
                break
            d = positions[:i] - candidate
            if np.min(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]) >= min_sep_sq:
                break
        else:
            raise InitializationError(
                f"Could not place agent {i} of {n} with separation {params.init_min_separation} m "
                f"in a {side:.6g} m box after {MAX_PLACEMENT_ATTEMPTS} attempts"
            )
        positions[i] = candidate

    radius = params.v_max * np.sqrt(rng.uniform(0.0, 1.0, size=n))
    # Clamp against rounding in sqrt so speeds never exceed v_max.
    radius = np.minimum(radius, params.v_max)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    # + 0.0 turns -0.0 into 0.0
    velocities = np.column_stack((radius * np.cos(theta), radius * np.sin(theta))) + 0.0

    logger.debug(f"Initialized {n} agents with seed {params.seed}")
    return SwarmState(positions, velocities, step_index=0)
