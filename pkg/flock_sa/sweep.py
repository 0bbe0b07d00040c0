"""
Parameter sweeps over agent count, communication radius, maximum initial
speed and top-k, optionally as paired runs with the auxiliary controller on
and off from the same seed.
"""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from flock_sa.controller_strategies import ControllerRegistry
from flock_sa.core import ConfigError, FlockSaError, SimParams, default_lambda, init_swarm
from flock_sa.exporters import sweep_rows_to_frame
from flock_sa.metrics import CostSummary, episode_cost
from flock_sa.sim import run_episode

logger = logging.getLogger(__name__)

DEFAULT_N_AGENTS_VALUES = [25, 50, 100]
DEFAULT_COMM_RADIUS_VALUES = [1.0, 1.5, 2.0, 3.0, 4.0]
DEFAULT_V_MAX_VALUES = [0.5, 1.5, 2.5, 3.5]
DEFAULT_TOP_K_VALUES = [1, 3, 5]
DEFAULT_CONTROLLERS = ['local', 'global']

SWEEP_KEYS = (
    'n_agents_values', 'comm_radius_values', 'v_max_values', 'top_k_values',
    'seeds_per_cell', 'controllers', 'paired_ab',
)

CELL_KEYS = ['controller', 'n_agents', 'comm_radius', 'v_max', 'top_k']


@dataclass(frozen=True)
class SweepSpec:
    base: SimParams
    n_agents_values: Tuple[int, ...] = tuple(DEFAULT_N_AGENTS_VALUES)
    comm_radius_values: Tuple[float, ...] = tuple(DEFAULT_COMM_RADIUS_VALUES)
    v_max_values: Tuple[float, ...] = tuple(DEFAULT_V_MAX_VALUES)
    top_k_values: Tuple[int, ...] = tuple(DEFAULT_TOP_K_VALUES)
    seeds_per_cell: int = 1
    controllers: Tuple[str, ...] = tuple(DEFAULT_CONTROLLERS)
    paired_ab: bool = True
    # When False every cell uses the sqrt(N) default box for its own N.
    fixed_box_side: bool = False

    def __post_init__(self):
        for name in ('n_agents_values', 'comm_radius_values', 'v_max_values', 'top_k_values', 'controllers'):
            values = tuple(getattr(self, name))
            if not values:
                raise ConfigError(f"{name} must not be empty")
            object.__setattr__(self, name, values)
        if not isinstance(self.seeds_per_cell, int) or self.seeds_per_cell < 1:
            raise ConfigError("seeds_per_cell must be a positive integer")
        for name in ('paired_ab', 'fixed_box_side'):
            if not isinstance(getattr(self, name), bool):
                raise ConfigError(f"{name} must be true or false")
        known = ControllerRegistry.list_controllers()
        unknown = [c for c in self.controllers if c.lower() not in known]
        if unknown:
            raise ConfigError(f"Unknown controllers: {', '.join(unknown)}")

    def seeds(self) -> List[int]:
        return [self.base.seed + s for s in range(self.seeds_per_cell)]

    def aux_flags(self) -> List[bool]:
        return [True, False] if self.paired_ab else [self.base.aux_enabled]

    def cells(self) -> Iterable[Tuple[str, int, float, float, int, int, bool]]:
        """(controller, N, R, V, k, seed, aux) in output order."""
        return itertools.product(
            self.controllers, self.n_agents_values, self.comm_radius_values,
            self.v_max_values, self.top_k_values, self.seeds(), self.aux_flags(),
        )

    @classmethod
    def from_config(cls, doc: Dict[str, Any]) -> "SweepSpec":
        base = SimParams.from_dict(doc)
        return cls(
            base=base,
            n_agents_values=doc.get('n_agents_values', DEFAULT_N_AGENTS_VALUES),
            comm_radius_values=doc.get('comm_radius_values', DEFAULT_COMM_RADIUS_VALUES),
            v_max_values=doc.get('v_max_values', DEFAULT_V_MAX_VALUES),
            top_k_values=doc.get('top_k_values', DEFAULT_TOP_K_VALUES),
            seeds_per_cell=doc.get('seeds_per_cell', 1),
            controllers=doc.get('controllers', DEFAULT_CONTROLLERS),
            paired_ab=doc.get('paired_ab', True),
            fixed_box_side='init_box_side' in doc,
        )


@dataclass(frozen=True)
class SweepRow:
    controller: str
    n_agents: int
    comm_radius: float
    v_max: float
    top_k: int
    lam: float
    seed: int
    aux_enabled: bool
    summary: Optional[CostSummary] = None
    error: str = ""
    initial_state_hash: Optional[str] = field(default=None, compare=False)

    def to_record(self) -> Dict[str, Any]:
        record = {
            'controller': self.controller,
            'n_agents': self.n_agents,
            'comm_radius': self.comm_radius,
            'v_max': self.v_max,
            'top_k': self.top_k,
            'lambda': self.lam,
            'seed': self.seed,
            'aux_enabled': self.aux_enabled,
            'error': self.error,
        }
        if self.summary is not None:
            record.update(self.summary.to_dict())
        return record


def _cell_lambda(base: SimParams, n_agents: int) -> float:
    if base.lambda_override is not None:
        return float(base.lambda_override)
    return default_lambda(n_agents, learning_based=False)


def _run_cell(task: Tuple[SimParams, bool, Tuple]) -> SweepRow:
    base, fixed_box, (controller, n, r, v, k, seed, aux) = task
    row = dict(controller=controller, n_agents=n, comm_radius=r, v_max=v, top_k=k,
               lam=_cell_lambda(base, n), seed=seed, aux_enabled=aux)
    try:
        box = base.init_box_side if fixed_box else math.sqrt(n)
        params = replace(base, n_agents=n, comm_radius=r, v_max=v, top_k=k,
                         seed=seed, aux_enabled=aux, init_box_side=box)
        initial_hash = init_swarm(params).state_hash()
        logger.info(f"Cell {controller} N={n} R={r} V={v} k={k} seed={seed} aux={aux} "
                    f"init_hash={initial_hash}")
        record = run_episode(params, controller)
        return SweepRow(**row, summary=episode_cost(record), initial_state_hash=initial_hash)
    except FlockSaError as e:
        logger.warning(f"Cell {controller} N={n} R={r} V={v} k={k} seed={seed} aux={aux} failed: {e}")
        return SweepRow(**row, error=str(e))


def run_sweep(spec: SweepSpec, max_workers: int = 1) -> List[SweepRow]:
    """Run every cell of the sweep; rows come back in product order."""
    tasks = [(spec.base, spec.fixed_box_side, cell) for cell in spec.cells()]
    logger.info(f"Running sweep with {len(tasks)} episodes on {max_workers} worker(s)")
    if max_workers <= 1:
        rows = [_run_cell(task) for task in tasks]
    else:
        # map() yields results in submission order
        with ProcessPoolExecutor(max_workers=max_workers) as executor:
            rows = list(executor.map(_run_cell, tasks))
    failed = sum(1 for row in rows if row.error)
    logger.info(f"Sweep finished: {len(rows)} rows, {failed} failed")
    return rows


def summarize_sweep(rows: Union[Sequence[SweepRow], pd.DataFrame]) -> pd.DataFrame:
    """Per-cell means with the auxiliary controller on and off, and the gain from it."""
    df = rows if isinstance(rows, pd.DataFrame) else sweep_rows_to_frame(rows)
    ok = df[df['error'].fillna("") == ""]
    grouped = (
        ok.groupby(CELL_KEYS + ['aux_enabled'], sort=True)
        .agg(mean_total_cost=('total_cost', 'mean'),
             mean_isolated_at_end=('isolated_at_end', 'mean'),
             runs=('seed', 'count'))
        .reset_index()
    )
    on = grouped[grouped['aux_enabled'].astype(bool)].drop(columns='aux_enabled')
    off = grouped[~grouped['aux_enabled'].astype(bool)].drop(columns='aux_enabled')
    summary = on.merge(off, on=CELL_KEYS, how='outer', suffixes=('_aux_on', '_aux_off'))
    summary['cost_improvement'] = summary['mean_total_cost_aux_off'] - summary['mean_total_cost_aux_on']
    summary['aux_helps'] = summary['mean_total_cost_aux_on'] < summary['mean_total_cost_aux_off']
    return summary.sort_values(CELL_KEYS).reset_index(drop=True)
