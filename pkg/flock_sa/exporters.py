"""
File outputs: sweep CSV, score dump CSV, trajectory JSON Lines and the
optional sweep summary workbook.

Reals in CSV files are written with 9 significant digits. In the trajectory
dump, connectivity counts belong to the graph before the integration that
produced the frame's positions and velocities.
"""

import json
import logging
from pathlib import Path
from typing import IO, TYPE_CHECKING, Iterable, Union

import pandas as pd

from flock_sa.confscore import normalize_scores_for_export

if TYPE_CHECKING:
    from flock_sa.sim import EpisodeRecord
    from flock_sa.sweep import SweepRow

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"

SWEEP_COLUMNS = [
    'controller', 'n_agents', 'comm_radius', 'v_max', 'top_k', 'lambda', 'seed',
    'aux_enabled', 'total_cost', 'initial_step_cost', 'final_step_cost',
    'isolated_at_end', 'components_at_end', 'error',
]

SCORE_COLUMNS = ['step', 'agent_id', 'pos_x', 'pos_y', 'score', 'score_normalized']

PathOrBuffer = Union[str, Path, IO[str]]


def sweep_rows_to_frame(rows: Iterable["SweepRow"]) -> pd.DataFrame:
    records = [row.to_record() for row in rows]
    df = pd.DataFrame.from_records(records, columns=SWEEP_COLUMNS)
    # keep counts integral when no cell failed
    for col in ('isolated_at_end', 'components_at_end'):
        if df[col].notna().all():
            df[col] = df[col].astype('int64')
    return df


def write_sweep_csv(rows: Iterable["SweepRow"], out: PathOrBuffer) -> pd.DataFrame:
    df = sweep_rows_to_frame(rows)
    df.to_csv(out, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(df)} sweep rows")
    return df


def score_dump_frame(record: "EpisodeRecord") -> pd.DataFrame:
    frames = []
    for sample in record.score_history:
        n = len(sample.scores)
        frames.append(pd.DataFrame({
            'step': [sample.step] * n,
            'agent_id': range(n),
            'pos_x': sample.positions[:, 0],
            'pos_y': sample.positions[:, 1],
            'score': sample.scores.scores,
            'score_normalized': normalize_scores_for_export(sample.scores),
        }))
    if not frames:
        return pd.DataFrame(columns=SCORE_COLUMNS)
    return pd.concat(frames, ignore_index=True)[SCORE_COLUMNS]


def write_score_dump(record: "EpisodeRecord", out: PathOrBuffer) -> pd.DataFrame:
    df = score_dump_frame(record)
    df.to_csv(out, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote score dump with {len(df)} rows")
    return df


def write_trajectory_jsonl(record: "EpisodeRecord", path: Union[str, Path]):
    if not record.trajectory:
        raise ValueError("Episode was run without keep_trajectory=True")
    path = Path(path)
    with open(path, 'w', encoding='utf-8') as f:
        for frame in record.trajectory:
            f.write(json.dumps({
                'step': frame.step,
                'positions': frame.positions.tolist(),
                'velocities': frame.velocities.tolist(),
                'cost_term': frame.cost_term,
                'isolated_count': frame.isolated_count,
                'component_count': frame.component_count,
            }) + "\n")
    logger.info(f"Wrote {len(record.trajectory)} trajectory frames to {path}")


def write_summary(summary: pd.DataFrame, path: Union[str, Path]):
    """CSV by default; an Excel workbook when the path ends in .xlsx."""
    path = Path(path)
    if path.suffix.lower() == '.xlsx':
        summary.to_excel(path, index=False, sheet_name='sweep_summary', engine='openpyxl')
    else:
        summary.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote sweep summary to {path}")
