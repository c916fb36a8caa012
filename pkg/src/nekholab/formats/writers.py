"""
CSV and JSON outputs.

CSV files always carry a header row, use '.' as decimal separator and '\\n'
line endings; floats are written in their shortest round-trip form.
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, List, Sequence

from ..core.resonance import ResonanceEvent
from ..sim.sweep import SweepResult
from ..sim.trajectory import TrajectoryRecord


def _prepare(path: str) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]):
    p = _prepare(path)
    with open(p, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def write_json(path: str, payload: Any):
    p = _prepare(path)
    with open(p, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def trajectory_header(n: int) -> List[str]:
    return (["t"] + [f"I_{i + 1}" for i in range(n)]
            + [f"theta_{i + 1}" for i in range(n)] + ["H", "drift"])


def write_trajectory_csv(record: TrajectoryRecord, path: str):
    """t, I_1..I_n, theta_1..theta_n, H, drift"""
    rows = [
        [t] + list(I) + list(theta) + [H, d]
        for t, I, theta, H, d in zip(record.times, record.actions, record.thetas,
                                     record.energy, record.drift)
    ]
    write_csv(path, trajectory_header(record.n), rows)


def write_events_json(events: Sequence[ResonanceEvent], path: str):
    write_json(path, [e.to_dict() for e in events])


SWEEP_HEADER = ["epsilon", "seed", "T", "censored", "max_drift", "crossings"]


def write_sweep_csv(result: SweepResult, path: str):
    """epsilon, seed, T, censored, max_drift, crossings; failed rows leave T empty."""
    rows = [[r.epsilon, r.seed, r.T, r.censored, r.max_drift, r.crossings]
            for r in result.rows]
    write_csv(path, SWEEP_HEADER, rows)


def read_csv(path: str) -> List[dict]:
    with open(path, "r", newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))
