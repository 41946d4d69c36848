"""CSV and JSON writers with stable, round-trippable formatting."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import WaveSearchError
from .oscillators import OscillatorParams, total_energy

__all__ = ["OutputError", "format_float", "write_csv", "write_json", "trajectory_table"]


class OutputError(WaveSearchError, OSError):
    def __init__(self, path, reason):
        self.path = str(path)
        super().__init__(f"cannot write {self.path}: {reason}")


def format_float(x) -> str:
    """17 significant digits, enough for an exact float round trip."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_csv(path, columns, rows):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([v if isinstance(v, str) else format_float(v) for v in row])
    except OSError as exc:
        raise OutputError(path, exc.strerror or exc) from exc
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path, payload):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OutputError(path, exc.strerror or exc) from exc
    return path


def trajectory_table(traj, params: OscillatorParams, n_items=None):
    """Columns and rows of the trajectory CSV; an empty trajectory gives only the header."""
    n = params.n_items if n_items is None else n_items
    columns = (
        ["t", "X", "Xdot"]
        + [f"x_{i}" for i in range(1, n + 1)]
        + [f"xdot_{i}" for i in range(1, n + 1)]
        + ["E_total", "E_big", "E_register", "target_fraction"]
    )
    rows = []
    if traj is None:
        return columns, rows
    for i, s in enumerate(traj.states):
        e = traj.energies[i] if traj.energies else total_energy(s, params)
        rows.append(
            [s.time, s.big_pos, s.big_vel, *s.small_pos, *s.small_vel,
             e.total, e.big, e.register, traj.target_fraction[i]]
        )
    return columns, rows
