"""CSV step tables and summary tables.

Step table, one row per step and vehicle::

    step,t,vehicle,kind,ego,in_window,s,v,a,a_cmd,phases

``phases`` concatenates one letter per signal (G, A, R). Floats are
written with ``repr`` so a table read back reproduces the log bit for bit;
vehicles that have left the route have empty ``s``/``v``/``a``/``a_cmd``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .energy import FuelModel, summarize

__all__ = ["STEP_HEADER", "METRICS_HEADER", "StepTable", "write_log", "read_step_table",
           "write_table", "read_table"]

STEP_HEADER = ("step", "t", "vehicle", "kind", "ego", "in_window", "s", "v", "a", "a_cmd",
               "phases")
METRICS_HEADER = ("vehicle", "kind", "ego", "fuel", "travel_time", "distance",
                  "braking_events", "stops", "effort")


def _num(x) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


def _open(path, mode):
    path = Path(path)
    try:
        return path.open(mode, newline="")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc


@dataclass
class StepTable:
    """A step table read back into arrays with the ``ScenarioLog`` layout."""

    t: np.ndarray
    s: np.ndarray
    v: np.ndarray
    a: np.ndarray
    a_cmd: np.ndarray
    phases: list
    kinds: tuple
    ego_index: int
    window: tuple


def _step_rows(log):
    t0, t1 = log.window
    for k, t in enumerate(log.t):
        in_win = int(t0 - 1e-9 <= t <= t1 + 1e-9)
        for j in range(log.n_vehicles):
            yield (k, repr(float(t)), j, str(log.kinds[j]), int(j == log.ego_index), in_win,
                   _num(log.s[k, j]), _num(log.v[k, j]), _num(log.a[k, j]),
                   _num(log.a_cmd[k, j]), log.phases[k])


def _metric_rows(log, model):
    for j in range(log.n_vehicles):
        try:
            m = summarize(log, vehicle=j, model=model)
        except ValueError:
            continue
        yield (j, str(log.kinds[j]), int(j == log.ego_index), repr(m.fuel), repr(m.travel_time),
               repr(m.distance), m.braking_events, m.stops, repr(m.effort))


def write_log(log, path, format: str = "step-table", model: FuelModel = FuelModel()) -> None:
    """Write ``log`` as a step table or as a per-vehicle metrics summary."""
    if format == "step-table":
        header, rows = STEP_HEADER, _step_rows(log)
    elif format == "summary":
        header, rows = METRICS_HEADER, _metric_rows(log, model)
    else:
        raise ValueError(f"unknown log format '{format}'")
    with _open(path, "w") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _f(x: str) -> float:
    return float(x) if x != "" else math.nan


def read_step_table(path) -> StepTable:
    with _open(path, "r") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != STEP_HEADER:
            raise ValueError(f"{path}: not a step table (header {header})")
        rows = list(reader)
    if not rows:
        e = np.zeros((0, 0))
        return StepTable(np.zeros(0), e, e, e, e, [], (), -1, (math.nan, math.nan))
    n_steps = int(rows[-1][0]) + 1
    n_veh = max(int(r[2]) for r in rows) + 1
    shape = (n_steps, n_veh)
    s, v, a, a_cmd = (np.full(shape, math.nan) for _ in range(4))
    t = np.zeros(n_steps)
    phases = [""] * n_steps
    kinds = [""] * n_veh
    ego = -1
    t_win = []
    for r in rows:
        k, j = int(r[0]), int(r[2])
        t[k] = float(r[1])
        kinds[j] = r[3]
        if r[4] == "1":
            ego = j
        if r[5] == "1" and j == 0:
            t_win.append(t[k])
        s[k, j], v[k, j], a[k, j], a_cmd[k, j] = _f(r[6]), _f(r[7]), _f(r[8]), _f(r[9])
        phases[k] = r[10]
    window = (min(t_win), max(t_win)) if t_win else (math.nan, math.nan)
    return StepTable(t, s, v, a, a_cmd, phases, tuple(kinds), ego, window)


def write_table(rows, header, path) -> None:
    """Flat CSV table from dict rows; missing or NaN values are left empty."""
    with _open(path, "w") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            out = []
            for col in header:
                x = row.get(col)
                if isinstance(x, bool):
                    x = int(x)
                if isinstance(x, float):
                    x = _num(x)
                out.append("" if x is None else x)
            w.writerow(out)


def read_table(path) -> list[dict]:
    with _open(path, "r") as fh:
        return list(csv.DictReader(fh))
