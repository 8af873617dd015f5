"""Experiment matrix: routes x ego controllers x V2I ranges x compositions.

Every cell is run once per seed and the metrics are averaged over seeds.
Ratios are taken against the baseline cell of the same route (HV ego,
no downstream CAVs, zero range by default), so the baseline's own ratios
are exactly 1.0.

Matrix file (TOML)::

    routes = ["peachtree", "synthetic"]     # bundled names or file paths
    controllers = ["HV", "AV", "CAV"]
    ranges = [0.0, 150.0, 300.0, 600.0, 1200.0]
    compositions = ["no_cav", "partial"]
    seeds = [1, 2]
    workers = 1

    [baseline]
    ego = "HV"
    composition = "no_cav"
    v2i_range = 0.0
"""
from __future__ import annotations

import itertools
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .energy import FuelModel, summarize
from .errors import ScenarioParseError, ScenarioValidationError, SimulationTimeout
from .scenario import COMPOSITIONS, bundled_path, parse_scenario, string_kinds
from .traffic_sim import Kind, run_scenario

__all__ = ["SweepMatrix", "SUMMARY_HEADER", "parse_matrix", "resolve_route", "cell_scenario",
           "run_cell", "run_sweep"]

METRIC_FIELDS = ("fuel", "travel_time", "distance", "braking_events", "stops", "effort")
RATIO_FIELDS = ("fuel", "travel_time")
SUMMARY_HEADER = (
    ("route", "ego", "composition", "v2i_range", "seeds", "flagged", "flag_reason",
     "collisions", "red_crossings", "fallbacks")
    + tuple(f"ego_{m}" for m in METRIC_FIELDS)
    + tuple(f"fleet_{m}" for m in METRIC_FIELDS)
    + tuple(f"ratio_ego_{m}" for m in RATIO_FIELDS)
    + tuple(f"ratio_fleet_{m}" for m in RATIO_FIELDS)
)


@dataclass(frozen=True)
class SweepMatrix:
    routes: tuple = ("peachtree", "synthetic")
    controllers: tuple = ("HV", "AV", "CAV")
    ranges: tuple = (0.0, 150.0, 300.0, 600.0, 1200.0)
    compositions: tuple = ("no_cav", "partial")
    seeds: tuple = (1, 2)
    baseline: dict = field(default_factory=lambda: {"ego": "HV", "composition": "no_cav",
                                                    "v2i_range": 0.0})
    workers: int = 1

    def cells(self):
        return list(itertools.product(self.routes, self.controllers, self.ranges,
                                      self.compositions))

    def baseline_cell(self, route):
        b = self.baseline
        return (route, b["ego"], float(b["v2i_range"]), b["composition"])


_MATRIX_KEYS = {"routes", "controllers", "ranges", "compositions", "seeds", "baseline", "workers"}


def parse_matrix(path) -> SweepMatrix:
    try:
        doc = tomllib.loads(Path(path).read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ScenarioParseError(f"cannot read sweep matrix {path}: {exc}") from exc
    for key in doc:
        if key not in _MATRIX_KEYS:
            raise ScenarioParseError(f"unknown key '{key}'", field=key)
    m = SweepMatrix(**{k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()})
    for k in m.controllers:
        Kind(k)
    for c in m.compositions:
        if c not in COMPOSITIONS:
            raise ScenarioValidationError(f"unknown composition '{c}'")
    if any(r < 0 for r in m.ranges) or not m.seeds or m.workers < 1:
        raise ScenarioValidationError("ranges must be non-negative, seeds non-empty, workers >= 1")
    return m


def resolve_route(name: str) -> Path:
    p = Path(name)
    return p if p.suffix == ".toml" and p.exists() else bundled_path(name)


def cell_scenario(route: str, ego: str, v2i_range: float, composition: str, seed: int):
    base = parse_scenario(resolve_route(route))
    kinds = string_kinds(len(base.kinds), ego, base.ego_index, composition)
    return base.with_(kinds=kinds, composition=composition, v2i_range=float(v2i_range),
                      seed=int(seed), case=f"{ego}-{composition}-{v2i_range:g}")


def _fleet_mean(log, model):
    ms = []
    for j in range(log.n_vehicles):
        try:
            ms.append(summarize(log, vehicle=j, model=model))
        except ValueError:
            pass
    return {f: sum(getattr(m, f) for m in ms) / len(ms) for f in METRIC_FIELDS}


def run_cell(route, ego, v2i_range, composition, seed, model: FuelModel = FuelModel()) -> dict:
    """Run one seed of one cell; returns the per-seed metrics and flags."""
    sc = cell_scenario(route, ego, v2i_range, composition, seed)
    out = {"timeout": False}
    try:
        log = run_scenario(sc)
    except SimulationTimeout as exc:
        out["timeout"] = True
        log = exc.log
    ego_m = summarize(log, model=model)
    out["ego"] = {f: getattr(ego_m, f) for f in METRIC_FIELDS}
    out["fleet"] = _fleet_mean(log, model)
    out["collisions"] = log.collisions
    out["red_crossings"] = log.red_crossings
    out["fallbacks"] = len(log.events_of("fallback"))
    return out


def _run_one(args):
    return run_cell(*args)


def _aggregate(cell, results):
    route, ego, rng, comp = cell
    row = {"route": route, "ego": ego, "composition": comp, "v2i_range": float(rng),
           "seeds": len(results)}
    reasons = []
    if any(r["timeout"] for r in results):
        reasons.append("timeout")
    for key in ("collisions", "red_crossings", "fallbacks"):
        row[key] = sum(r[key] for r in results)
    if row["collisions"]:
        reasons.append("collision")
    if row["red_crossings"]:
        reasons.append("red_crossing")
    for who in ("ego", "fleet"):
        for f in METRIC_FIELDS:
            row[f"{who}_{f}"] = sum(r[who][f] for r in results) / len(results)
    row["flagged"] = bool(reasons)
    row["flag_reason"] = ";".join(reasons)
    return row


def run_sweep(matrix: SweepMatrix, model: FuelModel = FuelModel(), workers: int | None = None,
              progress=None) -> list[dict]:
    """One summary row per cell, in matrix order.

    A cell that times out is flagged and keeps the metrics of its partial
    run; the sweep continues.
    """
    cells = matrix.cells()
    needed = list(cells)
    for route in matrix.routes:
        b = matrix.baseline_cell(route)
        if b not in needed:
            needed.append(b)
    jobs = [(c, s) for c in needed for s in matrix.seeds]
    args = [(c[0], c[1], c[2], c[3], s, model) for c, s in jobs]
    workers = matrix.workers if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, args))
    else:
        results = []
        for a in args:
            results.append(_run_one(a))
            if progress is not None:
                progress(len(results), len(args))
    by_cell = {}
    for (c, _), r in zip(jobs, results):
        by_cell.setdefault(c, []).append(r)
    rows = {c: _aggregate(c, by_cell[c]) for c in needed}
    for c in needed:
        base = rows[matrix.baseline_cell(c[0])]
        for who in ("ego", "fleet"):
            for f in RATIO_FIELDS:
                num, den = rows[c][f"{who}_{f}"], base[f"{who}_{f}"]
                rows[c][f"ratio_{who}_{f}"] = num / den if den else math.nan
    return [rows[c] for c in cells]
