"""Scenario description, TOML scenario files and bundled corridors.

A scenario file is TOML::

    name = "peachtree"
    case = "cav-1200"
    seed = 1
    v2i_range = 1200.0

    [string]
    n_vehicles = 15
    ego = "CAV"              # HV, AV or CAV
    ego_index = 14           # 0 is the string leader
    composition = "no_cav"   # or "partial"; ignored when `kinds` is given
    # kinds = ["CAV", "HV", ...]

    [route]
    total_length = 1500.0
    end_stop = 1420.0
    sub_segments = [[1500.0, 17.8]]        # [length m, speed limit m/s]

    [[route.signals]]
    position = 170.0
    cycle = 125.0
    green = 81.0
    amber = 5.0
    first_green_start = 35.0

    [planner]   # PlannerParams fields, all optional
    [idm]       # IDMParams fields, all optional
    [sim]       # SimParams fields, all optional

Unknown keys are rejected. The first signal is the start light the string
waits behind.
"""
from __future__ import annotations

import dataclasses
import re
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .corridor import RouteSpec, SignalSpec, SubSegment
from .errors import InvalidRouteError, ScenarioParseError, ScenarioValidationError
from .green_window import PlannerParams
from .traffic_sim.params import IDMParams, Kind, SimParams

__all__ = [
    "Scenario",
    "COMPOSITIONS",
    "string_kinds",
    "parse_scenario",
    "loads_scenario",
    "dumps_scenario",
    "write_scenario",
    "bundled_scenario",
    "bundled_path",
    "synthetic_route",
    "SYNTHETIC_SEED",
]

COMPOSITIONS = ("no_cav", "partial")
# string positions (0 = leader) that are CAVs in the partial composition
PARTIAL_CAV_INDICES = (0, 10)
SYNTHETIC_SEED = 20210

_TOP_KEYS = {"name", "case", "seed", "v2i_range", "string", "route", "planner", "idm", "sim"}
_STRING_KEYS = {"n_vehicles", "ego", "ego_index", "composition", "kinds"}
_ROUTE_KEYS = {"total_length", "end_stop", "sub_segments", "signals"}
_SIGNAL_KEYS = {f.name for f in dataclasses.fields(SignalSpec)}


@dataclass(frozen=True)
class Scenario:
    route: RouteSpec
    kinds: tuple[Kind, ...]
    ego_index: int
    v2i_range: float = 0.0
    seed: int = 0
    name: str = ""
    case: str = ""
    composition: str = "custom"
    planner: PlannerParams = field(default_factory=PlannerParams)
    idm: IDMParams = field(default_factory=IDMParams)
    sim: SimParams = field(default_factory=SimParams)

    def __post_init__(self):
        object.__setattr__(self, "kinds", tuple(Kind(k) for k in self.kinds))
        if not self.kinds:
            raise ScenarioValidationError("vehicle string is empty")
        if not 0 <= self.ego_index < len(self.kinds):
            raise ScenarioValidationError(
                f"ego_index {self.ego_index} outside string of {len(self.kinds)} vehicles")
        if self.v2i_range < 0:
            raise ScenarioValidationError("v2i_range must be non-negative")
        if not self.route.signals:
            raise ScenarioValidationError("route needs at least the start light")
        room = self.route.signals[0].position - self.sim.stop_offset
        need = len(self.kinds) * (self.sim.vehicle_length + max(self.planner.s_s,
                                                                 self.idm.jam_distance))
        if need - self.sim.vehicle_length > room + 1e-9:
            raise ScenarioValidationError(
                f"{len(self.kinds)} vehicles do not fit behind the start light at "
                f"{self.route.signals[0].position} m")
        if self.route.max_speed_limit > self.sim.v_cap + 1e-9:
            raise ScenarioValidationError("speed limits exceed the vehicle speed cap")

    @property
    def ego_kind(self) -> Kind:
        return self.kinds[self.ego_index]

    def with_(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


def string_kinds(n_vehicles: int, ego: Kind | str, ego_index: int, composition: str):
    """Controller kinds of a preset string; the ego keeps its own kind."""
    if composition not in COMPOSITIONS:
        raise ScenarioValidationError(
            f"unknown composition '{composition}', expected one of {COMPOSITIONS}")
    kinds = [Kind.HV] * n_vehicles
    if composition == "partial":
        for i in PARTIAL_CAV_INDICES:
            if i < n_vehicles:
                kinds[i] = Kind.CAV
    if not 0 <= ego_index < n_vehicles:
        raise ScenarioValidationError(f"ego_index {ego_index} outside the string")
    kinds[ego_index] = Kind(ego)
    return tuple(kinds)


def _line_of(text: str, key: str):
    pat = re.compile(rf"^\s*(\[+\s*)?[\w.]*\b{re.escape(key)}\b")
    for i, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return i
    return None


def _check_keys(table, allowed, where, text):
    if not isinstance(table, dict):
        raise ScenarioParseError(f"'{where}' must be a table", field=where, line=_line_of(text, where))
    for key in table:
        if key not in allowed:
            name = f"{where}.{key}" if where else key
            raise ScenarioParseError(f"unknown key '{name}'", field=name, line=_line_of(text, key))


def _params(cls, table, where, text):
    allowed = {f.name for f in dataclasses.fields(cls)}
    _check_keys(table, allowed, where, text)
    try:
        return cls(**table)
    except (TypeError, ValueError) as exc:
        raise ScenarioValidationError(f"[{where}] {exc}") from exc


def loads_scenario(text: str) -> Scenario:
    """Parse scenario TOML text into a validated, fully defaulted Scenario."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ScenarioParseError(f"malformed TOML: {exc}", line=int(m.group(1)) if m else None) from exc
    _check_keys(doc, _TOP_KEYS, "", text)
    if "route" not in doc:
        raise ScenarioParseError("missing required table 'route'", field="route")
    route_t = doc["route"]
    _check_keys(route_t, _ROUTE_KEYS, "route", text)
    for key in ("total_length", "sub_segments"):
        if key not in route_t:
            raise ScenarioParseError(f"missing required key 'route.{key}'", field=f"route.{key}")
    signals = []
    for k, sig in enumerate(route_t.get("signals", [])):
        _check_keys(sig, _SIGNAL_KEYS, f"route.signals[{k}]", text)
        try:
            signals.append(SignalSpec(**sig))
        except InvalidRouteError as exc:
            raise ScenarioValidationError(str(exc)) from exc
        except TypeError as exc:
            raise ScenarioParseError(str(exc), field=f"route.signals[{k}]") from exc
    try:
        subs = tuple(SubSegment(float(a), float(b)) for a, b in route_t["sub_segments"])
    except (TypeError, ValueError) as exc:
        raise ScenarioParseError("sub_segments must be [length, speed_limit] pairs",
                                 field="route.sub_segments",
                                 line=_line_of(text, "sub_segments")) from exc
    try:
        route = RouteSpec(total_length=float(route_t["total_length"]), sub_segments=subs,
                          signals=tuple(signals), end_stop=route_t.get("end_stop"))
    except InvalidRouteError as exc:
        raise ScenarioValidationError(str(exc)) from exc

    planner = _params(PlannerParams, doc.get("planner", {}), "planner", text)
    idm = _params(IDMParams, doc.get("idm", {}), "idm", text)
    sim = _params(SimParams, doc.get("sim", {}), "sim", text)

    string_t = doc.get("string", {})
    _check_keys(string_t, _STRING_KEYS, "string", text)
    try:
        if "kinds" in string_t:
            kinds = tuple(Kind(k) for k in string_t["kinds"])
            ego_index = int(string_t.get("ego_index", len(kinds) - 1))
            composition = string_t.get("composition", "custom")
        else:
            n = int(string_t.get("n_vehicles", 15))
            ego_index = int(string_t.get("ego_index", n - 1))
            composition = string_t.get("composition", "no_cav")
            kinds = string_kinds(n, string_t.get("ego", "HV"), ego_index, composition)
    except ValueError as exc:
        if isinstance(exc, ScenarioValidationError):
            raise
        raise ScenarioValidationError(f"[string] {exc}") from exc
    return Scenario(route=route, kinds=kinds, ego_index=ego_index,
                    v2i_range=float(doc.get("v2i_range", 0.0)), seed=int(doc.get("seed", 0)),
                    name=str(doc.get("name", "")), case=str(doc.get("case", "")),
                    composition=composition, planner=planner, idm=idm, sim=sim)


def parse_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc}") from exc
    return loads_scenario(text)


def _scenario_dict(sc: Scenario) -> dict:
    route = {"total_length": sc.route.total_length,
             "sub_segments": [[s.length, s.speed_limit] for s in sc.route.sub_segments],
             "signals": [dataclasses.asdict(sig) for sig in sc.route.signals]}
    if sc.route.end_stop is not None:
        route["end_stop"] = sc.route.end_stop
    return {
        "name": sc.name,
        "case": sc.case,
        "seed": sc.seed,
        "v2i_range": sc.v2i_range,
        "string": {"kinds": [k.value for k in sc.kinds], "ego_index": sc.ego_index,
                   "composition": sc.composition},
        "route": route,
        "planner": dataclasses.asdict(sc.planner),
        "idm": dataclasses.asdict(sc.idm),
        "sim": dataclasses.asdict(sc.sim),
    }


def dumps_scenario(sc: Scenario) -> str:
    return tomli_w.dumps(_scenario_dict(sc))


def write_scenario(sc: Scenario, path) -> None:
    path = Path(path)
    try:
        path.write_text(dumps_scenario(sc))
    except OSError as exc:
        raise OSError(f"cannot write scenario to {path}: {exc}") from exc


def bundled_path(name: str) -> Path:
    """Path of a bundled data file (``peachtree``, ``synthetic``, ``sweep``)."""
    ref = resources.files("ecocorridor") / "data" / f"{name}.toml"
    path = Path(str(ref))
    if not path.is_file():
        raise FileNotFoundError(f"no bundled file named '{name}'")
    return path


def bundled_scenario(name: str, **overrides) -> Scenario:
    """Load a bundled route scenario; ``ego``, ``composition`` and
    ``ego_index`` overrides rebuild the string, the rest replace fields."""
    sc = parse_scenario(bundled_path(name))
    ego = overrides.pop("ego", None)
    comp = overrides.pop("composition", None)
    idx = overrides.pop("ego_index", None)
    if ego is not None or comp is not None or idx is not None:
        idx = sc.ego_index if idx is None else idx
        comp = sc.composition if comp is None else comp
        ego = sc.ego_kind if ego is None else ego
        overrides["kinds"] = string_kinds(len(sc.kinds), ego, idx, comp)
        overrides["ego_index"] = idx
        overrides["composition"] = comp
    return sc.with_(**overrides) if overrides else sc


def synthetic_route(seed: int = SYNTHETIC_SEED, total_length: float = 1500.0,
                    v_cap: float = 17.8) -> RouteSpec:
    """Randomized corridor: start light, four signals and an end stop sign.

    Signal spacing is at least 150 m; cycles are 80 to 110 s with 40 to
    60 % green and 3 to 4 s of amber. The start light has a 110 to 130 s
    cycle with 60 to 70 % green so the string clears it in one phase.
    """
    rng = np.random.default_rng(seed)

    def signal(pos, start=False):
        cycle = float(round(rng.uniform(80.0, 110.0)))
        green = float(round(rng.uniform(0.4, 0.6) * cycle))
        if start:
            # long enough to release the whole string in one phase
            cycle = float(round(rng.uniform(110.0, 130.0)))
            green = float(round(rng.uniform(0.6, 0.7) * cycle))
        amber = float(round(rng.uniform(3.0, 4.0)))
        # the start light is red at t = 0 and turns green 10 to 40 s later
        hi = min(40.0, cycle - green - amber) if start else cycle
        offset = float(round(rng.uniform(10.0 if start else 0.0, hi)))
        return SignalSpec(position=float(pos), cycle=cycle, green=green,
                          first_green_start=offset, amber=amber)

    start = signal(170.0, start=True)
    while True:
        pos = np.sort(np.round(rng.uniform(320.0, 1300.0, size=4), -1))
        if np.all(np.diff(np.concatenate([[170.0], pos, [1450.0]])) >= 150.0):
            break
    signals = (start,) + tuple(signal(p) for p in pos)
    return RouteSpec(total_length=total_length, sub_segments=(SubSegment(total_length, v_cap),),
                     signals=signals, end_stop=1450.0)
