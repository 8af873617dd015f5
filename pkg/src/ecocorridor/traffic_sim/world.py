"""World state, synchronous stepping and scenario execution."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..corridor import Phase, RouteSpec, signal_phase_at
from ..errors import SimulationTimeout
from ..green_window import PlannerParams
from .controllers import command
from .params import IDMParams, Kind, SimParams

__all__ = ["VehicleState", "Event", "WorldState", "ScenarioLog", "step", "initial_world",
           "run_scenario", "bumper_gaps"]

# a stopped vehicle this close to the stop sign (beyond the halt offset) has served it
SERVE_SPEED = 0.2
SERVE_SLACK = 2.0
# share of the distance to the end stop that closes the measurement window
FINISH_SHARE = 0.99


@dataclass(frozen=True)
class VehicleState:
    id: int
    s: float
    v: float
    a: float
    kind: Kind
    v2i_range: float = 0.0
    length: float = 5.0
    idm: IDMParams = field(default_factory=IDMParams, repr=False)
    a_cmd: float = 0.0
    stop_served: bool = False
    active: bool = True


@dataclass(frozen=True)
class Event:
    t: float
    kind: str          # "collision", "red_crossing", "fallback"
    vehicle: int
    detail: str = ""


@dataclass(frozen=True)
class WorldState:
    t: float
    vehicles: tuple[VehicleState, ...]     # leader first
    route: RouteSpec
    sim: SimParams
    planner: PlannerParams
    events: tuple[Event, ...] = ()

    def phases(self):
        return tuple(signal_phase_at(sig, self.t) for sig in self.route.signals)

    def leader_of(self, i: int):
        for j in range(i - 1, -1, -1):
            if self.vehicles[j].active:
                return self.vehicles[j]
        return None


def bumper_gaps(world: WorldState):
    """Front-to-rear gaps of consecutive active vehicles, follower order."""
    out = []
    for i, veh in enumerate(world.vehicles):
        if not veh.active:
            continue
        lead = world.leader_of(i)
        if lead is not None:
            out.append(lead.s - lead.length - veh.s)
    return out


def _red_crossings(route: RouteSpec, s_old: float, s_new: float, t: float, dt: float):
    for sig in route.signals:
        if s_old < sig.position <= s_new:
            t_c = t + dt * (sig.position - s_old) / (s_new - s_old)
            if signal_phase_at(sig, t_c) is not Phase.GREEN:
                yield sig, t_c


def step(world: WorldState, dt: float) -> WorldState:
    """Advance the world by ``dt`` with every controller seeing the prior state."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    sim = world.sim
    route = world.route
    t = world.t
    events = list(world.events)
    cmds = []
    for i, veh in enumerate(world.vehicles):
        if not veh.active:
            cmds.append(0.0)
            continue
        acc, dec = command(veh.kind, planner=world.planner, idm=veh.idm, route=route, ego=veh,
                           leader=world.leader_of(i), t=t, sim=sim, v2i_range=veh.v2i_range,
                           stop_served=veh.stop_served)
        if dec is not None and dec.fallback:
            events.append(Event(t, "fallback", veh.id, dec.reason))
        cmds.append(acc)

    new = []
    for veh, acc in zip(world.vehicles, cmds):
        if not veh.active:
            new.append(veh)
            continue
        a = min(max(acc, sim.a_min), sim.a_max)
        v = min(max(veh.v + a * dt, 0.0), sim.v_cap)
        a_eff = (v - veh.v) / dt
        s = veh.s + v * dt
        for sig, t_c in _red_crossings(route, veh.s, s, t, dt):
            events.append(Event(t_c, "red_crossing", veh.id, f"signal at {sig.position} m"))
        served = veh.stop_served
        if route.end_stop is not None and not served:
            if v < SERVE_SPEED and route.end_stop - s <= sim.stop_offset + SERVE_SLACK:
                served = True
        active = s <= route.total_length
        new.append(replace(veh, s=s, v=v, a=a_eff, a_cmd=acc if math.isfinite(acc) else a,
                           stop_served=served, active=active))

    out = replace(world, t=t + dt, vehicles=tuple(new), events=tuple(events))
    for i, veh in enumerate(out.vehicles):
        lead = out.leader_of(i) if veh.active else None
        if lead is not None and lead.s - lead.length - veh.s <= 0:
            events.append(Event(out.t, "collision", veh.id, f"with vehicle {lead.id}"))
    if len(events) != len(out.events):
        out = replace(out, events=tuple(events))
    return out


def initial_world(scenario) -> WorldState:
    """The vehicle string at rest behind the start light (``signals[0]``).

    HV parameters are jittered with the scenario seed.
    """
    route = scenario.route
    sim = scenario.sim
    if not route.signals:
        raise ValueError("scenario route needs a start light")
    rng = np.random.default_rng(scenario.seed)
    base = scenario.idm
    gap = max(scenario.planner.s_s, base.jam_distance)
    s = route.signals[0].position - sim.stop_offset
    vehicles = []
    for i, kind in enumerate(scenario.kinds):
        k = 1.0 + base.jitter * rng.uniform(-1.0, 1.0, size=3)
        idm = replace(base, v_desired=min(base.v_desired * k[0], sim.v_cap),
                      time_headway=base.time_headway * k[1], a_max=base.a_max * k[2])
        vehicles.append(VehicleState(id=i, s=s, v=0.0, a=0.0, kind=kind,
                                     v2i_range=scenario.v2i_range if kind is Kind.CAV else 0.0,
                                     length=sim.vehicle_length, idm=idm))
        s -= sim.vehicle_length + gap
    return WorldState(t=0.0, vehicles=tuple(vehicles), route=route, sim=sim,
                      planner=scenario.planner)


@dataclass
class ScenarioLog:
    """Per-step records of a run.

    ``s``, ``v``, ``a`` and ``a_cmd`` are ``(steps, vehicles)`` arrays;
    positions of vehicles that have left the route are NaN. ``phases`` holds
    one phase letter per step and signal.
    """

    t: np.ndarray
    s: np.ndarray
    v: np.ndarray
    a: np.ndarray
    a_cmd: np.ndarray
    phases: list
    events: tuple
    ego_index: int
    window: tuple
    kinds: tuple
    scenario: object = None
    completed: bool = True

    @property
    def n_steps(self) -> int:
        return len(self.t)

    @property
    def n_vehicles(self) -> int:
        return self.s.shape[1] if self.s.ndim == 2 else 0

    def events_of(self, kind: str):
        return [e for e in self.events if e.kind == kind]

    @property
    def collisions(self) -> int:
        return len(self.events_of("collision"))

    @property
    def red_crossings(self) -> int:
        return len(self.events_of("red_crossing"))


class _Recorder:
    def __init__(self):
        self.t, self.s, self.v, self.a, self.a_cmd, self.phases = [], [], [], [], [], []

    def add(self, world: WorldState):
        self.t.append(world.t)
        self.s.append([veh.s if veh.active else math.nan for veh in world.vehicles])
        self.v.append([veh.v if veh.active else math.nan for veh in world.vehicles])
        self.a.append([veh.a if veh.active else math.nan for veh in world.vehicles])
        self.a_cmd.append([veh.a_cmd if veh.active else math.nan for veh in world.vehicles])
        self.phases.append("".join(p.value for p in world.phases()))

    def log(self, world, scenario, window, completed):
        m = len(world.vehicles)
        arr = lambda x: np.asarray(x, dtype=float).reshape(len(self.t), m)  # noqa: E731
        return ScenarioLog(t=np.asarray(self.t), s=arr(self.s), v=arr(self.v), a=arr(self.a),
                           a_cmd=arr(self.a_cmd), phases=list(self.phases), events=world.events,
                           ego_index=scenario.ego_index, window=window,
                           kinds=tuple(veh.kind for veh in world.vehicles), scenario=scenario,
                           completed=completed)


def run_scenario(scenario) -> ScenarioLog:
    """Run until the ego has covered 99 % of its distance to the end stop.

    The measurement window opens at the first green of the start light. A
    run that has not finished within ``ceiling_factor`` times the free-flow
    traversal time after the window opens raises ``SimulationTimeout`` with
    the partial log attached.
    """
    world = initial_world(scenario)
    route = scenario.route
    dt = scenario.sim.dt
    ego0 = world.vehicles[scenario.ego_index]
    target = route.end_stop if route.end_stop is not None else route.total_length
    s_finish = ego0.s + FINISH_SHARE * (target - ego0.s)
    t_open = route.signals[0].next_green_start(0.0)
    t_ceiling = t_open + scenario.sim.ceiling_factor * (target - ego0.s) / scenario.sim.v_cap

    rec = _Recorder()
    rec.add(world)
    k = 0
    while True:
        ego = world.vehicles[scenario.ego_index]
        if ego.s >= s_finish and world.t >= t_open:
            return rec.log(world, scenario, (t_open, world.t), True)
        if world.t > t_ceiling:
            log = rec.log(world, scenario, (t_open, world.t), False)
            raise SimulationTimeout(
                f"ego at {ego.s:.1f} m of {s_finish:.1f} m when the time ceiling "
                f"{t_ceiling:.1f} s was reached", log)
        k += 1
        world = step(world, dt)
        # re-anchor the clock to avoid accumulating round-off
        world = replace(world, t=round(k * dt, 10))
        rec.add(world)
