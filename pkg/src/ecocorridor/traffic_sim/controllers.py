"""Longitudinal controllers of the three vehicle kinds.

* HV: Intelligent Driver Model; a stop line that must not be passed acts as
  a stationary virtual leader.
* AV: the car-following layer against the real leader and against a
  stationary virtual vehicle at a non-passable stop line, combined by
  ``min`` with a receding free-flow plan that has no signal preview.
* CAV: the full two-level planner with SPaT preview of the signals inside
  its V2I range; it degrades to the AV law when the plan is infeasible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..cf_planner import car_following, ensemble
from ..corridor import Phase, RouteSpec, SignalSpec, build_preview_horizon, signal_phase_at
from ..errors import EcoCorridorError
from ..ff_planner import build_ff_trajectory, ff_next_acceleration, outer_optimize
from ..green_window import PlannerParams, compute_green_windows
from .params import IDMParams, Kind, SimParams

__all__ = [
    "Obstacle",
    "idm_acceleration",
    "may_pass_signal",
    "stop_obstacle",
    "hv_acceleration",
    "av_acceleration",
    "cav_step",
    "CavDecision",
]

# comfortable acceleration assumed when judging whether a green can be cleared
A_CLEAR = 1.5
# green time kept in reserve when committing to pass
CLEAR_MARGIN = 0.5
# braking level beyond which a stop before the line is considered impossible
B_COMMIT = 3.5
# only stop lines this close are considered
LOOKAHEAD = 300.0
# SPaT-informed pass: arrive at least this long after green start / before its end
ARRIVAL_MARGIN = 1.0
# planned speeds below this count as a reversing (non-monotone) plan
MONOTONE_TOL = 1e-6


@dataclass(frozen=True)
class Obstacle:
    """A stationary point the vehicle front must stop ``stop_offset`` short of."""

    position: float
    kind: str          # "signal" or "stop"


def idm_acceleration(p: IDMParams, v: float, gap: float | None, v_lead: float = 0.0) -> float:
    free = 1.0 - (v / p.v_desired) ** p.delta
    if gap is None:
        return p.a_max * free
    dv = v - v_lead
    s_star = p.jam_distance + max(0.0, v * p.time_headway + v * dv / (2.0 * math.sqrt(p.a_max * p.b_comf)))
    gap = max(gap, 1e-3)
    return p.a_max * (free - (s_star / gap) ** 2)


def _reach(v: float, r: float, v_cap: float) -> float:
    """Distance covered in ``r`` seconds accelerating at ``A_CLEAR`` up to ``v_cap``."""
    if r <= 0:
        return 0.0
    t1 = max(0.0, (v_cap - v) / A_CLEAR)
    if t1 >= r:
        return v * r + 0.5 * A_CLEAR * r * r
    return v * t1 + 0.5 * A_CLEAR * t1 * t1 + v_cap * (r - t1)


def may_pass_signal(sig: SignalSpec, t: float, d: float, v: float, v_cap: float,
                    planned: float | None = None) -> bool:
    """Whether a vehicle ``d`` meters before the line may keep going.

    On green the vehicle commits if it can clear before the green ends (with
    a margin) or can no longer stop. Off green only a vehicle with SPaT
    preview may continue, and only when its current plan enters the
    intersection at ``planned`` well inside a green phase.
    """
    if signal_phase_at(sig, t) is Phase.GREEN:
        r = sig.green_remaining(t) - CLEAR_MARGIN
        if d <= _reach(v, r, v_cap):
            return True
        return d < v * v / (2.0 * B_COMMIT)
    if planned is None or planned < t:
        return False
    off = sig.cycle_offset(planned)
    return ARRIVAL_MARGIN <= off <= sig.green - ARRIVAL_MARGIN


def stop_obstacle(route: RouteSpec, s: float, v: float, t: float, v_cap: float,
                  planned=None, stop_served: bool = False) -> Obstacle | None:
    """Nearest stop line ahead the vehicle has to halt at, if any.

    ``planned`` maps the positions of signals whose SPaT the vehicle receives
    to the planned entering times. The end stop sign counts until the vehicle
    has served it.
    """
    planned = planned or {}
    for sig in route.signals:
        d = sig.position - s
        if d <= 0:
            continue
        if d > LOOKAHEAD:
            break
        if not may_pass_signal(sig, t, d, v, v_cap, planned.get(sig.position)):
            return Obstacle(sig.position, "signal")
    if route.end_stop is not None and not stop_served and route.end_stop > s:
        if route.end_stop - s <= LOOKAHEAD:
            return Obstacle(route.end_stop, "stop")
    return None


def hv_acceleration(p: IDMParams, route: RouteSpec, ego, leader, t: float, sim: SimParams,
                    stop_served: bool = False) -> float:
    """IDM command against the leader and the next non-passable stop line.

    ``ego`` and ``leader`` are ``VehicleState``-like objects (``s``, ``v``,
    ``a``, ``length``); ``leader`` may be ``None``.
    """
    acc = idm_acceleration(p, ego.v, None)
    if leader is not None:
        gap = leader.s - leader.length - ego.s
        acc = min(acc, idm_acceleration(p, ego.v, gap, leader.v))
    obs = stop_obstacle(route, ego.s, ego.v, t, sim.v_cap, stop_served=stop_served)
    if obs is not None:
        gap = obs.position - sim.stop_offset - ego.s + p.jam_distance
        acc = min(acc, idm_acceleration(p, ego.v, gap, 0.0))
    return acc


def _cf_accel(params: PlannerParams, ego, pv, v_des: float) -> float:
    sol = car_following(ego.s, ego.v, pv, v_des=v_des, t_st_prv=params.t_st_prv,
                        tau_des=params.tau_des, s_s=params.s_s)
    return math.inf if sol is None else sol.accel


def _leader_pv(leader):
    if leader is None:
        return None
    return (leader.s - leader.length, leader.v, leader.a)


def _obstacle_accel(params: PlannerParams, ego, obs: Obstacle | None, sim: SimParams) -> float:
    if obs is None:
        return math.inf
    pv = (obs.position - sim.stop_offset + params.s_s, 0.0, 0.0)
    return _cf_accel(params, ego, pv, sim.v_cap)


@dataclass
class CavDecision:
    accel: float
    a_ff: float
    a_cf: float
    a_stop: float
    n_signals: int = 0
    fallback: bool = False
    reason: str = ""
    plan: object = field(default=None, repr=False)


def _free_flow_accel(params: PlannerParams, route: RouteSpec, ego, t: float, v2i_range: float,
                     sim: SimParams):
    horizon = build_preview_horizon(route, (ego.s, ego.v, t), v2i_range, params.delta_s_vp)
    windows = compute_green_windows(horizon, params)
    sol = outer_optimize(horizon, windows)
    traj = build_ff_trajectory(sol, v_max=sim.v_cap)
    return ff_next_acceleration(traj, t), horizon, sol, traj


def _trusted_entries(horizon, sol, traj) -> dict:
    """Planned entering times of the connected signals the plan reaches
    monotonically; a plan whose speed dips below zero would overshoot the
    line early and is not trusted from that segment on."""
    out = {}
    for i, sig in enumerate(horizon.signals):
        if traj.pieces[i].min_velocity() < -MONOTONE_TOL:
            break
        out[sig.position] = sol.t_ent[i + 1]
    return out


def av_acceleration(params: PlannerParams, route: RouteSpec, ego, leader, t: float, sim: SimParams,
                    stop_served: bool = False) -> float:
    """Automated driving without signal preview."""
    return cav_step(params, route, ego, leader, t, sim, v2i_range=0.0,
                    stop_served=stop_served).accel


def cav_step(params: PlannerParams, route: RouteSpec, ego, leader, t: float, sim: SimParams,
             v2i_range: float, stop_served: bool = False) -> CavDecision:
    """One control step of the two-level planner for a connected vehicle."""
    fallback = False
    reason = ""
    n = 0
    sol = None
    try:
        a_ff, horizon, sol, traj = _free_flow_accel(params, route, ego, t, v2i_range, sim)
        n = horizon.n_signals
        planned = _trusted_entries(horizon, sol, traj)
    except EcoCorridorError as exc:
        fallback = True
        reason = f"{type(exc).__name__}: {exc}"
        a_ff, _, sol, _ = _free_flow_accel(params, route, ego, t, 0.0, sim)
        planned = {}
    a_cf = _cf_accel(params, ego, _leader_pv(leader), sim.v_cap)
    obs = stop_obstacle(route, ego.s, ego.v, t, sim.v_cap, planned=planned,
                        stop_served=stop_served)
    a_stop = _obstacle_accel(params, ego, obs, sim)
    acc = ensemble(a_ff, min(a_cf, a_stop))
    return CavDecision(acc, a_ff, a_cf, a_stop, n, fallback, reason, sol)


def command(kind: Kind, *, planner: PlannerParams, idm: IDMParams, route: RouteSpec, ego, leader,
            t: float, sim: SimParams, v2i_range: float, stop_served: bool):
    """Dispatch to the controller of ``kind``; returns ``(accel, CavDecision | None)``."""
    if kind is Kind.HV:
        return hv_acceleration(idm, route, ego, leader, t, sim, stop_served), None
    dec = cav_step(planner, route, ego, leader, t, sim,
                   v2i_range=v2i_range if kind is Kind.CAV else 0.0, stop_served=stop_served)
    return dec.accel, dec
