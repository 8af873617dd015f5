"""Desired entering times and feasible / narrowed green windows.

Given a preview horizon and the fixed-time signal schedules of its
intersections, this module computes, per intersection:

* the desired entering time ``t_des`` obtained by cruising at the desired
  speed and snapping to the next usable green when the cruise arrival falls
  outside a margin-shrunk green phase,
* the feasible window ``[t_min, t_max]`` from a forward pass (cannot arrive
  faster than the speed limits allow) and a backward pass (must still reach
  the horizon end on time),
* the narrowed window ``[t_min_n, t_max_n]`` tightened by ``dt_des`` and
  ``dt_fea``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .corridor import PreviewHorizon, SignalSpec
from .errors import InfeasibleSpatError, InfeasibleWindowError

__all__ = [
    "PlannerParams",
    "GreenWindowSet",
    "desired_speed",
    "snap_to_green",
    "desired_entering_times",
    "feasible_green_windows",
    "narrowed_windows",
    "compute_green_windows",
]

_TOL = 1e-9


@dataclass(frozen=True)
class PlannerParams:
    """Tunable parameters of the two-level speed planner.

    The traffic-related triple ``(r_des, dt_des, dt_fea)`` defaults to the
    no-traffic tuning (0.9, 5, 20). Green margins, the desired time gap and
    the standstill distance are not given numerically by the method and are
    configurable defaults.
    """

    r_des: float = 0.9
    dt_des: float = 5.0
    dt_fea: float = 20.0
    dt_grn0: float = 2.0
    dt_grnf: float = 2.0
    delta_s_vp: float = 100.0
    t_st_prv: float = 3.0
    tau_des: float = 1.5
    s_s: float = 5.0
    v_des_cap: float = 17.8

    def __post_init__(self):
        for name in ("dt_des", "dt_fea", "dt_grn0", "dt_grnf", "delta_s_vp",
                     "tau_des", "s_s", "v_des_cap"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0 < self.r_des <= 1:
            raise ValueError("r_des must lie in (0, 1]")
        if not self.t_st_prv > 0:
            raise ValueError("t_st_prv must be positive")


@dataclass(frozen=True)
class GreenWindowSet:
    t0: float
    t_des: tuple[float, ...]     # N+1 entries, last one is the horizon end
    t_min: tuple[float, ...]     # N entries
    t_max: tuple[float, ...]
    t_min_n: tuple[float, ...]
    t_max_n: tuple[float, ...]
    v_des: float = float("nan")

    @property
    def n_signals(self) -> int:
        return len(self.t_min)

    @property
    def t_final(self) -> float:
        return self.t_des[-1]


def desired_speed(horizon: PreviewHorizon, params: PlannerParams) -> float:
    """``r_des`` times the horizon's average attainable speed, capped."""
    v_max_c = horizon.length / sum(horizon.xi_min)
    return min(params.r_des * v_max_c, params.v_des_cap)


def snap_to_green(signal: SignalSpec, arrival: float, dt_grn0: float, dt_grnf: float) -> float:
    """Entering time for a cruise arrival at ``arrival``.

    Arrivals inside ``[g + dt_grn0, g + green - dt_grnf]`` of the green
    starting at ``g`` are kept. Arrivals in the leading margin band wait for
    ``g + dt_grn0``; all others move to the next green start plus
    ``dt_grn0``.
    """
    lo, hi = dt_grn0, signal.green - dt_grnf
    if lo > hi + _TOL:
        raise InfeasibleSpatError(
            f"green of {signal.green} s is shorter than the margins {dt_grn0}+{dt_grnf} s")
    g = signal.last_green_start(arrival)
    offset = arrival - g
    if lo - _TOL <= offset <= hi + _TOL:
        return arrival
    if offset < lo:
        return g + lo
    return signal.next_green_start(arrival) + lo


def desired_entering_times(horizon: PreviewHorizon, params: PlannerParams,
                           t0: float | None = None) -> tuple[float, ...]:
    """Desired entering times ``t_des,1 .. t_des,N+1``."""
    t0 = horizon.t0 if t0 is None else t0
    v_des = desired_speed(horizon, params)
    if not v_des > 0:
        raise InfeasibleSpatError("desired speed is not positive")
    out = []
    prev = t0
    lengths = horizon.lengths
    for i, sig in enumerate(horizon.signals):
        prev = snap_to_green(sig, prev + lengths[i] / v_des, params.dt_grn0, params.dt_grnf)
        out.append(prev)
    out.append(prev + lengths[-1] / v_des)
    return tuple(out)


def feasible_green_windows(t_des, xi_min, t0: float):
    """Forward/backward feasible entering-time bounds.

    ``t_des`` and ``xi_min`` both have N+1 entries. Returns ``(t_min,
    t_max)`` with N entries each, or raises ``InfeasibleWindowError`` naming
    the first (1-based) intersection whose window is empty; index N+1 means
    the horizon end itself cannot be reached in time.
    """
    t_des = [float(x) for x in t_des]
    xi_min = [float(x) for x in xi_min]
    n = len(t_des) - 1
    if len(xi_min) != n + 1:
        raise ValueError("t_des and xi_min must have the same length")
    t_min = []
    prev = t0
    for i in range(n):
        prev = max(prev + xi_min[i], t_des[i])
        t_min.append(prev)
    t_max = [0.0] * n
    nxt = t_des[n]
    for i in range(n - 1, -1, -1):
        nxt = min(nxt - xi_min[i + 1], t_des[i])
        t_max[i] = nxt
    for i in range(n):
        if t_min[i] > t_max[i] + _TOL:
            raise InfeasibleWindowError(i + 1, t_min[i], t_max[i])
        if t_min[i] > t_max[i]:
            t_max[i] = t_min[i]
    last = t_min[-1] if n else t0
    if last + xi_min[n] > t_des[n] + _TOL:
        raise InfeasibleWindowError(n + 1, last + xi_min[n], t_des[n])
    return tuple(t_min), tuple(t_max)


def narrowed_windows(t_des, t_min, t_max, dt_des: float, dt_fea: float):
    """Tighten feasible windows toward early entering.

    ``t_min_n = max(t_des - dt_des, t_min)`` and
    ``t_max_n = min(t_min_n + dt_fea, t_max)``.
    """
    lo_out, hi_out = [], []
    for i, (td, lo, hi) in enumerate(zip(t_des, t_min, t_max)):
        lo_n = max(td - dt_des, lo)
        hi_n = min(lo_n + dt_fea, hi)
        if lo_n > hi_n + _TOL:
            raise InfeasibleWindowError(i + 1, lo_n, hi_n)
        lo_out.append(lo_n)
        hi_out.append(max(hi_n, lo_n))
    return tuple(lo_out), tuple(hi_out)


def compute_green_windows(horizon: PreviewHorizon, params: PlannerParams) -> GreenWindowSet:
    t_des = desired_entering_times(horizon, params)
    t_min, t_max = feasible_green_windows(t_des, horizon.xi_min, horizon.t0)
    t_min_n, t_max_n = narrowed_windows(t_des, t_min, t_max, params.dt_des, params.dt_fea)
    return GreenWindowSet(t0=horizon.t0, t_des=t_des, t_min=t_min, t_max=t_max,
                          t_min_n=t_min_n, t_max_n=t_max_n,
                          v_des=desired_speed(horizon, params))
