"""Surrogate fuel model and per-vehicle performance metrics.

The fuel rate is a transparent power-based polynomial

    rate = idle + c_v * v + c_va * v * max(a, 0) + c_v3 * v**3    [g/s]

standing in for rolling resistance, inertial traction power and
aerodynamic drag of a mid-size SUV. Braking recovers nothing. Absolute grams
are only indicative; compare controllers through ratios.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["FuelModel", "Metrics", "fuel_rate", "summarize", "count_braking_events", "count_stops"]

BRAKE_THRESHOLD = -0.5     # m/s^2
BRAKE_REFRACTORY = 1.0     # s
STOP_SPEED = 0.1           # m/s
MOVING_SPEED = 1.0         # m/s


@dataclass(frozen=True)
class FuelModel:
    # 1800 kg vehicle, rolling coefficient 0.01, CdA 0.8 m^2, 25 % efficiency,
    # 43 kJ/g fuel heating value
    idle: float = 0.30
    c_v: float = 0.0164
    c_va: float = 0.167
    c_v3: float = 4.47e-5

    def __post_init__(self):
        if min(self.idle, self.c_v, self.c_va, self.c_v3) < 0:
            raise ValueError("fuel model coefficients must be non-negative")

    def scaled(self, k: float) -> "FuelModel":
        return FuelModel(self.idle * k, self.c_v * k, self.c_va * k, self.c_v3 * k)


def fuel_rate(v, a, model: FuelModel = FuelModel()):
    """Fuel mass rate in g/s; accepts scalars or arrays."""
    v = np.maximum(np.asarray(v, dtype=float), 0.0)
    a_pos = np.maximum(np.asarray(a, dtype=float), 0.0)
    rate = model.idle + model.c_v * v + model.c_va * v * a_pos + model.c_v3 * v ** 3
    rate = np.maximum(rate, model.idle)
    return float(rate) if rate.ndim == 0 else rate


@dataclass(frozen=True)
class Metrics:
    fuel: float            # g
    travel_time: float     # s
    distance: float        # m
    braking_events: int
    stops: int
    effort: float          # integral of a**2 / 2, m^2/s^3

    @property
    def fuel_per_km(self) -> float:
        return self.fuel / (self.distance / 1000.0) if self.distance > 0 else float("nan")


def count_braking_events(t, a, threshold=BRAKE_THRESHOLD, refractory=BRAKE_REFRACTORY) -> int:
    """Onsets of ``a < threshold`` at least ``refractory`` seconds apart."""
    count = 0
    last = -np.inf
    below_prev = False
    for ti, ai in zip(t, a):
        below = ai < threshold
        if below and not below_prev and ti - last >= refractory:
            count += 1
            last = ti
        below_prev = below
    return count


def count_stops(v) -> int:
    """Number of times the vehicle comes to rest after having moved."""
    count = 0
    moving = False
    for vi in v:
        if vi > MOVING_SPEED:
            moving = True
        elif vi < STOP_SPEED and moving:
            count += 1
            moving = False
    return count


def _trapz(y, x):
    if len(x) < 2:
        return 0.0
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def summarize(log, window=None, vehicle: int | None = None, model: FuelModel = FuelModel()) -> Metrics:
    """Metrics of one vehicle over ``window = (t_start, t_end)``.

    ``log`` is a ``ScenarioLog``; ``vehicle`` is a column index and defaults
    to the ego. Samples after the vehicle has left the route (NaN) are
    dropped.
    """
    if window is None:
        window = log.window
    t_start, t_end = window
    if not t_end > t_start:
        raise ValueError("measurement window is empty")
    col = log.ego_index if vehicle is None else vehicle
    t = np.asarray(log.t)
    sel = (t >= t_start - 1e-9) & (t <= t_end + 1e-9)
    s = np.asarray(log.s)[sel, col]
    v = np.asarray(log.v)[sel, col]
    a = np.asarray(log.a)[sel, col]
    tt = t[sel]
    ok = np.isfinite(s)
    s, v, a, tt = s[ok], v[ok], a[ok], tt[ok]
    if len(tt) == 0:
        raise ValueError("no samples of this vehicle inside the window")
    rate = fuel_rate(v, a, model)
    return Metrics(
        fuel=_trapz(np.atleast_1d(rate), tt),
        travel_time=float(tt[-1] - tt[0]),
        distance=float(s[-1] - s[0]),
        braking_events=count_braking_events(tt, a),
        stops=count_stops(v),
        effort=_trapz(0.5 * a * a, tt),
    )
