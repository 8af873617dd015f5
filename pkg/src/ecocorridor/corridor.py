"""Road, signal and preview-horizon model of a signalized corridor.

All positions are in meters along a single lane, all times in seconds.
Signals are fixed-time: a green phase starts every ``cycle`` seconds at
``first_green_start + k * cycle`` and is followed by amber and then red.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import HorizonExhaustedError, InvalidRouteError

__all__ = [
    "Phase",
    "TerminalKind",
    "SubSegment",
    "SignalSpec",
    "RouteSpec",
    "PreviewHorizon",
    "segment_min_travel_time",
    "signal_phase_at",
    "build_preview_horizon",
]

# tolerance used when comparing phase boundaries
_PHASE_EPS = 1e-9


class Phase(enum.Enum):
    GREEN = "G"
    AMBER = "A"
    RED = "R"


class TerminalKind(enum.Enum):
    FIXED_ZERO = "stop"   # stop sign: v(t_f) = 0
    FREE = "free"         # virtual point: v(t_f) free


@dataclass(frozen=True)
class SubSegment:
    length: float
    speed_limit: float


@dataclass(frozen=True)
class SignalSpec:
    position: float
    cycle: float
    green: float
    first_green_start: float = 0.0
    amber: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.green < self.cycle):
            raise InvalidRouteError(
                f"signal at {self.position} m: need 0 < green < cycle, "
                f"got green={self.green}, cycle={self.cycle}")
        if self.amber < 0 or self.green + self.amber > self.cycle:
            raise InvalidRouteError(
                f"signal at {self.position} m: amber={self.amber} does not fit "
                f"in the non-green part of the cycle")

    def cycle_offset(self, t: float) -> float:
        """Time elapsed since the most recent green start, in [0, cycle)."""
        x = (t - self.first_green_start) % self.cycle
        # absorb round-off just below a full cycle
        if self.cycle - x < _PHASE_EPS:
            x = 0.0
        return x

    def last_green_start(self, t: float) -> float:
        return t - self.cycle_offset(t)

    def next_green_start(self, t: float) -> float:
        """Smallest green start time >= t."""
        off = self.cycle_offset(t)
        if off == 0.0:
            return t
        return t - off + self.cycle

    def green_remaining(self, t: float) -> float:
        """Seconds of green left at time ``t`` (0 when not green)."""
        off = self.cycle_offset(t)
        return max(self.green - off, 0.0)


def signal_phase_at(signal: SignalSpec, t: float) -> Phase:
    off = signal.cycle_offset(t)
    if off < signal.green:
        return Phase.GREEN
    if off < signal.green + signal.amber:
        return Phase.AMBER
    return Phase.RED


def segment_min_travel_time(sub_segments) -> float:
    """Travel time of a road segment driven exactly at its speed limits.

    ``sub_segments`` is an iterable of ``SubSegment`` or ``(length, limit)``
    pairs. An empty sequence is a zero-length segment and takes no time.
    """
    total = 0.0
    for sub in sub_segments:
        length, limit = (sub.length, sub.speed_limit) if isinstance(sub, SubSegment) else sub
        if not limit > 0:
            raise InvalidRouteError(f"speed limit must be positive, got {limit}")
        if length < 0:
            raise InvalidRouteError(f"sub-segment length must be non-negative, got {length}")
        total += length / limit
    return total


@dataclass(frozen=True)
class RouteSpec:
    total_length: float
    sub_segments: tuple[SubSegment, ...]
    signals: tuple[SignalSpec, ...] = ()
    end_stop: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "sub_segments", tuple(
            s if isinstance(s, SubSegment) else SubSegment(*s) for s in self.sub_segments))
        object.__setattr__(self, "signals", tuple(self.signals))
        if not self.sub_segments or not self.total_length > 0:
            raise InvalidRouteError("route is empty")
        for sub in self.sub_segments:
            if not sub.length > 0:
                raise InvalidRouteError(f"sub-segment length must be positive, got {sub.length}")
            if not sub.speed_limit > 0:
                raise InvalidRouteError(f"speed limit must be positive, got {sub.speed_limit}")
        covered = sum(s.length for s in self.sub_segments)
        if not math.isclose(covered, self.total_length, rel_tol=1e-9, abs_tol=1e-6):
            raise InvalidRouteError(
                f"sub-segments cover {covered} m but total_length is {self.total_length} m")
        prev = -math.inf
        for sig in self.signals:
            if not sig.position > prev:
                raise InvalidRouteError("signal positions must be strictly increasing")
            if not 0 <= sig.position <= self.total_length:
                raise InvalidRouteError(f"signal at {sig.position} m lies outside the route")
            prev = sig.position
        if self.end_stop is not None:
            if not self.end_stop <= self.total_length:
                raise InvalidRouteError("end stop lies beyond the route end")
            if self.signals and not self.end_stop > self.signals[-1].position:
                raise InvalidRouteError("end stop must lie beyond the last signal")

    @property
    def max_speed_limit(self) -> float:
        return max(s.speed_limit for s in self.sub_segments)

    def speed_limit_at(self, s: float) -> float:
        edge = 0.0
        for sub in self.sub_segments:
            edge += sub.length
            if s < edge:
                return sub.speed_limit
        return self.sub_segments[-1].speed_limit

    def sub_segments_between(self, a: float, b: float) -> list[SubSegment]:
        """Clip the speed-limit profile to ``[a, b]``.

        Beyond the route end the last speed limit is extended, so virtual
        horizon points past ``total_length`` stay well defined.
        """
        out = []
        lo = 0.0
        for sub in self.sub_segments:
            hi = lo + sub.length
            x0, x1 = max(lo, a), min(hi, b)
            if x1 > x0:
                out.append(SubSegment(x1 - x0, sub.speed_limit))
            lo = hi
        if b > lo:
            out.append(SubSegment(b - max(lo, a), self.sub_segments[-1].speed_limit))
        return out


@dataclass(frozen=True)
class PreviewHorizon:
    """Boundary structure of one long-term planning problem.

    ``boundaries`` holds s_1 .. s_{N+1}; the first N entries are in-range
    signal stop lines and the last is either the stop sign or a virtual
    point. ``xi_min`` has N+1 entries, one per segment.
    """

    t0: float
    s0: float
    v0: float
    boundaries: tuple[float, ...]
    xi_min: tuple[float, ...]
    terminal: TerminalKind
    signals: tuple[SignalSpec, ...] = ()
    delta_s_vp: float = 100.0
    v_final: float = 0.0

    def __post_init__(self):
        if len(self.boundaries) != len(self.signals) + 1 or len(self.xi_min) != len(self.boundaries):
            raise ValueError("boundaries, xi_min and signals have inconsistent lengths")
        prev = self.s0
        for s in self.boundaries:
            if not s > prev:
                raise ValueError("horizon boundaries must increase strictly from s0")
            prev = s

    @property
    def n_signals(self) -> int:
        return len(self.signals)

    @property
    def lengths(self) -> tuple[float, ...]:
        pts = (self.s0,) + self.boundaries
        return tuple(b - a for a, b in zip(pts[:-1], pts[1:]))

    @property
    def length(self) -> float:
        return self.boundaries[-1] - self.s0

    @property
    def is_virtual(self) -> bool:
        return self.terminal is TerminalKind.FREE


def build_preview_horizon(route: RouteSpec, ego, v2i_range: float,
                          delta_s_vp: float = 100.0) -> PreviewHorizon:
    """Collect the in-range signals ahead of the ego and close the horizon.

    ``ego`` is ``(s0, v0, t0)``. A signal is connected when it lies strictly
    ahead and within ``v2i_range``. With at least one connected signal the
    horizon ends at the stop sign if no unconnected signal sits between the
    last connected one and the stop sign; otherwise a virtual point
    ``delta_s_vp`` past the last connected signal (or past the ego when no
    signal is connected) closes it.
    """
    if route is None or not route.sub_segments:
        raise InvalidRouteError("route is empty")
    s0, v0, t0 = ego
    if v2i_range < 0:
        raise ValueError("v2i_range must be non-negative")
    if s0 >= route.total_length:
        raise HorizonExhaustedError(
            f"ego at {s0} m is at or beyond the route end ({route.total_length} m)")

    ahead = [sig for sig in route.signals if sig.position > s0]
    connected = tuple(sig for sig in ahead if sig.position - s0 <= v2i_range)
    n = len(connected)

    terminal = TerminalKind.FREE
    if n and route.end_stop is not None and route.end_stop > connected[-1].position:
        unconnected_between = any(connected[-1].position < sig.position < route.end_stop
                                  for sig in ahead)
        if not unconnected_between:
            terminal = TerminalKind.FIXED_ZERO
    if terminal is TerminalKind.FIXED_ZERO:
        s_end = route.end_stop
    else:
        s_end = (connected[-1].position if n else s0) + delta_s_vp

    boundaries = tuple(sig.position for sig in connected) + (s_end,)
    pts = (s0,) + boundaries
    xi_min = tuple(segment_min_travel_time(route.sub_segments_between(a, b))
                   for a, b in zip(pts[:-1], pts[1:]))
    return PreviewHorizon(t0=t0, s0=s0, v0=v0, boundaries=boundaries, xi_min=xi_min,
                          terminal=terminal, signals=connected, delta_s_vp=delta_s_vp,
                          v_final=0.0)
