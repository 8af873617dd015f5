"""Vehicle kinds and simulator parameter sets."""
from __future__ import annotations

import enum
from dataclasses import dataclass


class Kind(str, enum.Enum):
    HV = "HV"     # human driver (IDM)
    AV = "AV"     # automated, no signal preview
    CAV = "CAV"   # connected and automated, SPaT preview within V2I range

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class IDMParams:
    """Intelligent Driver Model tuned toward an aggressive urban driver."""

    v_desired: float = 17.8
    time_headway: float = 1.0
    jam_distance: float = 2.0
    a_max: float = 2.5
    b_comf: float = 3.0
    delta: float = 4.0
    jitter: float = 0.1   # relative spread of seeded per-driver variation

    def __post_init__(self):
        if min(self.v_desired, self.a_max, self.b_comf, self.delta) <= 0:
            raise ValueError("IDM speeds, accelerations and exponent must be positive")
        if self.time_headway < 0 or self.jam_distance < 0 or not 0 <= self.jitter < 1:
            raise ValueError("invalid IDM headway, jam distance or jitter")


@dataclass(frozen=True)
class SimParams:
    dt: float = 0.1
    a_min: float = -4.0
    a_max: float = 3.0
    vehicle_length: float = 5.0
    v_cap: float = 17.8
    ceiling_factor: float = 4.0
    stop_offset: float = 1.0      # vehicles halt this far before a stop line

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not (self.a_min < 0 < self.a_max):
            raise ValueError("actuation limits must bracket zero")
        if min(self.vehicle_length, self.v_cap, self.ceiling_factor) <= 0:
            raise ValueError("vehicle length, speed cap and ceiling factor must be positive")
