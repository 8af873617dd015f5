"""Piecewise-linear acceleration trajectory stitched from a plan."""
from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass

from .outer import FFSolution
from .pmp import SegmentPolynomial

__all__ = ["PwLinearAccelTrajectory", "build_ff_trajectory", "ff_next_acceleration"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PwLinearAccelTrajectory:
    pieces: tuple[SegmentPolynomial, ...]

    @property
    def t_start(self) -> float:
        return self.pieces[0].t_start

    @property
    def t_end(self) -> float:
        return self.pieces[-1].t_end

    @property
    def knots(self):
        return [p.t_start for p in self.pieces] + [self.t_end]

    def piece_at(self, t: float) -> SegmentPolynomial:
        starts = [p.t_start for p in self.pieces]
        i = bisect.bisect_right(starts, t) - 1
        return self.pieces[min(max(i, 0), len(self.pieces) - 1)]

    def accel(self, t: float) -> float:
        if t > self.t_end:
            return 0.0
        return self.piece_at(max(t, self.t_start)).accel(max(t, self.t_start))

    def velocity(self, t: float) -> float:
        t = min(max(t, self.t_start), self.t_end)
        return self.piece_at(t).velocity(t)

    def position(self, t: float) -> float:
        if t > self.t_end:
            last = self.pieces[-1]
            return last.position(last.t_end) + last.velocity(last.t_end) * (t - last.t_end)
        t = max(t, self.t_start)
        return self.piece_at(t).position(t)

    def effort(self) -> float:
        return sum(p.effort() for p in self.pieces)

    def max_velocity(self) -> float:
        return max(p.max_velocity() for p in self.pieces)

    def min_velocity(self) -> float:
        return min(p.min_velocity() for p in self.pieces)


def build_ff_trajectory(solution: FFSolution, v_max: float | None = None) -> PwLinearAccelTrajectory:
    """Stitch the per-segment closed-form solutions into one trajectory.

    When ``v_max`` is given a planned speed above it is logged, not rejected.
    """
    pieces = tuple(SegmentPolynomial.from_boundary(t0, s0, v0, t1, s1, v1)
                   for s0, v0, t0, s1, v1, t1 in solution.boundary_conditions())
    traj = PwLinearAccelTrajectory(pieces)
    if v_max is not None and traj.max_velocity() > v_max + 1e-9:
        log.debug("planned speed %.2f m/s exceeds the %.2f m/s limit", traj.max_velocity(), v_max)
    return traj


def ff_next_acceleration(traj: PwLinearAccelTrajectory, t: float) -> float:
    """Planned control at ``t``; zero once the plan has ended."""
    return traj.accel(t)
