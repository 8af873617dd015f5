"""Closed-form minimum-effort double-integrator segment.

For one segment with boundary speeds ``(v0, v1)``, length ``l`` and
duration ``xi`` the effort-optimal control is linear in time,
``u(tau) = u0 + (u1 - u0) * tau / xi``, with ``u = -lambda2``.
"""
from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "segment_cost",
    "segment_cost_printed",
    "segment_cost_dxi",
    "segment_costates",
    "segment_controls",
    "SegmentPolynomial",
]


def _check_xi(xi):
    if not xi > 0:
        raise ValueError(f"segment duration must be positive, got {xi}")


def segment_cost(v_prev, v_next, length, xi):
    """Minimum of the integral of u**2 / 2 over one segment."""
    _check_xi(xi)
    return (2.0 * (v_prev * v_prev + v_prev * v_next + v_next * v_next) / xi
            - 6.0 * length * (v_prev + v_next) / xi ** 2
            + 6.0 * length * length / xi ** 3)


def segment_cost_printed(v_prev, v_next, length, xi):
    """Cost with the squared speeds in the middle term, as typeset in print.

    Kept only to document the discrepancy; it does not vanish for constant
    speed driving and is never used for planning.
    """
    _check_xi(xi)
    return (2.0 * (v_prev * v_prev + v_prev * v_next + v_next * v_next) / xi
            - 6.0 * length * (v_prev * v_prev + v_next * v_next) / xi ** 2
            + 6.0 * length * length / xi ** 3)


def segment_cost_dxi(v_prev, v_next, length, xi):
    """Partial derivative of ``segment_cost`` with respect to ``xi``."""
    return (-2.0 * (v_prev * v_prev + v_prev * v_next + v_next * v_next) / xi ** 2
            + 12.0 * length * (v_prev + v_next) / xi ** 3
            - 18.0 * length * length / xi ** 4)


def segment_costates(v_prev, v_next, length, xi):
    """Return ``(lambda1, lambda2_start, lambda2_end)`` on one segment."""
    _check_xi(xi)
    lam1 = -12.0 * length / xi ** 3 + 6.0 * (v_prev + v_next) / xi ** 2
    lam2_start = -6.0 * length / xi ** 2 + 2.0 * (2.0 * v_prev + v_next) / xi
    lam2_end = 6.0 * length / xi ** 2 - 2.0 * (v_prev + 2.0 * v_next) / xi
    return lam1, lam2_start, lam2_end


def segment_controls(v_prev, v_next, length, xi):
    """Control at the segment start and end, ``(u0, u1)``."""
    _, l2s, l2e = segment_costates(v_prev, v_next, length, xi)
    return -l2s, -l2e


@dataclass(frozen=True)
class SegmentPolynomial:
    """Cubic position / quadratic speed / linear control on ``[t_start, t_end]``."""

    t_start: float
    t_end: float
    s_start: float
    v_start: float
    u_start: float
    u_end: float

    @classmethod
    def from_boundary(cls, t_start, s_start, v_start, t_end, s_end, v_end):
        xi = t_end - t_start
        u0, u1 = segment_controls(v_start, v_end, s_end - s_start, xi)
        return cls(t_start, t_end, s_start, v_start, u0, u1)

    @property
    def duration(self):
        return self.t_end - self.t_start

    @property
    def jerk(self):
        return (self.u_end - self.u_start) / self.duration

    def accel(self, t):
        return self.u_start + self.jerk * (t - self.t_start)

    def velocity(self, t):
        tau = t - self.t_start
        return self.v_start + self.u_start * tau + 0.5 * self.jerk * tau * tau

    def position(self, t):
        tau = t - self.t_start
        return (self.s_start + self.v_start * tau + 0.5 * self.u_start * tau * tau
                + self.jerk * tau ** 3 / 6.0)

    def effort(self):
        return self.duration * (self.u_start ** 2 + self.u_start * self.u_end + self.u_end ** 2) / 6.0

    def min_velocity(self):
        """Smallest speed reached on the segment."""
        cands = [self.v_start, self.velocity(self.t_end)]
        if self.jerk != 0.0:
            tau = -self.u_start / self.jerk
            if 0.0 < tau < self.duration:
                cands.append(self.velocity(self.t_start + tau))
        return min(cands)

    def max_velocity(self):
        cands = [self.v_start, self.velocity(self.t_end)]
        if self.jerk != 0.0:
            tau = -self.u_start / self.jerk
            if 0.0 < tau < self.duration:
                cands.append(self.velocity(self.t_start + tau))
        return max(cands)
