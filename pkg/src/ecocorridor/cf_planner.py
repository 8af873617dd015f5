"""Short-term car-following layer and the min-ensemble.

Over a short preview ``T`` the ego minimizes effort subject to ending
exactly at the desired gap behind the predicted preceding-vehicle (PV)
position. The effort of the closed-form segment is quadratic in the
terminal state, so the constrained problem has an explicit solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SolverError

__all__ = [
    "PVPrediction",
    "CFSolution",
    "predict_preceding_position",
    "cf_cost_coefficients",
    "solve_cf_terminal",
    "cf_next_acceleration",
    "car_following",
    "ensemble",
    "NO_CONSTRAINT",
]

# zero-acceleration threshold for the PV prediction
A_EPS = 1e-6
NO_CONSTRAINT = math.inf


@dataclass(frozen=True)
class PVPrediction:
    s_p0: float
    v_p0: float
    a_p0: float
    v_m: float
    t_m: float
    s_p_final: float


@dataclass(frozen=True)
class CFSolution:
    coeffs: tuple
    b0: float
    b1: float
    s_f: float
    v_f: float
    accel: float
    prediction: PVPrediction | None = None

    def constraint_residual(self, s_p_final: float, s_s: float) -> float:
        return self.s_f + self.b1 * self.v_f + s_s - s_p_final


def predict_preceding_position(s_p0: float, v_p0: float, a_p0: float, v_des: float,
                               t_st_prv: float) -> PVPrediction:
    """PV keeps its acceleration until it saturates at ``v_des`` or zero."""
    if not t_st_prv > 0:
        raise ValueError("preview horizon must be positive")
    v_m = v_des if a_p0 >= 0 else 0.0
    if abs(a_p0) < A_EPS:
        t_m = t_st_prv
        s_f = s_p0 + v_p0 * t_st_prv
        return PVPrediction(s_p0, v_p0, a_p0, v_m, t_m, s_f)
    t_m = min(t_st_prv, max(0.0, (v_m - v_p0) / a_p0))
    s_f = s_p0 + v_p0 * t_m + 0.5 * a_p0 * t_m * t_m + v_m * (t_st_prv - t_m)
    return PVPrediction(s_p0, v_p0, a_p0, v_m, t_m, s_f)


def cf_cost_coefficients(s0: float, v0: float, t_st_prv: float):
    """Coefficients ``(c0, .., c5)`` of the effort as a quadratic in ``(s_f, v_f)``."""
    T = t_st_prv
    if not T > 0:
        raise ValueError("preview horizon must be positive")
    c0 = 2 * v0 * v0 / T + 6 * v0 * s0 / T ** 2 + 6 * s0 * s0 / T ** 3
    c1 = 6 / T ** 3
    c2 = -12 * s0 / T ** 3 - 6 * v0 / T ** 2
    c3 = -6 / T ** 2
    c4 = 6 * s0 / T ** 2 + 2 * v0 / T
    c5 = 2 / T
    return (c0, c1, c2, c3, c4, c5)


def cf_quadratic(coeffs, s_f, v_f):
    c0, c1, c2, c3, c4, c5 = coeffs
    return c0 + c1 * s_f * s_f + c2 * s_f + c3 * s_f * v_f + c4 * v_f + c5 * v_f * v_f


def solve_cf_terminal(coeffs, b0: float, b1: float):
    """Minimize the quadratic on the line ``s_f = b0 - b1 * v_f``."""
    _, c1, c2, c3, c4, c5 = coeffs
    den = 2.0 * (c3 * b1 - c5 - c1 * b1 * b1)
    if abs(den) < 1e-14:
        raise SolverError("degenerate car-following problem")
    v_f = -((2 * c1 * b1 - c3) * b0 + (c2 * b1 - c4)) / den
    s_f = b0 - b1 * v_f
    return s_f, v_f


def cf_next_acceleration(s0: float, v0: float, s_f: float, v_f: float, t_st_prv: float) -> float:
    """Initial control of the closed-form segment to ``(s_f, v_f)``."""
    T = t_st_prv
    return 6.0 * (s_f - s0) / T ** 2 - 2.0 * (2.0 * v0 + v_f) / T


def car_following(s0: float, v0: float, pv, *, v_des: float, t_st_prv: float = 3.0,
                  tau_des: float = 1.5, s_s: float = 5.0) -> CFSolution | None:
    """Full car-following evaluation against one preceding vehicle.

    ``pv`` is ``(s_p0, v_p0, a_p0)`` where ``s_p0`` is the PV rear bumper,
    or ``None`` when nothing is ahead (no solution; the caller should treat
    the acceleration as unconstrained).
    """
    if pv is None:
        return None
    pred = predict_preceding_position(pv[0], pv[1], pv[2], v_des, t_st_prv)
    coeffs = cf_cost_coefficients(s0, v0, t_st_prv)
    b0 = pred.s_p_final - s_s
    b1 = tau_des
    s_f, v_f = solve_cf_terminal(coeffs, b0, b1)
    acc = cf_next_acceleration(s0, v0, s_f, v_f, t_st_prv)
    return CFSolution(coeffs, b0, b1, s_f, v_f, acc, pred)


def ensemble(a_ff: float, a_cf: float) -> float:
    return min(a_ff, a_cf)
