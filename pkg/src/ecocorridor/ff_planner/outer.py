"""Outer travel-time optimization of the free-flow plan.

The inner effort-optimal trajectory has a closed form for any choice of
segment durations, so the plan reduces to a smooth problem over the N
intersection entering times subject to window and minimum-travel-time
constraints. It is solved by sequential quadratic programming with exact
Hessians, an Armijo line search and a few deterministic starts.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import quadprog

from ..corridor import PreviewHorizon, TerminalKind
from ..errors import InfeasiblePlanError
from ..green_window import GreenWindowSet
from .pmp import segment_cost, segment_cost_dxi, segment_costates
from .tridiag import thomas_solve

__all__ = ["FFSolution", "entering_speeds", "plan_cost", "outer_optimize"]

log = logging.getLogger(__name__)

FEAS_TOL = 1e-6
CONV_TOL = 1e-8
MAX_ITER = 60


@dataclass(frozen=True)
class FFSolution:
    """Solved free-flow plan over N+1 segments.

    Sequences indexed by point (``t_ent``, ``s_points``, ``speeds``) have
    N+2 entries starting at the ego state; sequences indexed by segment have
    N+1 entries; ``jumps`` has N entries, one per interior point.
    """

    xi: tuple
    t_ent: tuple
    s_points: tuple
    speeds: tuple
    lengths: tuple
    lam1: tuple
    lam2_start: tuple
    lam2_end: tuple
    jumps: tuple
    segment_costs: tuple
    cost: float
    terminal: TerminalKind
    iterations: int = 0
    warnings: tuple = field(default=())

    @property
    def n_signals(self) -> int:
        return len(self.xi) - 1

    @property
    def t0(self) -> float:
        return self.t_ent[0]

    @property
    def t_final(self) -> float:
        return self.t_ent[-1]

    def boundary_conditions(self):
        """Per-segment ``(s_start, v_start, t_start, s_end, v_end, t_end)``."""
        return [(self.s_points[i], self.speeds[i], self.t_ent[i],
                 self.s_points[i + 1], self.speeds[i + 1], self.t_ent[i + 1])
                for i in range(len(self.xi))]


def entering_speeds(xi, lengths, v0, v_final=None):
    """Speeds ``[v0, v*_1 .. v*_N, v_f]`` minimizing total effort for fixed ``xi``."""
    n = len(xi) - 1
    if n == 0:
        vf = 1.5 * lengths[0] / xi[0] - 0.5 * v0 if v_final is None else v_final
        return [v0, vf]
    inv = [1.0 / x for x in xi]
    diag = [4.0 * (inv[i] + inv[i + 1]) for i in range(n)]
    off = [2.0 * inv[i + 1] for i in range(n - 1)]
    rhs = [6.0 * lengths[i] * inv[i] ** 2 + 6.0 * lengths[i + 1] * inv[i + 1] ** 2 for i in range(n)]
    rhs[0] -= 2.0 * v0 * inv[0]
    if v_final is None:
        rhs[-1] -= 3.0 * lengths[-1] * inv[-1] ** 2
        diag[-1] -= inv[-1]
    else:
        rhs[-1] -= 2.0 * v_final * inv[-1]
    v = thomas_solve(diag, off, rhs)
    vf = 1.5 * lengths[-1] * inv[-1] - 0.5 * v[-1] if v_final is None else v_final
    return [v0] + v + [vf]


def plan_cost(xi, lengths, v0, v_final=None):
    """Total effort of the optimal trajectory for given segment durations."""
    v = entering_speeds(xi, lengths, v0, v_final)
    return sum(segment_cost(v[i], v[i + 1], lengths[i], xi[i]) for i in range(len(xi)))


def _cost_derivatives(xi, lengths, v0, v_final):
    """Cost, gradient and Hessian with respect to the N+1 segment durations.

    The speeds are minimizers of the cost for fixed durations, so the
    gradient is the partial derivative at those speeds; the Hessian adds the
    implicit correction ``-J_xv J_vv^-1 J_vx``.
    """
    m = len(xi)
    n = m - 1
    free = v_final is None
    v = entering_speeds(xi, lengths, v0, v_final)
    cost = 0.0
    grad = np.empty(m)
    hxx = np.zeros(m)
    for k in range(m):
        a, b, l, x = v[k], v[k + 1], lengths[k], xi[k]
        cost += segment_cost(a, b, l, x)
        grad[k] = segment_cost_dxi(a, b, l, x)
        hxx[k] = (4.0 * (a * a + a * b + b * b) / x ** 3 - 36.0 * l * (a + b) / x ** 4
                  + 72.0 * l * l / x ** 5)
    nw = n + (1 if free else 0)
    hess = np.diag(hxx)
    if nw:
        jww = np.zeros((nw, nw))
        jwx = np.zeros((nw, m))
        for k in range(m):
            a, b, l, x = v[k], v[k + 1], lengths[k], xi[k]
            prev_idx = k - 1 if k >= 1 else None
            next_idx = k if (k < n or free) else None
            if prev_idx is not None:
                jww[prev_idx, prev_idx] += 4.0 / x
                jwx[prev_idx, k] = -2.0 * (2.0 * a + b) / x ** 2 + 12.0 * l / x ** 3
            if next_idx is not None:
                jww[next_idx, next_idx] += 4.0 / x
                jwx[next_idx, k] = -2.0 * (a + 2.0 * b) / x ** 2 + 12.0 * l / x ** 3
            if prev_idx is not None and next_idx is not None:
                jww[prev_idx, next_idx] += 2.0 / x
                jww[next_idx, prev_idx] += 2.0 / x
        hess -= jwx.T @ np.linalg.solve(jww, jwx)
    return cost, grad, hess, v


class _Problem:
    """Entering-time formulation with fixed variables eliminated."""

    def __init__(self, lengths, xi_min, lo, hi, t0, tf, v0, v_final):
        self.lengths = list(lengths)
        self.t0, self.tf, self.v0, self.v_final = t0, tf, v0, v_final
        n = len(lo)
        self.n = n
        lo = np.asarray(lo, float)
        hi = np.asarray(hi, float)
        fixed = hi - lo <= 1e-12
        self.free_idx = np.flatnonzero(~fixed)
        self.base = np.where(fixed, lo, 0.0)
        # rows of C tau >= d over the full entering-time vector
        rows, rhs = [], []
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            rows.append(e)
            rhs.append(lo[i])
            rows.append(-e)
            rhs.append(-hi[i])
            r = e.copy()
            if i > 0:
                r[i - 1] = -1.0
                rows.append(r)
                rhs.append(xi_min[i])
            else:
                rows.append(r)
                rhs.append(t0 + xi_min[0])
        r = np.zeros(n)
        r[-1] = -1.0
        rows.append(r)
        rhs.append(xi_min[n] - tf)
        c_full = np.array(rows)
        d_full = np.array(rhs) - c_full @ self.base
        c = c_full[:, self.free_idx]
        keep = np.any(np.abs(c) > 0, axis=1)
        if np.any(d_full[~keep] > FEAS_TOL):
            raise InfeasiblePlanError("fixed entering times violate the travel-time limits")
        self.c = c[keep]
        self.d = d_full[keep]
        # maps full tau to xi: xi = D tau + e
        dmat = np.zeros((n + 1, n))
        for k in range(n + 1):
            if k < n:
                dmat[k, k] = 1.0
            if k >= 1:
                dmat[k, k - 1] = -1.0
        self.dmat = dmat[:, self.free_idx]
        self.e = np.zeros(n + 1)
        self.e[0] = -t0
        self.e[-1] = tf
        self.e += dmat @ self.base

    def full(self, z):
        tau = self.base.copy()
        tau[self.free_idx] = z
        return tau

    def xi(self, z):
        return self.dmat @ z + self.e

    def cost(self, z):
        xi = self.xi(z)
        if np.any(xi <= 0):
            return np.inf
        return plan_cost(xi.tolist(), self.lengths, self.v0, self.v_final)

    def derivatives(self, z):
        cost, g, h, _ = _cost_derivatives(self.xi(z).tolist(), self.lengths, self.v0, self.v_final)
        return cost, self.dmat.T @ g, self.dmat.T @ h @ self.dmat

    def project(self, z):
        """Closest feasible point in the Euclidean sense."""
        k = len(z)
        try:
            sol = quadprog.solve_qp(np.eye(k), np.asarray(z, float), self.c.T, self.d, 0)[0]
        except ValueError as exc:
            raise InfeasiblePlanError(f"travel-time constraints are inconsistent: {exc}") from None
        return sol

    def feasible(self, z, tol=FEAS_TOL):
        return bool(np.all(self.c @ z - self.d >= -tol))


def _modified(h):
    w, q = np.linalg.eigh(0.5 * (h + h.T))
    floor = max(1e-10, 1e-8 * float(np.max(np.abs(w))))
    w = np.maximum(np.abs(w), floor)
    return (q * w) @ q.T


def _sqp(prob: _Problem, z):
    cost, g, h = prob.derivatives(z)
    it = 0
    for it in range(1, MAX_ITER + 1):
        b = _modified(h)
        slack = prob.d - prob.c @ z
        try:
            step = quadprog.solve_qp(b, -g, prob.c.T, slack, 0)[0]
        except ValueError:
            break
        slope = float(g @ step)
        if slope > -1e-14:
            break
        alpha = 1.0
        while True:
            trial = z + alpha * step
            tc = prob.cost(trial)
            if tc <= cost + 1e-4 * alpha * slope:
                break
            alpha *= 0.5
            if alpha < 1e-10:
                tc = None
                break
        if tc is None:
            break
        decrease = cost - tc
        z = trial
        cost, g, h = prob.derivatives(z)
        if decrease < CONV_TOL:
            break
    return z, cost, it


def _starts(prob: _Problem, horizon_xi_min, lengths, windows: GreenWindowSet):
    n = prob.n
    span = prob.tf - prob.t0
    out = []
    for weights in (np.asarray(horizon_xi_min, float), np.asarray(lengths, float)):
        xi = weights / weights.sum() * span
        out.append(prob.t0 + np.cumsum(xi)[:n])
    out.append(0.5 * (np.asarray(windows.t_min_n) + np.asarray(windows.t_max_n)))
    return out


def outer_optimize(horizon: PreviewHorizon, windows: GreenWindowSet, v0: float | None = None,
                   t0: float | None = None, *, multistart: bool = True, warm_start=None) -> FFSolution:
    """Optimal segment durations, entering speeds and costates.

    ``warm_start`` optionally supplies candidate entering times (N values)
    that are tried before the default starts.
    """
    v0 = horizon.v0 if v0 is None else v0
    t0 = horizon.t0 if t0 is None else t0
    lengths = list(horizon.lengths)
    n = horizon.n_signals
    tf = windows.t_final
    v_final = None if horizon.terminal is TerminalKind.FREE else horizon.v_final
    if tf - t0 <= 0:
        raise InfeasiblePlanError("horizon end time is not after the current time")
    if n != windows.n_signals:
        raise ValueError("window set does not match the horizon")

    iterations = 0
    if n == 0:
        if tf - t0 < horizon.xi_min[0] - FEAS_TOL:
            raise InfeasiblePlanError("horizon end cannot be reached at the speed limit")
        tau = np.zeros(0)
    else:
        prob = _Problem(lengths, horizon.xi_min, windows.t_min_n, windows.t_max_n,
                        t0, tf, v0, v_final)
        if len(prob.free_idx) == 0:
            if not prob.feasible(np.zeros(0)):
                raise InfeasiblePlanError("fixed entering times violate the travel-time limits")
            tau = prob.full(np.zeros(0))
        else:
            cands = []
            if warm_start is not None:
                cands.append(np.asarray(warm_start, float))
            if multistart or not cands:
                cands.extend(_starts(prob, horizon.xi_min, lengths, windows))
            best = None
            seen = []
            for cand in cands:
                z0 = prob.project(cand[prob.free_idx])
                if any(np.allclose(z0, s, atol=1e-9, rtol=0) for s in seen):
                    continue
                seen.append(z0)
                z, cost, it = _sqp(prob, z0)
                iterations += it
                if best is None or cost < best[1] - 1e-12:
                    best = (z, cost)
                if not multistart:
                    break
            tau = prob.full(best[0])

    t_ent = [t0] + list(tau) + [tf]
    xi = [t_ent[i + 1] - t_ent[i] for i in range(n + 1)]
    return _assemble(horizon, xi, t_ent, lengths, v0, v_final, iterations)


def solution_for_durations(horizon: PreviewHorizon, xi, v0=None, t0=None) -> FFSolution:
    """Closed-form plan for explicitly given segment durations."""
    v0 = horizon.v0 if v0 is None else v0
    t0 = horizon.t0 if t0 is None else t0
    v_final = None if horizon.terminal is TerminalKind.FREE else horizon.v_final
    t_ent = [t0]
    for x in xi:
        t_ent.append(t_ent[-1] + x)
    return _assemble(horizon, list(xi), t_ent, list(horizon.lengths), v0, v_final, 0)


def _assemble(horizon, xi, t_ent, lengths, v0, v_final, iterations):
    speeds = entering_speeds(xi, lengths, v0, v_final)
    lam1, l2s, l2e, costs = [], [], [], []
    for i in range(len(xi)):
        a, b, c = segment_costates(speeds[i], speeds[i + 1], lengths[i], xi[i])
        lam1.append(a)
        l2s.append(b)
        l2e.append(c)
        costs.append(segment_cost(speeds[i], speeds[i + 1], lengths[i], xi[i]))
    jumps = [lam1[i] - lam1[i + 1] for i in range(len(xi) - 1)]
    warnings = []
    if min(speeds) < 0:
        warnings.append("negative entering speed in plan")
        log.debug("free-flow plan has a negative boundary speed (min %.3f m/s)", min(speeds))
    return FFSolution(
        xi=tuple(xi), t_ent=tuple(t_ent), s_points=(horizon.s0,) + tuple(horizon.boundaries),
        speeds=tuple(speeds), lengths=tuple(lengths), lam1=tuple(lam1), lam2_start=tuple(l2s),
        lam2_end=tuple(l2e), jumps=tuple(jumps), segment_costs=tuple(costs), cost=sum(costs),
        terminal=horizon.terminal, iterations=iterations, warnings=tuple(warnings))
