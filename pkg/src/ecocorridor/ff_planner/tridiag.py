"""Entering-speed linear system of the multi-segment effort problem.

Continuity of the speed costate at every interior point couples
neighbouring entering speeds only, so the N unknown speeds solve a
symmetric tridiagonal system ``A v = y``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SolverError

__all__ = ["TridiagonalSystem", "assemble_tridiagonal", "solve_entering_speeds", "thomas_solve"]


@dataclass(frozen=True)
class TridiagonalSystem:
    """``diag`` and ``rhs`` already carry the boundary adjustments.

    ``off`` has N-1 entries (``off[i]`` couples unknowns i and i+1).
    ``k0`` and ``k1`` are the terminal coefficients removed from the last
    row: ``rhs[-1] = y_N - k0`` and ``diag[-1] = a_N - k1``.
    """

    diag: np.ndarray
    off: np.ndarray
    rhs: np.ndarray
    k0: float
    k1: float
    free_terminal: bool

    @property
    def size(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)


def assemble_tridiagonal(xi, lengths, v0: float, v_final: float | None = None) -> TridiagonalSystem:
    """Build the system for N+1 segment durations and lengths.

    ``v_final=None`` selects the free terminal speed; otherwise the terminal
    speed is fixed to ``v_final``.
    """
    xi = np.asarray(xi, dtype=float)
    lengths = np.asarray(lengths, dtype=float)
    if xi.shape != lengths.shape or xi.ndim != 1:
        raise ValueError("xi and lengths must be 1-D arrays of equal length")
    if len(xi) < 2:
        raise ValueError("need at least two segments (N >= 1)")
    if np.any(xi <= 0) or np.any(lengths <= 0):
        raise ValueError("segment durations and lengths must be positive")
    inv = 1.0 / xi
    diag = 4.0 * (inv[:-1] + inv[1:])
    off = 2.0 * inv[1:-1]
    rhs = 6.0 * lengths[:-1] * inv[:-1] ** 2 + 6.0 * lengths[1:] * inv[1:] ** 2
    rhs[0] -= 2.0 * v0 * inv[0]
    if v_final is None:
        k0 = 3.0 * lengths[-1] * inv[-1] ** 2
        k1 = inv[-1]
    else:
        k0 = 2.0 * v_final * inv[-1]
        k1 = 0.0
    rhs[-1] -= k0
    diag[-1] -= k1
    return TridiagonalSystem(diag=diag, off=off, rhs=rhs, k0=float(k0), k1=float(k1),
                             free_terminal=v_final is None)


def thomas_solve(diag, off, rhs):
    """Solve a symmetric tridiagonal system in O(n) on plain Python floats."""
    n = len(diag)
    c = [0.0] * n
    d = [0.0] * n
    denom = diag[0]
    if denom == 0.0:
        raise SolverError("zero pivot in tridiagonal solve")
    c[0] = off[0] / denom if n > 1 else 0.0
    d[0] = rhs[0] / denom
    for i in range(1, n):
        denom = diag[i] - off[i - 1] * c[i - 1]
        if denom == 0.0 or not np.isfinite(denom):
            raise SolverError("singular tridiagonal system")
        if i < n - 1:
            c[i] = off[i] / denom
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom
    x = d
    for i in range(n - 2, -1, -1):
        x[i] -= c[i] * x[i + 1]
    return x


def solve_entering_speeds(system: TridiagonalSystem) -> np.ndarray:
    """Optimal interior entering speeds ``v*_1 .. v*_N``."""
    return np.array(thomas_solve(system.diag.tolist(), system.off.tolist(), system.rhs.tolist()))
