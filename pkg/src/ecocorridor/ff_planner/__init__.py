"""Free-flow (long-term) eco-speed planner."""
from .outer import FFSolution, entering_speeds, outer_optimize, plan_cost, solution_for_durations
from .pmp import (SegmentPolynomial, segment_controls, segment_cost, segment_cost_dxi,
                  segment_cost_printed, segment_costates)
from .trajectory import PwLinearAccelTrajectory, build_ff_trajectory, ff_next_acceleration
from .tridiag import TridiagonalSystem, assemble_tridiagonal, solve_entering_speeds, thomas_solve

__all__ = [
    "FFSolution", "entering_speeds", "outer_optimize", "plan_cost", "solution_for_durations",
    "SegmentPolynomial", "segment_controls", "segment_cost", "segment_cost_dxi",
    "segment_cost_printed", "segment_costates",
    "PwLinearAccelTrajectory", "build_ff_trajectory", "ff_next_acceleration",
    "TridiagonalSystem", "assemble_tridiagonal", "solve_entering_speeds", "thomas_solve",
]
