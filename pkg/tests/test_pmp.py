import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from ecocorridor.ff_planner import (SegmentPolynomial, segment_controls, segment_cost,
                                    segment_cost_dxi, segment_cost_printed, segment_costates)
from oracles import direct_segment_solve

speeds = st.floats(0.0, 20.0)
lengths = st.floats(5.0, 400.0)
durations = st.floats(1.0, 60.0)


def test_cost_example():
    # accelerate from rest to 20 m/s over 100 m in 10 s: u = 2 constant
    assert segment_cost(0.0, 20.0, 100.0, 10.0) == pytest.approx(20.0, abs=1e-12)
    assert segment_controls(0.0, 20.0, 100.0, 10.0) == (pytest.approx(2.0), pytest.approx(2.0))


def test_printed_form_differs_and_fails_zero_check():
    assert segment_cost(10.0, 10.0, 100.0, 10.0) == pytest.approx(0.0, abs=1e-12)
    assert segment_cost_printed(10.0, 10.0, 100.0, 10.0) == pytest.approx(-1080.0)


def test_nonpositive_duration_rejected():
    with pytest.raises(ValueError):
        segment_cost(1.0, 1.0, 10.0, 0.0)


@given(st.floats(0.5, 20.0), lengths)
def test_constant_speed_is_free(v, l):
    assert segment_cost(v, v, l, l / v) == pytest.approx(0.0, abs=1e-9 * (1 + v * v))


@given(speeds, speeds, lengths, durations)
def test_cost_is_nonnegative_and_matches_quadrature(v0, v1, l, xi):
    c = segment_cost(v0, v1, l, xi)
    u0, u1 = segment_controls(v0, v1, l, xi)
    ref = quad(lambda t: 0.5 * (u0 + (u1 - u0) * t / xi) ** 2, 0.0, xi)[0]
    assert c >= -1e-9
    assert c == pytest.approx(ref, rel=1e-9, abs=1e-9)


@given(speeds, speeds, lengths, durations)
def test_polynomial_meets_boundary_conditions(v0, v1, l, xi):
    p = SegmentPolynomial.from_boundary(3.0, 50.0, v0, 3.0 + xi, 50.0 + l, v1)
    assert p.velocity(3.0 + xi) == pytest.approx(v1, abs=1e-8 * (1 + l / xi))
    assert p.position(3.0 + xi) == pytest.approx(50.0 + l, abs=1e-8 * (1 + l))
    assert p.effort() == pytest.approx(segment_cost(v0, v1, l, xi), rel=1e-9, abs=1e-9)


@given(speeds, speeds, lengths, durations)
def test_control_is_minus_speed_costate(v0, v1, l, xi):
    lam1, l2s, l2e = segment_costates(v0, v1, l, xi)
    p = SegmentPolynomial.from_boundary(0.0, 0.0, v0, xi, l, v1)
    assert p.u_start == pytest.approx(-l2s)
    assert p.u_end == pytest.approx(-l2e)
    # d(lambda2)/dt = -lambda1 on the segment
    assert (l2e - l2s) / xi == pytest.approx(-lam1, rel=1e-9, abs=1e-9)


@given(speeds, speeds, lengths, durations)
def test_duration_derivative(v0, v1, l, xi):
    h = 1e-6 * xi
    fd = (segment_cost(v0, v1, l, xi + h) - segment_cost(v0, v1, l, xi - h)) / (2 * h)
    assert segment_cost_dxi(v0, v1, l, xi) == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_direct_solve_oracle_agrees(rng):
    for _ in range(10):
        v0, v1 = rng.uniform(0.0, 20.0, 2)
        l, xi = rng.uniform(10.0, 300.0), rng.uniform(2.0, 30.0)
        ref, _ = direct_segment_solve(v0, v1, l, xi)
        assert segment_cost(v0, v1, l, xi) == pytest.approx(ref, rel=1e-3)


def test_min_and_max_velocity_of_dipping_profile():
    # stop-and-go inside one segment: speed dips below both ends
    p = SegmentPolynomial.from_boundary(0.0, 0.0, 10.0, 20.0, 60.0, 10.0)
    grid = [p.velocity(t) for t in np.linspace(0.0, 20.0, 2001)]
    assert p.min_velocity() == pytest.approx(min(grid), abs=1e-4)
    assert p.max_velocity() == pytest.approx(max(grid), abs=1e-4)
    assert p.min_velocity() < 0.0
    assert math.isclose(p.duration, 20.0)
