import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ecocorridor.corridor import (Phase, RouteSpec, SignalSpec, build_preview_horizon,
                                  signal_phase_at)
from ecocorridor.errors import InfeasibleSpatError, InfeasibleWindowError
from ecocorridor.green_window import (
    PlannerParams,
    compute_green_windows,
    desired_entering_times,
    desired_speed,
    feasible_green_windows,
    narrowed_windows,
    snap_to_green,
)

SIG = SignalSpec(position=0.0, cycle=60.0, green=30.0, first_green_start=0.0)


# snapping

@pytest.mark.parametrize("arrival, expected", [(40.0, 62.0), (10.0, 10.0), (28.0, 28.0), (2.0, 2.0),
                                               (29.0, 62.0), (61.0, 62.0), (125.0, 125.0)])
def test_snap_to_green(arrival, expected):
    assert snap_to_green(SIG, arrival, 2.0, 2.0) == pytest.approx(expected)


def test_margins_longer_than_green_are_infeasible():
    with pytest.raises(InfeasibleSpatError):
        snap_to_green(SignalSpec(0.0, 60.0, 3.0), 10.0, 2.0, 2.0)


@given(st.floats(0, 1000), st.integers(30, 150), st.floats(0.15, 0.85), st.floats(0, 100),
       st.floats(0, 5), st.floats(0, 5))
def test_snapped_time_is_inside_margin_shrunk_green(arrival, cycle, share, offset, m0, mf):
    sig = SignalSpec(0.0, float(cycle), share * cycle, offset)
    assume(sig.green > m0 + mf + 1e-6)
    t = snap_to_green(sig, arrival, m0, mf)
    assert t >= arrival - 1e-9
    assert signal_phase_at(sig, t) is Phase.GREEN
    off = sig.cycle_offset(t)
    assert m0 - 1e-6 <= off <= sig.green - mf + 1e-6
    # no qualifying time was skipped: within one cycle, earlier times fail the predicate
    assert t - arrival <= cycle + m0 + 1e-6


# desired speed and times

def test_desired_speed_is_ratio_of_average_speed_and_capped(fig5_route):
    h = build_preview_horizon(fig5_route, (0.0, 0.0, 0.0), 1200.0)
    assert desired_speed(h, PlannerParams()) == pytest.approx(0.9 * 17.8)
    assert desired_speed(h, PlannerParams(r_des=1.0, v_des_cap=10.0)) == 10.0


def test_desired_times_cruise_then_snap():
    route = RouteSpec(400.0, ((400.0, 20.0),), (SignalSpec(100.0, 60.0, 30.0),))
    h = build_preview_horizon(route, (0.0, 10.0, 0.0), 150.0)
    p = PlannerParams(r_des=0.5)   # v_des = 10 m/s
    t = desired_entering_times(h, p)
    # cruise arrival 10 s lies in green; the closing virtual point follows 10 s later
    assert t == pytest.approx((10.0, 20.0))
    t = desired_entering_times(h, p, t0=25.0)
    assert t == pytest.approx((62.0, 72.0))


# feasible windows

def test_feasible_windows_hand_case():
    assert feasible_green_windows((12.0, 25.0), (10.0, 10.0), 0.0) == ((12.0,), (12.0,))


def test_backward_bound_bites():
    with pytest.raises(InfeasibleWindowError) as exc:
        feasible_green_windows((12.0, 20.0), (10.0, 10.0), 0.0)
    assert exc.value.index == 1


def test_unreachable_horizon_end_reports_last_index():
    with pytest.raises(InfeasibleWindowError) as exc:
        feasible_green_windows((5.0,), (10.0,), 0.0)
    assert exc.value.index == 1


def test_free_flow_schedule_is_a_fixed_point():
    t_des = (10.0, 25.0, 33.0)
    xi = (10.0, 15.0, 8.0)
    lo, hi = feasible_green_windows(t_des, xi, 0.0)
    assert lo == hi == t_des[:2]


@given(st.lists(st.tuples(st.floats(1, 50), st.floats(0, 30)), min_size=2, max_size=7),
       st.floats(0, 100))
def test_window_recursion_properties(segs, t0):
    xi = [x for x, _ in segs]
    slack = [s for _, s in segs]
    t_des, t = [], t0
    for x, s in zip(xi, slack):
        t += x + s
        t_des.append(t)
    lo, hi = feasible_green_windows(t_des, xi, t0)
    n = len(lo)
    prev = t0
    for i in range(n):
        assert lo[i] <= hi[i]
        assert lo[i] - prev >= xi[i] - 1e-9
        prev = lo[i]
    for i in range(n - 1):
        assert hi[i + 1] - hi[i] >= xi[i + 1] - 1e-9


# narrowed windows

def test_narrowed_hand_case():
    assert narrowed_windows((62.0,), (55.0,), (85.0,), 5.0, 2.0) == ((57.0,), (59.0,))


def test_narrowing_disabled():
    assert narrowed_windows((62.0,), (55.0,), (85.0,), 0.0, 1e6) == ((62.0,), (85.0,))


@given(st.floats(0, 100), st.floats(0, 50), st.floats(0, 50), st.floats(0, 10))
def test_tight_tuning_gives_at_most_two_seconds(t_min, width, back, dt_des):
    t_max = t_min + width
    t_des = t_min + min(back, width)
    lo2, hi2 = narrowed_windows((t_des,), (t_min,), (t_max,), dt_des, 2.0)
    lo20, hi20 = narrowed_windows((t_des,), (t_min,), (t_max,), dt_des, 20.0)
    assert hi2[0] - lo2[0] <= 2.0 + 1e-12
    # nested in the feasible window and in the loose tuning
    assert t_min <= lo2[0] and hi2[0] <= t_max
    assert lo20[0] == lo2[0] and hi2[0] <= hi20[0]


def test_narrowing_past_the_feasible_window_is_infeasible():
    with pytest.raises(InfeasibleWindowError):
        narrowed_windows((90.0,), (55.0,), (85.0,), 0.0, 2.0)


# full pipeline

@given(st.floats(0, 1400), st.floats(0, 30), st.floats(0, 500), st.floats(0, 2000))
def test_pipeline_windows_are_green_and_nested(s0, v0, t0, rng_):
    sigs = (SignalSpec(170.0, 125.0, 81.0, 35.0, 5.0), SignalSpec(460.0, 95.0, 26.0, 3.0, 3.0),
            SignalSpec(620.0, 95.0, 36.0, 1.0, 4.0), SignalSpec(780.0, 95.0, 57.0, 75.0, 3.0),
            SignalSpec(1020.0, 93.0, 28.0, 83.0, 3.0))
    route = RouteSpec(1500.0, ((1500.0, 17.8),), sigs, end_stop=1420.0)
    h = build_preview_horizon(route, (s0, v0, t0), rng_)
    p = PlannerParams()
    try:
        w = compute_green_windows(h, p)
    except InfeasibleWindowError:
        return
    assert w == compute_green_windows(h, p)
    for i, sig in enumerate(h.signals):
        assert w.t_min[i] <= w.t_min_n[i] <= w.t_max_n[i] <= w.t_max[i]
        for t in (w.t_min_n[i], w.t_max_n[i]):
            assert signal_phase_at(sig, t) is Phase.GREEN
            off = sig.cycle_offset(t)
            assert p.dt_grn0 - 1e-6 <= off <= sig.green - p.dt_grnf + 1e-6
        assert w.t_min[i] >= t0 + sum(h.xi_min[: i + 1]) - 1e-9


def test_planner_params_validation():
    with pytest.raises(ValueError):
        PlannerParams(r_des=0.0)
    with pytest.raises(ValueError):
        PlannerParams(t_st_prv=0.0)
    with pytest.raises(ValueError):
        PlannerParams(dt_fea=-1.0)
