import math
import random

import pytest

from rtpteleop.pilot import (
    CRUISE_SPEED,
    GOAL_TOLERANCE,
    LOOKAHEAD,
    PIVOT_RATE,
    Pilot,
    load_waypoints,
    parse_waypoints,
)
from rtpteleop.robot import V_MAX, W_MAX


def drive(pilot, x, y, theta, dt=0.1, max_time=600.0):
    """Closed-loop unicycle integration of the pilot's commands."""
    t = 0.0
    while t < max_time:
        v, w = pilot.command(x, y, theta * 1000.0)
        if pilot.reached:
            return x, y, t
        x += v * math.cos(theta) * dt
        y += v * math.sin(theta) * dt
        theta += w / 1000.0 * dt
        t += dt
    return x, y, t


def test_parse_waypoints_comments_and_blanks():
    text = "# route\n100 200\n\n  300.5 -400  # corner\n"
    assert parse_waypoints(text) == [(100.0, 200.0), (300.5, -400.0)]


def test_parse_waypoints_wrong_field_count():
    with pytest.raises(ValueError) as err:
        parse_waypoints("0 0\n1 2 3\n")
    assert "line 2" in str(err.value)


def test_parse_waypoints_bad_coordinate():
    with pytest.raises(ValueError) as err:
        parse_waypoints("0 zero\n")
    assert "line 1" in str(err.value)


def test_parse_waypoints_empty():
    with pytest.raises(ValueError):
        parse_waypoints("# nothing here\n")


def test_load_waypoints_roundtrip(tmp_path):
    path = tmp_path / "route.waypoints"
    path.write_text("0 0\n1000 0\n", encoding="utf-8")
    assert load_waypoints(path) == [(0.0, 0.0), (1000.0, 0.0)]


def test_pilot_rejects_bad_parameters():
    with pytest.raises(ValueError):
        Pilot([])
    with pytest.raises(ValueError):
        Pilot([(0, 0)], lookahead=0)
    with pytest.raises(ValueError):
        Pilot([(0, 0)], cruise=-1)
    with pytest.raises(ValueError):
        Pilot([(0, 0)], goal_tolerance=0)


def test_cruise_clamped_to_robot_limit():
    pilot = Pilot([(0, 0), (10000, 0)], cruise=1e9)
    v, w = pilot.command(0, 0, 0)
    assert v == round(V_MAX)


def test_straight_line_heads_down_the_route():
    pilot = Pilot([(0, 0), (5000, 0)])
    v, w = pilot.command(0, 0, 0)
    assert v == round(CRUISE_SPEED)
    assert w == 0


def test_perpendicular_target_curvature():
    # target at (0, LOOKAHEAD) dead left of a robot heading +x:
    # alpha = pi/2, curvature 2/L, w = cruise * 2/L in rad/s
    pilot = Pilot([(0, 0), (0, 5000)])
    v, w = pilot.command(0, 0, 0)
    expected = CRUISE_SPEED * (2.0 / LOOKAHEAD) * 1000.0
    assert v == round(CRUISE_SPEED)
    assert w == round(expected)


def test_target_behind_pivots_in_place():
    pilot = Pilot([(0, 0), (5000, 0)])
    v, w = pilot.command(0, 0, 2500.0)  # heading 2.5 rad, route at 0
    assert v == 0
    assert w == -round(PIVOT_RATE)
    v, w = pilot.command(0, 0, -2500.0)
    assert w == round(PIVOT_RATE)


def test_goal_stop_latches():
    pilot = Pilot([(0, 0), (1000, 0)])
    assert pilot.command(1000 - GOAL_TOLERANCE / 2, 0, 0) == (0, 0)
    assert pilot.reached
    # latched: even a pose far from the goal keeps the stop
    assert pilot.command(0, 0, 0) == (0, 0)


def test_distance_to_goal():
    pilot = Pilot([(0, 0), (3000, 4000)])
    assert pilot.distance_to_goal(0, 0) == pytest.approx(5000.0)


def test_progress_never_runs_backwards():
    route = [(0, 0), (2000, 0), (2000, 2000)]
    pilot = Pilot(route)
    pilot.command(1990, 10, 0)
    assert pilot._segment == 0
    pilot.command(2010, 500, 1570)
    seg_after_corner = pilot._segment
    assert seg_after_corner == 1
    # a pose nearest the first segment must not pull progress back
    pilot.command(100, 10, 1570)
    assert pilot._segment >= seg_after_corner


def test_straight_run_converges():
    pilot = Pilot([(0, 0), (4000, 0)])
    x, y, t = drive(pilot, 0, 150, 0.3)  # offset and angled start
    assert pilot.reached
    assert math.hypot(x - 4000, y) <= GOAL_TOLERANCE + 1.0
    assert abs(y) < 50.0


def test_right_angle_corner_followed():
    route = [(0, 0), (2000, 0), (2000, 2000)]
    pilot = Pilot(route)
    x, y, t = drive(pilot, 0, 0, 0)
    assert pilot.reached
    assert math.hypot(x - 2000, y - 2000) <= GOAL_TOLERANCE + 1.0


def test_command_invariants_random_poses():
    rng = random.Random(7)
    for trial in range(50):
        n = rng.randint(1, 5)
        route = [(rng.uniform(-5000, 5000), rng.uniform(-5000, 5000))
                 for _ in range(n)]
        pilot = Pilot(route)
        for _ in range(40):
            v, w = pilot.command(rng.uniform(-6000, 6000),
                                 rng.uniform(-6000, 6000),
                                 rng.uniform(-3141, 3141))
            assert v in (0, round(pilot.cruise))
            assert abs(w) <= W_MAX
            if v == 0 and not pilot.reached:
                assert abs(w) == round(PIVOT_RATE)
            if pilot.reached:
                assert (v, w) == (0, 0)
