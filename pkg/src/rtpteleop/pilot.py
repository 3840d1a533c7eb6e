"""Deterministic scripted operator.

Replaces the human driver for headless runs: follows a waypoint route
with pure-pursuit steering at a fixed cruise speed and stops once the
final waypoint is within the goal tolerance.  No randomness; the same
telemetry stream always yields the same command stream.
"""

from __future__ import annotations

import math

from .robot import V_MAX, W_MAX

LOOKAHEAD = 300.0       # mm along the route to the steering target
CRUISE_SPEED = 100.0    # mm/s
GOAL_TOLERANCE = 150.0  # mm; stop when the last waypoint is this close
PIVOT_RATE = 500.0      # mrad/s spin when the target is behind us


def parse_waypoints(text: str) -> list[tuple[float, float]]:
    """Waypoint file format: one `x y` pair in millimeters per line,
    `#` comments and blank lines ignored."""
    points: list[tuple[float, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected `x y`, got {raw!r}")
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ValueError(f"line {lineno}: bad coordinate in {raw!r}") \
                from None
    if not points:
        raise ValueError("waypoint file defines no points")
    return points


def load_waypoints(path) -> list[tuple[float, float]]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_waypoints(fh.read())


class Pilot:
    """Pure-pursuit waypoint follower.

    command() maps the latest believed pose to a (v, w) pair in robot
    units.  Progress along the route is monotonic, so a noisy pose can
    never send the pilot chasing an earlier segment, and once the goal
    is reached the stop latches.
    """

    def __init__(self, waypoints, lookahead: float = LOOKAHEAD,
                 cruise: float = CRUISE_SPEED,
                 goal_tolerance: float = GOAL_TOLERANCE):
        if lookahead <= 0 or cruise <= 0 or goal_tolerance <= 0:
            raise ValueError("lookahead, cruise, and tolerance must be > 0")
        self.waypoints = [(float(x), float(y)) for x, y in waypoints]
        if not self.waypoints:
            raise ValueError("pilot needs at least one waypoint")
        self.lookahead = lookahead
        self.cruise = min(cruise, V_MAX)
        self.goal_tolerance = goal_tolerance
        self.reached = False
        self._segment = 0
        self._cum = [0.0]
        for (x0, y0), (x1, y1) in zip(self.waypoints, self.waypoints[1:]):
            self._cum.append(self._cum[-1] + math.hypot(x1 - x0, y1 - y0))

    def distance_to_goal(self, x: float, y: float) -> float:
        gx, gy = self.waypoints[-1]
        return math.hypot(gx - x, gy - y)

    def command(self, x: float, y: float, theta_mrad: float) -> tuple[int, int]:
        """Velocity command for the believed pose; (0, 0) once arrived."""
        if self.reached or self.distance_to_goal(x, y) <= self.goal_tolerance:
            self.reached = True
            return 0, 0
        s = self._advance_progress(x, y)
        tx, ty = self._point_at(s + self.lookahead)
        heading = theta_mrad / 1000.0
        alpha = math.atan2(ty - y, tx - x) - heading
        alpha = math.atan2(math.sin(alpha), math.cos(alpha))
        if abs(alpha) > math.pi / 2:
            # target behind the robot: spin in place toward it
            return 0, int(round(math.copysign(PIVOT_RATE, alpha)))
        dist = max(math.hypot(tx - x, ty - y), 1e-9)
        curvature = 2.0 * math.sin(alpha) / dist      # 1/mm
        w = self.cruise * curvature * 1000.0          # mrad/s
        w = min(max(w, -W_MAX), W_MAX)
        return int(round(self.cruise)), int(round(w))

    def _advance_progress(self, x: float, y: float) -> float:
        """Arc length of the route point nearest to (x, y), searching
        only forward of the current segment."""
        best = None
        best_s = self._cum[-1]
        best_seg = self._segment
        for i in range(self._segment, len(self.waypoints) - 1):
            (x0, y0), (x1, y1) = self.waypoints[i], self.waypoints[i + 1]
            dx, dy = x1 - x0, y1 - y0
            length_sq = dx * dx + dy * dy
            if length_sq == 0.0:
                frac = 0.0
            else:
                frac = ((x - x0) * dx + (y - y0) * dy) / length_sq
                frac = min(max(frac, 0.0), 1.0)
            px, py = x0 + frac * dx, y0 + frac * dy
            d = math.hypot(x - px, y - py)
            if best is None or d < best:
                best = d
                best_s = self._cum[i] + frac * math.sqrt(length_sq)
                best_seg = i
        self._segment = best_seg
        return best_s

    def _point_at(self, s: float) -> tuple[float, float]:
        """Route point at arc length s, clamped to the endpoints."""
        if s <= 0.0 or len(self.waypoints) == 1:
            return self.waypoints[0]
        if s >= self._cum[-1]:
            return self.waypoints[-1]
        for i in range(len(self.waypoints) - 1):
            if s <= self._cum[i + 1]:
                span = self._cum[i + 1] - self._cum[i]
                frac = (s - self._cum[i]) / span if span else 0.0
                (x0, y0), (x1, y1) = self.waypoints[i], self.waypoints[i + 1]
                return x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)
        return self.waypoints[-1]
