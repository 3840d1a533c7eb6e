"""Simulated differential-drive robot.

Unicycle kinematics with exact arc integration, a disc body colliding
against 2-D wall segments, three ideal sonar rays, and a synthetic
media frame source.  Units are millimetres, milliradians, and seconds;
angular state is kept in mrad so telemetry encodes without scaling.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field, replace

ROBOT_RADIUS = 200.0     # mm, disc model
V_MAX = 300.0            # mm/s
W_MAX = 2000.0           # mrad/s
SONAR_MAX_RANGE = 4000.0  # mm
NO_ECHO = 0xFFFF
FRAME_BYTES = 4000
FRAME_RATE = 15.0        # frames/s

_PI_MRAD = 1000.0 * math.pi


def normalize_theta(theta: float) -> float:
    """Wraps a heading in mrad into (-pi*1000, pi*1000]."""
    two_pi = 2.0 * _PI_MRAD
    theta = math.fmod(theta, two_pi)
    if theta <= -_PI_MRAD:
        theta += two_pi
    elif theta > _PI_MRAD:
        theta -= two_pi
    return theta


@dataclass(frozen=True)
class RobotPose:
    x: float = 0.0       # mm
    y: float = 0.0       # mm
    theta: float = 0.0   # mrad, in (-pi*1000, pi*1000]
    v: float = 0.0       # mm/s commanded linear
    w: float = 0.0       # mrad/s commanded angular


def command(pose: RobotPose, v: float, w: float,
            v_max: float = V_MAX, w_max: float = W_MAX) -> RobotPose:
    """Returns the pose with a clamped velocity command applied."""
    v = min(max(v, -v_max), v_max)
    w = min(max(w, -w_max), w_max)
    return replace(pose, v=v, w=w)


@dataclass
class WallMap:
    walls: list = field(default_factory=list)  # (x1, y1, x2, y2) mm
    start: tuple | None = None                 # (x, y, theta_mrad)
    goal: tuple | None = None                  # (x, y)

    def __post_init__(self) -> None:
        if (self.start is not None and self.goal is not None
                and self.start[:2] == tuple(self.goal)):
            raise ValueError("start and goal must differ")


def parse_map(text: str) -> WallMap:
    """Parses the wall map format: one `x1 y1 x2 y2` segment per line,
    optional `start x y theta` and `goal x y` lines, `#` comments."""
    walls = []
    start = None
    goal = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            if tokens[0] == "start":
                if len(tokens) != 4:
                    raise ValueError("start takes x y theta")
                start = tuple(float(t) for t in tokens[1:])
            elif tokens[0] == "goal":
                if len(tokens) != 3:
                    raise ValueError("goal takes x y")
                goal = tuple(float(t) for t in tokens[1:])
            else:
                if len(tokens) != 4:
                    raise ValueError("wall segment takes x1 y1 x2 y2")
                walls.append(tuple(float(t) for t in tokens))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return WallMap(walls=walls, start=start, goal=goal)


def load_map(path) -> WallMap:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_map(fh.read())


def _segment_distance(px: float, py: float, seg) -> float:
    x1, y1, x2, y2 = seg
    dx, dy = x2 - x1, y2 - y1
    length2 = dx * dx + dy * dy
    if length2 == 0.0:
        return math.hypot(px - x1, py - y1)
    t = ((px - x1) * dx + (py - y1) * dy) / length2
    t = min(max(t, 0.0), 1.0)
    return math.hypot(px - (x1 + t * dx), py - (y1 + t * dy))


def clearance(x: float, y: float, wall_map: WallMap) -> float:
    """Distance from a point to the nearest wall (inf for an open map)."""
    if not wall_map.walls:
        return math.inf
    return min(_segment_distance(x, y, seg) for seg in wall_map.walls)


def _advance(pose: RobotPose, dt: float) -> tuple[float, float, float]:
    """Closed-form unicycle state (x, y, theta_mrad) after dt seconds."""
    theta = pose.theta / 1000.0   # rad
    w = pose.w / 1000.0           # rad/s
    if abs(pose.w) < 1.0:
        x = pose.x + pose.v * math.cos(theta) * dt
        y = pose.y + pose.v * math.sin(theta) * dt
        new_theta = pose.theta + pose.w * dt
    else:
        radius = pose.v / w       # mm
        x = pose.x + radius * (math.sin(theta + w * dt) - math.sin(theta))
        y = pose.y - radius * (math.cos(theta + w * dt) - math.cos(theta))
        new_theta = pose.theta + pose.w * dt
    return x, y, normalize_theta(new_theta)


def step(pose: RobotPose, dt: float, wall_map: WallMap | None = None,
         radius: float = ROBOT_RADIUS) -> RobotPose:
    """Integrates one control tick; stops at wall contact and zeroes v.

    dt must lie in (0, 0.1]: the server ticks at 100 Hz by default and
    never slower than 20 Hz, and a 0.1 s cap bounds the per-step travel
    so a moving disc cannot pass a wall unnoticed.
    """
    if not 0.0 < dt <= 0.1:
        raise ValueError(f"dt must be in (0, 0.1], got {dt}")
    x, y, theta = _advance(pose, dt)
    free = wall_map is None or not wall_map.walls
    if free or pose.v == 0.0:
        return replace(pose, x=x, y=y, theta=theta)
    start_clear = clearance(pose.x, pose.y, wall_map)
    if start_clear < radius:
        # Constructed inside a wall: permit motion that opens clearance,
        # otherwise pin translation.  Rotation is safe for a disc.
        if clearance(x, y, wall_map) >= start_clear:
            return replace(pose, x=x, y=y, theta=theta)
        return replace(pose, theta=theta, v=0.0)

    # Sample the swept path; per-step travel is at most 30 mm, so
    # checking quarter points cannot miss a radius-200 disc contact.
    hit_frac = None
    safe_frac = 0.0
    for k in range(1, 5):
        frac = k / 4.0
        sx, sy, _ = _advance(pose, dt * frac)
        if clearance(sx, sy, wall_map) < radius:
            hit_frac = frac
            break
        safe_frac = frac
    if hit_frac is None:
        return replace(pose, x=x, y=y, theta=theta)

    lo, hi = safe_frac, hit_frac
    for _ in range(40):
        mid = (lo + hi) / 2.0
        mx, my, _ = _advance(pose, dt * mid)
        if clearance(mx, my, wall_map) >= radius:
            lo = mid
        else:
            hi = mid
    # Translation stops at contact; the commanded spin still integrates
    # over the whole tick since rotating a disc in place cannot collide.
    cx, cy, _ = _advance(pose, dt * lo)
    return replace(pose, x=cx, y=cy, theta=theta, v=0.0)


@dataclass(frozen=True)
class SonarScan:
    front: int
    left: int
    right: int


def _ray_distance(px: float, py: float, heading: float, wall_map: WallMap,
                  max_range: float) -> int:
    dx, dy = math.cos(heading), math.sin(heading)
    best = math.inf
    for x1, y1, x2, y2 in wall_map.walls:
        ex, ey = x2 - x1, y2 - y1
        denom = dx * ey - dy * ex
        if denom == 0.0:
            continue  # parallel ray, no point contact
        ax, ay = x1 - px, y1 - py
        t = (ax * ey - ay * ex) / denom
        s = (ax * dy - ay * dx) / denom
        if t >= 0.0 and 0.0 <= s <= 1.0 and t < best:
            best = t
    if best > max_range:
        return NO_ECHO
    return int(round(best))


def sonar_scan(pose: RobotPose, wall_map: WallMap,
               max_range: float = SONAR_MAX_RANGE) -> SonarScan:
    """Three ideal rays at the heading and its perpendiculars."""
    heading = pose.theta / 1000.0
    return SonarScan(
        front=_ray_distance(pose.x, pose.y, heading, wall_map, max_range),
        left=_ray_distance(pose.x, pose.y, heading + math.pi / 2, wall_map,
                           max_range),
        right=_ray_distance(pose.x, pose.y, heading - math.pi / 2, wall_map,
                            max_range),
    )


def media_frame(tick: int, size: int = FRAME_BYTES) -> bytes:
    """Synthetic frame payload, deterministic in tick so a content
    check can detect loss or corruption downstream."""
    if size < 4:
        raise ValueError("frame size must be at least 4 bytes")
    head = struct.pack("!I", tick & 0xFFFFFFFF)
    reps = (size - 4) // 256 + 1
    body = (bytes(range(tick % 256, 256)) + bytes(range(256)) * reps)[:size - 4]
    return head + body
