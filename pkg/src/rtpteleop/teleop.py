"""Teleoperation control plane.

Bit-exact command and telemetry payload profiles, the server loop that
bridges an operator to the simulated robot, and the translation layer
for the operator console's line-delimited JSON messages.

Payload profiles (all big-endian, media clock 1000 Hz):

    command   type 96   !Bhh      cmd_type, v mm/s, w mrad/s      5 bytes
    telemetry type 97   !iiiHHHH  x, y, theta, sonar f/l/r, seq  20 bytes
    media     type 98   synthetic frame from robot.media_frame
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field

from . import robot
from .robot import RobotPose, WallMap, media_frame, sonar_scan, step
from .session import RtpSender
from .wire import RtpPacket

PT_COMMAND = 96
PT_TELEMETRY = 97
PT_MEDIA = 98
TELEOP_CLOCK_RATE = 1000

CMD_VELOCITY = 0
CMD_STOP = 1
CMD_ESTOP = 2

WATCHDOG_TIMEOUT = 0.5   # s
COMMAND_REPEATS = 2      # extra copies of every issued command

_COMMAND_STRUCT = struct.Struct("!Bhh")
_TELEMETRY_STRUCT = struct.Struct("!iiiHHHH")


class PayloadError(ValueError):
    """Malformed command or telemetry payload."""


class GatewayError(ValueError):
    """Console message violates the gateway schema."""


@dataclass(frozen=True)
class CommandPayload:
    cmd_type: int = CMD_VELOCITY
    v: int = 0   # mm/s, signed 16-bit
    w: int = 0   # mrad/s, signed 16-bit

    def __post_init__(self) -> None:
        if self.cmd_type not in (CMD_VELOCITY, CMD_STOP, CMD_ESTOP):
            raise PayloadError(f"unknown cmd_type {self.cmd_type}")
        if self.cmd_type != CMD_VELOCITY:
            # stop and estop always carry zero velocity
            object.__setattr__(self, "v", 0)
            object.__setattr__(self, "w", 0)


@dataclass(frozen=True)
class TelemetryPayload:
    x: int = 0          # mm, signed 32-bit
    y: int = 0
    theta: int = 0      # mrad, signed 32-bit
    sonar_front: int = 0
    sonar_left: int = 0
    sonar_right: int = 0
    last_cmd_seq: int = 0

    @property
    def sonar(self) -> tuple[int, int, int]:
        return (self.sonar_front, self.sonar_left, self.sonar_right)


def encode_command(c: CommandPayload) -> bytes:
    try:
        return _COMMAND_STRUCT.pack(c.cmd_type, c.v, c.w)
    except struct.error as exc:
        raise PayloadError(str(exc)) from None


def decode_command(buf: bytes) -> CommandPayload:
    if len(buf) != _COMMAND_STRUCT.size:
        raise PayloadError(f"command payload must be 5 bytes, got {len(buf)}")
    cmd_type, v, w = _COMMAND_STRUCT.unpack(buf)
    return CommandPayload(cmd_type=cmd_type, v=v, w=w)


def encode_telemetry(t: TelemetryPayload) -> bytes:
    try:
        return _TELEMETRY_STRUCT.pack(t.x, t.y, t.theta, t.sonar_front,
                                      t.sonar_left, t.sonar_right,
                                      t.last_cmd_seq)
    except struct.error as exc:
        raise PayloadError(str(exc)) from None


def decode_telemetry(buf: bytes) -> TelemetryPayload:
    if len(buf) != _TELEMETRY_STRUCT.size:
        raise PayloadError(f"telemetry payload must be 20 bytes, got {len(buf)}")
    fields = _TELEMETRY_STRUCT.unpack(buf)
    return TelemetryPayload(*fields)


class CommandStream:
    """Client-side command source.

    RTP gives no delivery guarantee, so every issued command goes out as
    a burst of identical payloads under consecutive sequence numbers;
    the server's latest-wins rule makes the copies harmless.
    """

    def __init__(self, ssrc: int, initial_seq: int = 0, start_time: float = 0.0,
                 repeats: int = COMMAND_REPEATS):
        self.sender = RtpSender(ssrc, PT_COMMAND, TELEOP_CLOCK_RATE,
                                initial_seq=initial_seq, start_time=start_time)
        self.repeats = repeats

    def issue(self, cmd: CommandPayload, now: float) -> list[RtpPacket]:
        payload = encode_command(cmd)
        return [self.sender.next_packet(payload, now)
                for _ in range(1 + self.repeats)]


@dataclass
class TickOutput:
    telemetry: list = field(default_factory=list)  # RtpPacket, type 97
    media: list = field(default_factory=list)      # RtpPacket, type 98


class TeleopServer:
    """Bridges decoded operator commands to the simulated robot.

    The caller owns transport, session, and playout; `server_tick`
    consumes commands the playout buffer released, in extended-sequence
    order, and produces outbound telemetry and media RTP packets.
    """

    def __init__(self, wall_map: WallMap | None = None,
                 pose: RobotPose | None = None,
                 tick_rate: float = 100.0,
                 telemetry_hz: float = 20.0,
                 media_fps: float = robot.FRAME_RATE,
                 frame_bytes: int = robot.FRAME_BYTES,
                 watchdog_timeout: float = WATCHDOG_TIMEOUT,
                 telemetry_ssrc: int = 0x54454C45,
                 media_ssrc: int = 0x4D454449,
                 start_time: float = 0.0):
        if not 20.0 <= tick_rate <= 1000.0:
            raise ValueError("tick_rate must be between 20 and 1000 Hz")
        self.wall_map = wall_map
        if pose is None:
            if wall_map is not None and wall_map.start is not None:
                sx, sy, stheta = wall_map.start
                pose = RobotPose(x=sx, y=sy, theta=stheta)
            else:
                pose = RobotPose()
        self.pose = pose
        self.tick_rate = tick_rate
        self.watchdog_timeout = watchdog_timeout
        self.watchdog_deadline = start_time + watchdog_timeout
        self.estopped = False
        self.last_cmd_ext: int | None = None
        self.malformed = 0
        self.frame_bytes = frame_bytes
        self._telemetry_interval = 1.0 / telemetry_hz
        self._media_interval = 1.0 / media_fps
        self._next_telemetry = start_time
        self._next_media = start_time
        self._media_tick = 0
        self.telemetry_sender = RtpSender(telemetry_ssrc, PT_TELEMETRY,
                                          TELEOP_CLOCK_RATE,
                                          start_time=start_time)
        self.media_sender = RtpSender(media_ssrc, PT_MEDIA, TELEOP_CLOCK_RATE,
                                      start_time=start_time)

    def _apply(self, cmd: CommandPayload) -> None:
        if cmd.cmd_type == CMD_ESTOP:
            self.estopped = True
            self.pose = robot.command(self.pose, 0.0, 0.0)
        elif cmd.cmd_type == CMD_STOP:
            self.estopped = False
            self.pose = robot.command(self.pose, 0.0, 0.0)
        elif not self.estopped:
            self.pose = robot.command(self.pose, float(cmd.v), float(cmd.w))

    def server_tick(self, now: float, inbound=()) -> TickOutput:
        """Runs one control tick.

        inbound: iterable of (ext_seq, command) where command is a
        CommandPayload or a raw payload byte string; items are applied
        in extended-sequence order and stale ones are skipped.
        """
        for ext_seq, item in sorted(inbound, key=lambda pair: pair[0]):
            if self.last_cmd_ext is not None and ext_seq <= self.last_cmd_ext:
                continue
            if isinstance(item, (bytes, bytearray)):
                try:
                    item = decode_command(bytes(item))
                except PayloadError:
                    self.malformed += 1
                    continue
            self._apply(item)
            self.last_cmd_ext = ext_seq
            self.watchdog_deadline = now + self.watchdog_timeout

        if now >= self.watchdog_deadline and (self.pose.v or self.pose.w):
            # Watchdog: no command heard recently, stop where we stand.
            self.pose = robot.command(self.pose, 0.0, 0.0)

        self.pose = step(self.pose, 1.0 / self.tick_rate, self.wall_map)

        out = TickOutput()
        while now >= self._next_telemetry:
            out.telemetry.append(self.telemetry_sender.next_packet(
                encode_telemetry(self._telemetry()), now))
            self._next_telemetry += self._telemetry_interval
        while now >= self._next_media:
            out.media.append(self.media_sender.next_packet(
                media_frame(self._media_tick, self.frame_bytes), now,
                marker=True))
            self._media_tick += 1
            self._next_media += self._media_interval
        return out

    def _telemetry(self) -> TelemetryPayload:
        scan = (sonar_scan(self.pose, self.wall_map) if self.wall_map
                else robot.SonarScan(robot.NO_ECHO, robot.NO_ECHO, robot.NO_ECHO))
        last_seq = 0 if self.last_cmd_ext is None else self.last_cmd_ext & 0xFFFF
        return TelemetryPayload(
            x=int(round(self.pose.x)),
            y=int(round(self.pose.y)),
            theta=int(round(self.pose.theta)),
            sonar_front=scan.front,
            sonar_left=scan.left,
            sonar_right=scan.right,
            last_cmd_seq=last_seq,
        )


def _field_int(msg: dict, key: str) -> int:
    value = msg.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise GatewayError(f"field {key!r} must be a number")
    if not math.isfinite(value):
        raise GatewayError(f"field {key!r} must be finite")
    return min(max(int(round(value)), -32768), 32767)


def parse_console_message(line: str | bytes) -> CommandPayload:
    """Translates one console message line into a command."""
    try:
        msg = json.loads(line)
    except ValueError:
        raise GatewayError("message is not valid JSON") from None
    if not isinstance(msg, dict):
        raise GatewayError("message must be an object")
    kind = msg.get("type")
    if kind == "cmd":
        return CommandPayload(CMD_VELOCITY, _field_int(msg, "v"),
                              _field_int(msg, "w"))
    if kind == "stop":
        return CommandPayload(CMD_STOP)
    if kind == "estop":
        return CommandPayload(CMD_ESTOP)
    raise GatewayError(f"unknown message type {kind!r}")


def format_telemetry(t: TelemetryPayload, delay_ms: float = 0.0,
                     jitter_ms: float = 0.0) -> str:
    """Renders telemetry as a single-line console message."""
    return json.dumps({
        "type": "telemetry",
        "x": t.x, "y": t.y, "theta": t.theta,
        "sonar": [t.sonar_front, t.sonar_left, t.sonar_right],
        "delay_ms": round(delay_ms, 3),
        "jitter_ms": round(jitter_ms, 3),
        "seq": t.last_cmd_seq,
    }, separators=(",", ":"))


def format_stats(stats: dict) -> str:
    """Renders a statistics snapshot as a single-line console message."""
    msg = {"type": "stats"}
    msg.update(stats)
    return json.dumps(msg, separators=(",", ":"))
