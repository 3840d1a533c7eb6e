"""Live mode: real sockets around the simulated robot.

``start_server`` binds the RTP/RTCP datagram ports plus an optional
web gateway and paces the teleop server against the wall clock;
``drive_route`` is the matching datagram client steering with the
scripted pilot.  An optional impairment profile sits in-process
between the gateway operator and the server, so a local console
session crosses the same kind of path the replication run models.

The gateway needs the `live` extra (fastapi + uvicorn); the datagram
side is pure stdlib asyncio.
"""

# No postponed annotations here: the gateway endpoint's WebSocket
# annotation must stay a live object for the route to be recognized.

import asyncio
import contextlib
import json
from dataclasses import dataclass, field, replace

from .netchan import ImpairmentChannel, ImpairmentProfile
from .pilot import Pilot
from .robot import WallMap
from .session import NoDataYet, SourceState
from .teleop import (
    CMD_STOP,
    CMD_VELOCITY,
    PT_TELEMETRY,
    CommandPayload,
    CommandStream,
    GatewayError,
    TeleopServer,
    TelemetryPayload,
    decode_telemetry,
    format_stats,
    format_telemetry,
    parse_console_message,
)
from .wire import (
    ReceiverReport,
    WireError,
    decode_rtcp_compound,
    decode_rtp,
    encode_rtcp_compound,
    encode_rtp,
)

DEFAULT_HOST = "127.0.0.1"
COMMAND_PORT = 5004      # RTCP one above, likewise for the other pairs
TELEMETRY_PORT = 5006
MEDIA_PORT = 5008
GATEWAY_PORT = 8080

GATEWAY_SSRC = 0x47415445
PEER_TIMEOUT = 5.0       # drop datagram peers silent this long
STATS_INTERVAL = 0.5
RTCP_PERIOD = 5.0


@dataclass
class LiveConfig:
    host: str = DEFAULT_HOST
    command_port: int = COMMAND_PORT
    telemetry_port: int = TELEMETRY_PORT
    media_port: int = MEDIA_PORT
    gateway_port: int | None = GATEWAY_PORT
    tick_rate: float = 100.0
    telemetry_hz: float = 20.0
    profile: ImpairmentProfile | None = None  # gateway operator path
    wall_map: WallMap | None = None           # default: shipped floor
    static_dir: str | None = None             # console assets to serve


@dataclass
class TickOut:
    """What one runtime tick wants transmitted."""

    messages: list = field(default_factory=list)    # gateway JSON lines
    telemetry: list = field(default_factory=list)   # encoded RTP
    media: list = field(default_factory=list)       # encoded RTP
    rtcp: list = field(default_factory=list)        # encoded compounds


class TeleopRuntime:
    """Transport-independent hub: one robot server, many operators.

    Datagram commands are deduplicated per source SSRC and fed to the
    server directly; gateway commands cross the optional impairment
    channel first, and the telemetry the gateway reports back crosses
    its return half, so the web console experiences the configured
    path while datagram clients see the raw socket path.
    """

    def __init__(self, wall_map: WallMap | None = None,
                 tick_rate: float = 100.0, telemetry_hz: float = 20.0,
                 profile: ImpairmentProfile | None = None):
        self.server = TeleopServer(wall_map=wall_map, tick_rate=tick_rate,
                                   telemetry_hz=telemetry_hz)
        self.wall_map = wall_map
        self.tick_rate = tick_rate
        base = profile if profile is not None else ImpairmentProfile()
        self.uplink = ImpairmentChannel(replace(base, seed=base.seed * 2 + 1))
        self.downlink = ImpairmentChannel(replace(base, seed=base.seed * 2 + 2))
        self.stream = CommandStream(ssrc=GATEWAY_SSRC)
        self.command_rx: dict[int, SourceState] = {}
        self.telemetry_rx = SourceState(ssrc=0, clock_rate=1000)
        self._send_times: dict[int, float] = {}
        self._pending: list = []         # (order, payload) awaiting next tick
        self._last_ext: dict[int, int] = {}   # newest enqueued ext per ssrc
        self._order = 0
        self._last_delay_ms = 0.0
        self._next_stats = 0.0
        self._next_rtcp = RTCP_PERIOD
        self.remote_reports: dict[int, ReceiverReport] = {}

    def gateway_message(self, line: str | bytes, now: float) -> None:
        """One console line in; raises GatewayError on bad input."""
        cmd = parse_console_message(line)
        for pkt in self.stream.issue(cmd, now):
            self.uplink.submit(encode_rtp(pkt), now)

    def _rx_state(self, ssrc: int) -> SourceState:
        state = self.command_rx.get(ssrc)
        if state is None:
            state = self.command_rx[ssrc] = SourceState(ssrc=ssrc,
                                                        clock_rate=1000)
        return state

    def _ingest_command(self, data: bytes, now: float) -> None:
        pkt = decode_rtp(data)
        verdict, ext = self._rx_state(pkt.ssrc).on_receive_data(
            pkt.sequence, pkt.timestamp, now)
        if verdict.name not in ("NEW", "REORDERED"):
            return
        # latest wins per source; sources are linearized by arrival,
        # since independent operators share no sequence space
        prev = self._last_ext.get(pkt.ssrc)
        if prev is not None and ext <= prev:
            return
        self._last_ext[pkt.ssrc] = ext
        self._order += 1
        self._pending.append((self._order, pkt.payload))

    def datagram_command(self, data: bytes, now: float) -> None:
        """Raw command datagram from a socket; bad packets count as
        malformed instead of raising."""
        try:
            self._ingest_command(data, now)
        except WireError:
            self.server.malformed += 1

    def datagram_rtcp(self, data: bytes, now: float) -> None:
        try:
            packets = decode_rtcp_compound(data)
        except WireError:
            return
        for pkt in packets:
            if isinstance(pkt, ReceiverReport):
                self.remote_reports[pkt.ssrc] = pkt

    def tick(self, now: float) -> TickOut:
        out = TickOut()
        for payload, at in self.uplink.poll_deliveries(now):
            with contextlib.suppress(WireError):
                self._ingest_command(payload, at)
        inbound = self._pending
        self._pending = []
        result = self.server.server_tick(now, inbound)

        for pkt in result.telemetry:
            encoded = encode_rtp(pkt)
            out.telemetry.append(encoded)
            self._send_times[pkt.sequence] = now
            self.downlink.submit(encoded, now)
        out.media = [encode_rtp(pkt) for pkt in result.media]

        for payload, at in self.downlink.poll_deliveries(now):
            pkt = decode_rtp(payload)
            verdict, _ = self.telemetry_rx.on_receive_data(
                pkt.sequence, pkt.timestamp, at)
            if verdict.name == "DUPLICATE":
                continue
            sent = self._send_times.pop(pkt.sequence, None)
            if sent is not None:
                self._last_delay_ms = (at - sent) * 1e3
            out.messages.append(format_telemetry(
                decode_telemetry(pkt.payload),
                delay_ms=self._last_delay_ms,
                jitter_ms=self.telemetry_rx.jitter))
        self._send_times = {seq: t for seq, t in self._send_times.items()
                            if now - t < PEER_TIMEOUT}

        if now >= self._next_stats:
            self._next_stats = now + STATS_INTERVAL
            out.messages.append(format_stats(self.stats_snapshot()))
        if now >= self._next_rtcp:
            self._next_rtcp = now + RTCP_PERIOD
            out.rtcp = self._rtcp_packets(now)
        return out

    def stats_snapshot(self) -> dict:
        rx = self.telemetry_rx
        lost = rx.cumulative_lost if rx.validated else 0
        expected = rx.expected if rx.validated else 0
        return {
            "delay_ms": round(self._last_delay_ms, 3),
            "jitter_ms": round(rx.jitter, 3),
            "loss_rate": round(lost / expected, 6) if expected else 0.0,
            "estopped": self.server.estopped,
            "malformed": self.server.malformed,
        }

    def _rtcp_packets(self, now: float) -> list[bytes]:
        packets = []
        with contextlib.suppress(Exception):
            packets.append(encode_rtcp_compound(
                [self.server.telemetry_sender.make_sender_report(now)]))
        blocks = []
        for state in self.command_rx.values():
            with contextlib.suppress(NoDataYet):
                blocks.append(state.make_receiver_report(now))
        if blocks:
            packets.append(encode_rtcp_compound(
                [ReceiverReport(ssrc=self.server.telemetry_sender.ssrc,
                                reports=blocks)]))
        return packets

    def map_description(self) -> dict:
        if self.wall_map is None:
            return {"walls": [], "start": None, "goal": None}
        return {
            "walls": [list(w) for w in self.wall_map.walls],
            "start": list(self.wall_map.start)
            if self.wall_map.start else None,
            "goal": list(self.wall_map.goal) if self.wall_map.goal else None,
        }


class GatewayHub:
    """Fan-out of runtime messages to connected console sockets."""

    def __init__(self):
        self._queues: set[asyncio.Queue] = set()

    def attach(self) -> asyncio.Queue:
        queue: asyncio.Queue = asyncio.Queue(maxsize=256)
        self._queues.add(queue)
        return queue

    def detach(self, queue: asyncio.Queue) -> None:
        self._queues.discard(queue)

    def broadcast(self, lines) -> None:
        for queue in self._queues:
            for line in lines:
                # a stalled console loses messages, not the server
                if not queue.full():
                    queue.put_nowait(line)


class _Clock:
    """Seconds since the pump started, from the loop's monotonic clock."""

    def __init__(self):
        self._t0: float | None = None

    def now(self) -> float:
        loop_time = asyncio.get_running_loop().time()
        if self._t0 is None:
            self._t0 = loop_time
        return loop_time - self._t0


class _CommandProtocol(asyncio.DatagramProtocol):
    def __init__(self, server: "LiveServer"):
        self.server = server

    def connection_made(self, transport):
        self.transport = transport

    def datagram_received(self, data, addr):
        self.server.note_peer(addr)
        self.server.runtime.datagram_command(data, self.server.clock.now())


class _RtcpProtocol(asyncio.DatagramProtocol):
    def __init__(self, server: "LiveServer"):
        self.server = server

    def connection_made(self, transport):
        self.transport = transport

    def datagram_received(self, data, addr):
        self.server.runtime.datagram_rtcp(data, self.server.clock.now())


class _TxProtocol(asyncio.DatagramProtocol):
    def connection_made(self, transport):
        self.transport = transport


class LiveServer:
    """Bound sockets, pump task, and peer registry for one server."""

    def __init__(self, config: LiveConfig):
        self.config = config
        self.runtime = TeleopRuntime(wall_map=config.wall_map,
                                     tick_rate=config.tick_rate,
                                     telemetry_hz=config.telemetry_hz,
                                     profile=config.profile)
        self.hub = GatewayHub()
        self.clock = _Clock()
        self.peers: dict[tuple, float] = {}
        self._transports: list = []
        self._tasks: list[asyncio.Task] = []
        self._tx: dict = {}
        self._ports: dict = {}

    def note_peer(self, addr) -> None:
        self.peers[addr] = self.clock.now()

    def live_peers(self) -> list[tuple]:
        now = self.clock.now()
        self.peers = {a: t for a, t in self.peers.items()
                      if now - t < PEER_TIMEOUT}
        return list(self.peers)

    @property
    def ports(self) -> dict:
        return self._ports

    async def start(self) -> None:
        loop = asyncio.get_running_loop()
        host = self.config.host

        async def bind(proto_factory, port):
            transport, protocol = await loop.create_datagram_endpoint(
                proto_factory, local_addr=(host, port))
            self._transports.append(transport)
            return transport, transport.get_extra_info("sockname")[1]

        cmd_t, cmd_port = await bind(lambda: _CommandProtocol(self),
                                     self.config.command_port)
        cmd_rtcp_t, cmd_rtcp = await bind(lambda: _RtcpProtocol(self),
                                          self.config.command_port + 1
                                          if self.config.command_port
                                          else 0)
        tel_t, tel_port = await bind(_TxProtocol, self.config.telemetry_port)
        tel_rtcp_t, tel_rtcp = await bind(lambda: _RtcpProtocol(self),
                                          self.config.telemetry_port + 1
                                          if self.config.telemetry_port
                                          else 0)
        med_t, med_port = await bind(_TxProtocol, self.config.media_port)
        self._tx = {"telemetry": tel_t, "media": med_t, "rtcp": tel_rtcp_t}
        self._ports = {"command": cmd_port, "command_rtcp": cmd_rtcp,
                       "telemetry": tel_port, "telemetry_rtcp": tel_rtcp,
                       "media": med_port}
        self._tasks.append(asyncio.ensure_future(self._pump()))

    async def _pump(self) -> None:
        loop = asyncio.get_running_loop()
        period = 1.0 / self.config.tick_rate
        next_at = loop.time() + period
        while True:
            delay = next_at - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            next_at += period
            out = self.runtime.tick(self.clock.now())
            self.dispatch(out)

    def dispatch(self, out: TickOut) -> None:
        peers = self.live_peers() if (out.telemetry or out.media
                                      or out.rtcp) else []
        for addr in peers:
            for data in out.telemetry:
                self._tx["telemetry"].sendto(data, addr)
            for data in out.media:
                self._tx["media"].sendto(data, addr)
            for data in out.rtcp:
                self._tx["rtcp"].sendto(data, (addr[0], addr[1] + 1))
        if out.messages:
            self.hub.broadcast(out.messages)

    async def stop(self) -> None:
        for task in self._tasks:
            task.cancel()
        for task in self._tasks:
            with contextlib.suppress(asyncio.CancelledError):
                await task
        for transport in self._transports:
            transport.close()


def build_app(runtime: TeleopRuntime, hub: GatewayHub,
              static_dir: str | None = None):
    """The gateway web app: /map, /ws, and optional static assets."""
    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    app = FastAPI()

    @app.get("/map")
    def get_map():
        return runtime.map_description()

    @app.websocket("/ws")
    async def gateway(ws: WebSocket):
        await ws.accept()
        queue = hub.attach()
        clock = _Clock()

        async def reader():
            while True:
                line = await ws.receive_text()
                try:
                    runtime.gateway_message(line, clock.now())
                except GatewayError as exc:
                    await ws.send_text(json.dumps(
                        {"type": "error", "error": str(exc)},
                        separators=(",", ":")))

        async def writer():
            while True:
                await ws.send_text(await queue.get())

        tasks = [asyncio.ensure_future(reader()),
                 asyncio.ensure_future(writer())]
        try:
            await asyncio.wait(tasks, return_when=asyncio.FIRST_COMPLETED)
        except WebSocketDisconnect:
            pass
        finally:
            hub.detach(queue)
            for task in tasks:
                task.cancel()
                with contextlib.suppress(asyncio.CancelledError, Exception):
                    await task

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="console")
    return app


async def serve(config: LiveConfig | None = None,
                ready: asyncio.Event | None = None) -> None:
    """Runs the datagram server and, if configured, the web gateway
    until cancelled."""
    cfg = config or LiveConfig()
    server = LiveServer(cfg)
    await server.start()
    ports = " ".join(f"{name}={port}" for name, port in server.ports.items())
    gateway = (f" gateway=http://{cfg.host}:{cfg.gateway_port}/"
               if cfg.gateway_port is not None else "")
    print(f"serving: {ports}{gateway}", flush=True)
    # the gateway console drives through the same runtime the datagram
    # clients hit, so both views always agree
    gateway_task = None
    if cfg.gateway_port is not None:
        import uvicorn

        app = build_app(server.runtime, server.hub, cfg.static_dir)
        uv_config = uvicorn.Config(app, host=cfg.host, port=cfg.gateway_port,
                                   log_level="warning")
        uv_server = uvicorn.Server(uv_config)
        gateway_task = asyncio.ensure_future(uv_server.serve())
    if ready is not None:
        ready.set()
    try:
        if gateway_task is not None:
            await gateway_task
        else:
            await asyncio.Event().wait()
    finally:
        await server.stop()
        if gateway_task is not None:
            gateway_task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await gateway_task


@dataclass
class DriveReport:
    reached: bool
    duration: float
    commands_sent: int
    telemetry_packets: int
    jitter_ms: float
    final_pose: TelemetryPayload | None


class _DriveProtocol(asyncio.DatagramProtocol):
    """Client side: collects telemetry arriving on the local socket."""

    def __init__(self, clock: _Clock):
        self.clock = clock
        self.rx = SourceState(ssrc=0, clock_rate=1000)
        self.believed: TelemetryPayload | None = None
        self.packets = 0

    def connection_made(self, transport):
        self.transport = transport

    def datagram_received(self, data, addr):
        try:
            pkt = decode_rtp(data)
        except WireError:
            return
        if pkt.payload_type != PT_TELEMETRY:
            return
        verdict, _ = self.rx.on_receive_data(pkt.sequence, pkt.timestamp,
                                             self.clock.now())
        if verdict.name == "DUPLICATE":
            return
        self.believed = decode_telemetry(pkt.payload)
        self.packets += 1


async def drive_route(waypoints, host: str = DEFAULT_HOST,
                      command_port: int = COMMAND_PORT,
                      rate: float = 10.0, duration: float = 180.0,
                      cruise: float | None = None,
                      ssrc: int = 0x44524956) -> DriveReport:
    """Steers a served robot over UDP with the scripted pilot."""
    loop = asyncio.get_running_loop()
    clock = _Clock()
    transport, protocol = await loop.create_datagram_endpoint(
        lambda: _DriveProtocol(clock), local_addr=("0.0.0.0", 0))
    pilot = Pilot(waypoints) if cruise is None \
        else Pilot(waypoints, cruise=cruise)
    stream = CommandStream(ssrc=ssrc)
    target = (host, command_port)
    interval = 1.0 / rate
    commands = 0
    start = clock.now()
    try:
        while clock.now() - start < duration:
            now = clock.now()
            believed = protocol.believed
            if believed is None:
                # announce ourselves so the server learns where to
                # send telemetry; a stop is always safe to repeat
                cmd = CommandPayload(CMD_STOP)
            elif pilot.reached:
                cmd = CommandPayload(CMD_STOP)
            else:
                v, w = pilot.command(believed.x, believed.y, believed.theta)
                cmd = CommandPayload(CMD_STOP) if pilot.reached \
                    else CommandPayload(CMD_VELOCITY, v, w)
            for pkt in stream.issue(cmd, now):
                transport.sendto(encode_rtp(pkt), target)
            commands += 1
            if pilot.reached:
                break
            await asyncio.sleep(interval)
        # a few final stops so the last command surviving loss is a stop
        for _ in range(3):
            for pkt in stream.issue(CommandPayload(CMD_STOP), clock.now()):
                transport.sendto(encode_rtp(pkt), target)
            await asyncio.sleep(interval)
    finally:
        transport.close()
    return DriveReport(
        reached=pilot.reached,
        duration=clock.now() - start,
        commands_sent=commands,
        telemetry_packets=protocol.packets,
        jitter_ms=protocol.rx.jitter,
        final_pose=protocol.believed,
    )
