"""Closed-loop teleoperation run over an impaired channel.

A scripted operator drives the simulated robot from the map's start to
its goal while every command and telemetry packet crosses a delay and
jitter channel (default: the shipped 43 ms / 4 ms profile).  Both ends
share one virtual clock ticking at the server rate, so per-packet
one-way delay is measured exactly and the whole run is deterministic
for a given seed: same route, same packet times, same verdict.

The run records one FlowSample row per delivered telemetry packet and
summarizes them, together with the bottleneck-link scenario checks,
into a flat-text verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .metrics import FlowSample, summarize, write_csv
from .netchan import ImpairmentChannel, ImpairmentProfile, parse_profile
from .pilot import Pilot, parse_waypoints
from .race import run_scenario, scenario_a, scenario_b, window_means
from .robot import WallMap, parse_map
from .session import SourceState, Verdict
from .teleop import (
    CMD_STOP,
    CMD_VELOCITY,
    CommandPayload,
    CommandStream,
    TeleopServer,
    decode_telemetry,
)
from .wire import decode_rtp, encode_rtp

OPERATOR_SSRC = 0x4F504552
WARMUP_S = 10.0          # scenario windows before this are transient
FAIR_SHARE_BPS = 0.5e6
LINK_RATE_BPS = 1.5e6


def _data_text(name: str) -> str:
    return resources.files("rtpteleop.data").joinpath(name).read_text(
        encoding="utf-8")


def default_map() -> WallMap:
    return parse_map(_data_text("lab_floor.map"))


def default_waypoints() -> list[tuple[float, float]]:
    return parse_waypoints(_data_text("lab_route.waypoints"))


def canonical_profile(seed: int = 1) -> ImpairmentProfile:
    """The shipped 43 ms / 4 ms one-way channel profile."""
    return replace(parse_profile(_data_text("internet_43ms.profile")),
                   seed=seed)


@dataclass
class ReplicationConfig:
    seed: int = 1
    tick_rate: float = 100.0
    telemetry_hz: float = 20.0
    command_hz: float = 10.0
    max_duration: float = 240.0
    settle_time: float = 1.0     # run on after arrival so stops land
    wall_map: WallMap | None = None          # default: shipped floor
    waypoints: list | None = None            # default: shipped route
    profile: ImpairmentProfile | None = None  # default: canonical


@dataclass
class ReplicationResult:
    samples: list                # telemetry FlowSample rows, per packet
    verdict: dict                # ordered flat summary
    reached: bool
    final_distance_mm: float
    duration: float
    session_jitter_ms: float


def run_replication(config: ReplicationConfig | None = None) -> ReplicationResult:
    cfg = config or ReplicationConfig()
    wall_map = cfg.wall_map if cfg.wall_map is not None else default_map()
    waypoints = cfg.waypoints if cfg.waypoints is not None \
        else default_waypoints()
    base = cfg.profile if cfg.profile is not None \
        else canonical_profile(cfg.seed)
    # independent draws per direction, still keyed to the one seed
    uplink = ImpairmentChannel(replace(base, seed=base.seed * 2 + 1))
    downlink = ImpairmentChannel(replace(base, seed=base.seed * 2 + 2))

    server = TeleopServer(wall_map=wall_map, tick_rate=cfg.tick_rate,
                          telemetry_hz=cfg.telemetry_hz)
    command_rx = SourceState(ssrc=OPERATOR_SSRC, clock_rate=1000)
    telemetry_rx = SourceState(ssrc=0, clock_rate=1000)
    stream = CommandStream(ssrc=OPERATOR_SSRC)
    pilot = Pilot(waypoints)

    dt = 1.0 / cfg.tick_rate
    command_interval = 1.0 / cfg.command_hz
    next_command = command_interval
    believed = None              # latest telemetry that arrived
    send_times: dict[int, float] = {}
    samples: list[FlowSample] = []
    prev_arrival = 0.0
    prev_lost = 0
    commands_sent = 0
    media_frames = 0
    arrived_at: float | None = None
    now = 0.0
    tick = 0

    while True:
        tick += 1
        now = tick * dt
        if now > cfg.max_duration:
            break

        inbound = []
        for payload, at in uplink.poll_deliveries(now):
            pkt = decode_rtp(payload)
            verdict, ext = command_rx.on_receive_data(
                pkt.sequence, pkt.timestamp, at)
            if verdict in (Verdict.NEW, Verdict.REORDERED):
                inbound.append((ext, pkt.payload))
        out = server.server_tick(now, inbound)

        for pkt in out.telemetry:
            send_times[pkt.sequence] = now
            downlink.submit(encode_rtp(pkt), now)
        media_frames += len(out.media)

        for payload, at in downlink.poll_deliveries(now):
            pkt = decode_rtp(payload)
            verdict, _ = telemetry_rx.on_receive_data(
                pkt.sequence, pkt.timestamp, at)
            if verdict is Verdict.DUPLICATE:
                continue
            believed = decode_telemetry(pkt.payload)
            sent = send_times.pop(pkt.sequence)
            # loss counters are meaningless until the source validates
            lost = telemetry_rx.cumulative_lost if telemetry_rx.validated \
                else prev_lost
            samples.append(FlowSample(
                t=at,
                flow="telemetry",
                throughput_bps=len(payload) * 8 / max(at - prev_arrival,
                                                      1e-9),
                delay_ms=(at - sent) * 1e3,
                jitter_ms=telemetry_rx.jitter,
                drops=max(lost - prev_lost, 0),
            ))
            prev_arrival = at
            prev_lost = lost

        if now + 1e-9 >= next_command:
            next_command += command_interval
            if believed is not None:
                v, w = pilot.command(believed.x, believed.y, believed.theta)
                cmd = CommandPayload(CMD_STOP) if pilot.reached \
                    else CommandPayload(CMD_VELOCITY, v, w)
                for pkt in stream.issue(cmd, now):
                    uplink.submit(encode_rtp(pkt), now)
                commands_sent += 1

        if arrived_at is None and pilot.reached:
            arrived_at = now
        if arrived_at is not None and now >= arrived_at + cfg.settle_time:
            break

    goal = wall_map.goal if wall_map is not None else waypoints[-1]
    final_distance = math.hypot(server.pose.x - goal[0],
                                server.pose.y - goal[1])
    reached = arrived_at is not None and final_distance <= 300.0
    stats = summarize(samples, "telemetry") if samples else {
        "mean_delay_ms": 0.0, "mean_jitter_ms": 0.0,
        "p95_delay_ms": 0.0, "loss_rate": 0.0}

    verdict = {
        "goal_reached": "yes" if reached else "no",
        "final_distance_mm": f"{final_distance:.1f}",
        "duration_s": f"{now:.2f}",
        "telemetry_packets": str(len(samples)),
        "mean_delay_ms": f"{stats['mean_delay_ms']:.3f}",
        "p95_delay_ms": f"{stats['p95_delay_ms']:.3f}",
        "mean_jitter_ms": f"{stats['mean_jitter_ms']:.3f}",
        "session_jitter_ms": f"{telemetry_rx.jitter:.3f}",
        "loss_rate": f"{stats['loss_rate']:.6f}",
        "commands_sent": str(commands_sent),
        "media_frames": str(media_frames),
        "malformed_commands": str(server.malformed),
    }
    return ReplicationResult(
        samples=samples,
        verdict=verdict,
        reached=reached,
        final_distance_mm=final_distance,
        duration=now,
        session_jitter_ms=telemetry_rx.jitter,
    )


def _within(value: float, target: float, tolerance: float) -> bool:
    return abs(value - target) <= tolerance * target


def race_checks(seed: int = 1) -> tuple[dict, object, object]:
    """Run both shipped scenarios and fold the published claims into
    pass/fail verdict entries."""
    res_a = run_scenario(scenario_a(seed=seed))
    res_b = run_scenario(scenario_b(seed=seed))

    fair = all(
        _within(window_means(res_a.samples, f, after=WARMUP_S)
                ["throughput_bps"], FAIR_SHARE_BPS, 0.10)
        for f in ("rtp", "udp", "tcp"))

    by_t: dict = {}
    for s in res_a.samples:
        if s.t > WARMUP_S:
            by_t.setdefault(s.t, {})[s.flow] = s.jitter_ms
    rows = [d for d in by_t.values() if len(d) == 3]
    wins = sum(1 for d in rows
               if d["tcp"] > d["rtp"] and d["tcp"] > d["udp"])
    dominance = wins / len(rows) if rows else 0.0

    tcp_rows = [s for s in res_b.samples
                if s.flow == "tcp" and s.t > WARMUP_S]
    starved = sum(1 for s in tcp_rows
                  if s.throughput_bps < 0.05 * LINK_RATE_BPS)
    starved_frac = starved / len(tcp_rows) if tcp_rows else 0.0
    rtp_bps = window_means(res_b.samples, "rtp",
                           after=WARMUP_S)["throughput_bps"]
    udp_bps = window_means(res_b.samples, "udp",
                           after=WARMUP_S)["throughput_bps"]
    split = abs(rtp_bps - udp_bps) <= 0.10 * max(rtp_bps, udp_bps)

    checks = {
        "scenario_a_fair_share": "pass" if fair else "fail",
        "scenario_a_tcp_jitter_dominance": f"{dominance:.3f}",
        "scenario_a_tcp_jitter": "pass" if dominance >= 0.9 else "fail",
        "scenario_b_tcp_starved_fraction": f"{starved_frac:.3f}",
        "scenario_b_tcp_starved": "pass" if starved_frac >= 0.9 else "fail",
        "scenario_b_cbr_split": "pass" if split else "fail",
    }
    return checks, res_a, res_b


def write_verdict(verdict: dict, path) -> None:
    lines = [f"{key} = {value}" for key, value in verdict.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def replicate_to_dir(out_dir, seed: int = 1) -> ReplicationResult:
    """Full reproduction run: impaired-channel drive plus both link
    scenarios; writes CSVs and the flat verdict file."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_replication(ReplicationConfig(seed=seed))
    checks, res_a, res_b = race_checks(seed=seed)
    write_csv(result.samples, out / "replication.csv")
    write_csv(res_a.samples, out / "race_a.csv")
    write_csv(res_b.samples, out / "race_b.csv")
    verdict = dict(result.verdict)
    verdict.update(checks)
    verdict["seed"] = str(seed)
    write_verdict(verdict, out / "verdict.txt")
    return result
