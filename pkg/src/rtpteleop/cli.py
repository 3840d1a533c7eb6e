"""Command-line entry point.

One executable with five subcommands: `serve` and `drive` run the live
datagram server and its scripted client, `race` runs the bottleneck
link scenarios, `report` renders charts from a metrics CSV, and
`replicate` performs the full deterministic reproduction run.

Exit codes: 0 success, 1 usage error, 2 runtime failure.  The
TELEOP_SEED environment variable overrides any --seed flag.
"""

from __future__ import annotations

import argparse
import asyncio
import contextlib
import os
import sys
from dataclasses import replace

from .metrics import read_csv, render, write_csv
from .netchan import load_profile
from .pilot import load_waypoints
from .race import load_scenario, run_scenario, scenario_a, scenario_b
from .replicate import default_waypoints, replicate_to_dir
from .robot import parse_map

SEED_ENV = "TELEOP_SEED"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rtpteleop",
        description="Teleoperation toolkit over a from-scratch RTP stack.")
    sub = parser.add_subparsers(dest="mode", required=True)

    serve = sub.add_parser("serve", help="run the robot server and gateway")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--gateway-port", type=int, default=8080)
    serve.add_argument("--no-gateway", action="store_true",
                       help="datagram ports only")
    serve.add_argument("--command-port", type=int, default=5004)
    serve.add_argument("--telemetry-port", type=int, default=5006)
    serve.add_argument("--media-port", type=int, default=5008)
    serve.add_argument("--map", help="wall map file (default: shipped floor)")
    serve.add_argument("--profile",
                       help="impairment profile for the gateway path")
    serve.add_argument("--static",
                       help="directory of console assets to serve")
    serve.add_argument("--seed", type=int, default=1,
                       help="impairment profile seed")

    drive = sub.add_parser("drive",
                           help="steer a served robot with the scripted "
                                "pilot; exit 0 once the goal is reached")
    drive.add_argument("--host", default="127.0.0.1")
    drive.add_argument("--command-port", type=int, default=5004)
    drive.add_argument("--route",
                       help="waypoint file (default: shipped route)")
    drive.add_argument("--rate", type=float, default=10.0,
                       help="command rate, Hz")
    drive.add_argument("--duration", type=float, default=180.0,
                       help="give up after this many seconds")
    drive.add_argument("--cruise", type=float, default=None,
                       help="cruise speed override, mm/s")

    race = sub.add_parser("race", help="run a bottleneck link scenario")
    race.add_argument("--scenario", required=True,
                      help="A, B, or a scenario file")
    race.add_argument("--duration", type=float, default=None,
                      help="override the scenario duration, seconds")
    race.add_argument("--seed", type=int, default=1)
    race.add_argument("--out", required=True, help="CSV output path")

    report = sub.add_parser("report", help="render charts from a CSV")
    report.add_argument("--in", dest="in_path", required=True,
                        help="metrics CSV produced by race or replicate")
    report.add_argument("--out", required=True, help="output directory")

    replicate = sub.add_parser(
        "replicate",
        help="deterministic reproduction run: impaired-channel drive "
             "plus both scenarios, CSVs and a verdict file")
    replicate.add_argument("--seed", type=int, default=1)
    replicate.add_argument("--out", default="replication",
                           help="output directory")
    return parser


def _apply_seed_env(args: argparse.Namespace) -> None:
    value = os.environ.get(SEED_ENV)
    if value is not None and hasattr(args, "seed"):
        try:
            args.seed = int(value)
        except ValueError:
            raise ValueError(f"{SEED_ENV} must be an integer, got {value!r}")


def _run_serve(args) -> int:
    from .live import LiveConfig, serve

    wall_map = parse_map(_read(args.map)) if args.map else None
    profile = None
    if args.profile:
        profile = replace(load_profile(args.profile), seed=args.seed)
    config = LiveConfig(
        host=args.host,
        command_port=args.command_port,
        telemetry_port=args.telemetry_port,
        media_port=args.media_port,
        gateway_port=None if args.no_gateway else args.gateway_port,
        profile=profile,
        wall_map=wall_map if wall_map is not None else _default_map(),
        static_dir=args.static,
    )
    with contextlib.suppress(KeyboardInterrupt):
        asyncio.run(serve(config))
    return 0


def _run_drive(args) -> int:
    from .live import drive_route

    waypoints = load_waypoints(args.route) if args.route \
        else default_waypoints()
    report = asyncio.run(drive_route(
        waypoints, host=args.host, command_port=args.command_port,
        rate=args.rate, duration=args.duration, cruise=args.cruise))
    print(f"goal_reached = {'yes' if report.reached else 'no'}")
    print(f"duration_s = {report.duration:.2f}")
    print(f"commands_sent = {report.commands_sent}")
    print(f"telemetry_packets = {report.telemetry_packets}")
    print(f"jitter_ms = {report.jitter_ms:.3f}")
    return 0 if report.reached else 2


def _run_race(args) -> int:
    name = args.scenario
    if name.upper() == "A":
        scenario = scenario_a(seed=args.seed)
    elif name.upper() == "B":
        scenario = scenario_b(seed=args.seed)
    else:
        scenario = replace(load_scenario(name), seed=args.seed)
    if args.duration is not None:
        scenario = replace(scenario, duration=args.duration)
    result = run_scenario(scenario)
    write_csv(result.samples, args.out)
    print(f"wrote {args.out}: {len(result.samples)} samples, "
          f"{len(result.totals)} flows")
    return 0


def _run_report(args) -> int:
    samples = read_csv(args.in_path)
    paths = render(samples, args.out)
    for path in paths:
        print(f"wrote {path}")
    return 0


def _run_replicate(args) -> int:
    result = replicate_to_dir(args.out, seed=args.seed)
    verdict_path = os.path.join(args.out, "verdict.txt")
    with open(verdict_path, "r", encoding="utf-8") as fh:
        sys.stdout.write(fh.read())
    return 0 if result.reached else 2


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _default_map():
    from .replicate import default_map

    return default_map()


_HANDLERS = {
    "serve": _run_serve,
    "drive": _run_drive,
    "race": _run_race,
    "report": _run_report,
    "replicate": _run_replicate,
}


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed the synopsis or help text
        return 0 if exc.code in (0, None) else 1
    try:
        _apply_seed_env(args)
        return _HANDLERS[args.mode](args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
