import { describe, expect, it } from "vitest";

import { COMMAND_INTERVAL_MS, ConsoleCore, RECONNECT_BACKOFF_S,
         SERIES_CAP, TRAIL_CAP } from "../src/console.js";

function makeCore() {
  const wire: string[] = [];
  const core = new ConsoleCore((line) => wire.push(line));
  return { core, wire };
}

function telemetryLine(x: number, y: number, extra: object = {}): string {
  return JSON.stringify({
    type: "telemetry", x, y, theta: 0, sonar: [4000, 4000, 4000],
    delay_ms: 43, jitter_ms: 4.4, seq: 1, ...extra,
  });
}

describe("command emission", () => {
  it("emits nothing while disconnected, whatever the operator does", () => {
    const { core, wire } = makeCore();
    core.setDrive(100, 0, 0);
    core.tick(1000);
    core.release();
    core.estop();
    expect(wire).toEqual([]);
    expect(core.sent).toEqual([]);   // the message log agrees
  });

  it("emits nothing while connecting either", () => {
    const { core, wire } = makeCore();
    core.socketConnecting();
    core.setDrive(100, 0, 0);
    core.tick(1000);
    expect(wire).toEqual([]);
  });

  it("streams a held command at 10 Hz and stops once on release", () => {
    const { core, wire } = makeCore();
    core.socketOpen();
    core.setDrive(100, 0, 0);
    // fine-grained UI timer for one second of holding
    for (let t = 10; t <= 1000; t += 10) core.tick(t);
    const cmds = wire.map((line) => JSON.parse(line));
    expect(cmds.length).toBe(1 + 1000 / COMMAND_INTERVAL_MS);
    for (const cmd of cmds) {
      expect(cmd).toEqual({ type: "cmd", v: 100, w: 0 });
    }
    core.release();
    core.tick(2000);
    core.tick(3000);
    expect(wire.length).toBe(cmds.length + 1);
    expect(JSON.parse(wire[wire.length - 1])).toEqual({ type: "stop" });
  });

  it("re-sends immediately when the held velocity changes", () => {
    const { core, wire } = makeCore();
    core.socketOpen();
    core.setDrive(100, 0, 0);
    core.setDrive(100, 0, 5);      // same command, no duplicate
    expect(wire.length).toBe(1);
    core.setDrive(0, 500, 6);      // turning now
    expect(wire.length).toBe(2);
    expect(JSON.parse(wire[1])).toEqual({ type: "cmd", v: 0, w: 500 });
  });

  it("sends estop immediately even while keys are held", () => {
    const { core, wire } = makeCore();
    core.socketOpen();
    core.setDrive(100, 0, 0);
    core.estop();
    expect(JSON.parse(wire[wire.length - 1])).toEqual({ type: "estop" });
    // the hold is dropped: no further stream
    core.tick(500);
    core.tick(1000);
    expect(wire.length).toBe(2);
    expect(core.holding).toBe(false);
  });

  it("resyncs instead of bursting after a stalled timer", () => {
    const { core, wire } = makeCore();
    core.socketOpen();
    core.setDrive(100, 0, 0);
    core.tick(5000);               // tab slept five seconds
    expect(wire.length).toBe(2);   // one initial, one catch-up
  });

  it("drops the hold when the connection dies", () => {
    const { core, wire } = makeCore();
    core.socketOpen();
    core.setDrive(100, 0, 0);
    core.socketClosed("connection lost");
    core.socketOpen();             // reconnected
    core.tick(10_000);
    expect(wire.length).toBe(1);   // nothing resumed by itself
    expect(core.holding).toBe(false);
  });
});

describe("reconnect backoff", () => {
  it("follows the 1, 2, 4 second schedule and then stays put", () => {
    const { core } = makeCore();
    const delays = [0, 1, 2, 3, 4, 9].map((n) => core.reconnectDelayS(n));
    expect(delays).toEqual([1, 2, 4, 4, 4, 4]);
    expect(RECONNECT_BACKOFF_S).toEqual([1, 2, 4]);
  });
});

describe("inbound handling", () => {
  it("shows the last telemetry verbatim, with no extrapolation", () => {
    const { core } = makeCore();
    core.socketOpen();
    core.handleMessage(telemetryLine(120, -40), 0);
    core.handleMessage(telemetryLine(130, -42), 50);
    expect(core.latest).not.toBeNull();
    expect(core.latest!.x).toBe(130);
    expect(core.latest!.y).toBe(-42);
    // time passing without messages must not move the displayed pose
    core.tick(10_000);
    expect(core.latest!.x).toBe(130);
  });

  it("caps the trail at the configured bound", () => {
    const { core } = makeCore();
    core.socketOpen();
    for (let i = 0; i < TRAIL_CAP + 500; i++) {
      core.handleMessage(telemetryLine(i, 0), i * 50);
    }
    expect(core.trail.length).toBe(TRAIL_CAP);
    expect(core.trail[0][0]).toBe(500);          // oldest dropped
    expect(core.trail[TRAIL_CAP - 1][0]).toBe(TRAIL_CAP + 499);
  });

  it("caps the chart series too", () => {
    const { core } = makeCore();
    core.socketOpen();
    for (let i = 0; i < SERIES_CAP + 100; i++) {
      core.handleMessage(telemetryLine(0, 0, { jitter_ms: i }), i * 50);
    }
    expect(core.delaySeries.length).toBe(SERIES_CAP);
    expect(core.jitterSeries.length).toBe(SERIES_CAP);
    expect(core.jitterSeries[SERIES_CAP - 1].value).toBe(SERIES_CAP + 99);
  });

  it("keeps stats and surfaces gateway errors in the banner", () => {
    const { core } = makeCore();
    core.socketOpen();
    core.handleMessage(JSON.stringify({
      type: "stats", delay_ms: 43, jitter_ms: 4.39, loss_rate: 0,
      estopped: true, malformed: 2,
    }), 0);
    expect(core.stats!.estopped).toBe(true);
    core.handleMessage('{"type":"error","error":"bad v in cmd"}', 1);
    expect(core.lastError).toBe("bad v in cmd");
  });

  it("rejects garbage without corrupting state", () => {
    const { core } = makeCore();
    core.socketOpen();
    core.handleMessage(telemetryLine(5, 5), 0);
    const before = core.latest;
    expect(core.handleMessage("%%%", 1)).toBeNull();
    expect(core.lastError).toMatch(/not valid JSON/);
    expect(core.latest).toBe(before);
    expect(core.trail.length).toBe(1);
  });
});
