import { describe, expect, it } from "vitest";

import { encodeOutbound, gatewayUrl, mapUrl, parseInbound, parseMap }
  from "../src/protocol.js";

describe("parseInbound", () => {
  it("reads a telemetry message", () => {
    const msg = parseInbound(JSON.stringify({
      type: "telemetry", x: 120, y: -40, theta: 310,
      sonar: [2100, 900, 4000], delay_ms: 43.2, jitter_ms: 4.4, seq: 17,
    }));
    expect(msg.kind).toBe("telemetry");
    if (msg.kind !== "telemetry") return;
    expect(msg.telemetry.x).toBe(120);
    expect(msg.telemetry.sonar).toEqual([2100, 900, 4000]);
    expect(msg.telemetry.jitter_ms).toBeCloseTo(4.4);
  });

  it("reads stats and error messages", () => {
    const stats = parseInbound(JSON.stringify({
      type: "stats", delay_ms: 43, jitter_ms: 4.39, loss_rate: 0.001,
      estopped: false, malformed: 0,
    }));
    expect(stats.kind).toBe("stats");
    const err = parseInbound('{"type":"error","error":"bad v"}');
    expect(err).toEqual({ kind: "error", error: "bad v" });
  });

  it("rejects junk", () => {
    expect(() => parseInbound("not json")).toThrow(/not valid JSON/);
    expect(() => parseInbound('"just a string"')).toThrow(/object/);
    expect(() => parseInbound('{"type":"nope"}')).toThrow(/unknown/);
    expect(() => parseInbound(
      '{"type":"telemetry","x":"far"}')).toThrow(/bad/);
  });
});

describe("encodeOutbound", () => {
  it("produces the wire shapes", () => {
    expect(JSON.parse(encodeOutbound({ type: "cmd", v: 100, w: 0 })))
      .toEqual({ type: "cmd", v: 100, w: 0 });
    expect(JSON.parse(encodeOutbound({ type: "stop" })))
      .toEqual({ type: "stop" });
    expect(JSON.parse(encodeOutbound({ type: "estop" })))
      .toEqual({ type: "estop" });
  });

  it("clamps command velocities to the signed 16-bit range", () => {
    const wild = JSON.parse(
      encodeOutbound({ type: "cmd", v: 1e9, w: -1e9 }));
    expect(wild).toEqual({ type: "cmd", v: 32767, w: -32768 });
  });
});

describe("gatewayUrl", () => {
  it("accepts ws and upgrades http", () => {
    expect(gatewayUrl("ws://10.0.0.5:8080/ws"))
      .toBe("ws://10.0.0.5:8080/ws");
    expect(gatewayUrl("ws://10.0.0.5:8080"))
      .toBe("ws://10.0.0.5:8080/ws");
    expect(gatewayUrl("http://robot.local:8080/anything"))
      .toBe("ws://robot.local:8080/ws");
    expect(gatewayUrl("https://robot.example"))
      .toBe("wss://robot.example/ws");
  });

  it("rejects things that cannot name a gateway", () => {
    expect(() => gatewayUrl("")).toThrow(/not a valid/);
    expect(() => gatewayUrl("robot dot local")).toThrow(/not a valid/);
    expect(() => gatewayUrl("ftp://robot")).toThrow(/not a valid/);
  });

  it("derives the map endpoint from the socket endpoint", () => {
    expect(mapUrl("ws://h:8080/ws")).toBe("http://h:8080/map");
    expect(mapUrl("wss://h/ws")).toBe("https://h/map");
  });
});

describe("parseMap", () => {
  it("reads walls and markers", () => {
    const map = parseMap({
      walls: [[0, 0, 5000, 0], [0, 0, 0, 3000]],
      start: [800, 1000, 0], goal: [4200, 2100],
    });
    expect(map.walls.length).toBe(2);
    expect(map.start).toEqual([800, 1000, 0]);
    expect(map.goal).toEqual([4200, 2100]);
  });

  it("tolerates missing markers and rejects bad shapes", () => {
    const bare = parseMap({ walls: [], start: null, goal: null });
    expect(bare.start).toBeNull();
    expect(() => parseMap({ walls: [[1, 2, 3]] })).toThrow(/bad wall/);
    expect(() => parseMap("nope")).toThrow(/bad map/);
  });
});
