// Text protocol spoken over the gateway websocket.  One JSON object
// per message in both directions; units are millimeters, milliradians
// and milliseconds throughout.

export interface Telemetry {
  x: number;
  y: number;
  theta: number;              // mrad
  sonar: [number, number, number];   // front, left, right, mm
  delay_ms: number;
  jitter_ms: number;
  seq: number;                // low 16 bits of the last applied command
}

export interface Stats {
  delay_ms: number;
  jitter_ms: number;
  loss_rate: number;
  estopped: boolean;
  malformed: number;
}

export interface GatewayErrorMsg {
  error: string;
}

export type Inbound =
  | { kind: "telemetry"; telemetry: Telemetry }
  | { kind: "stats"; stats: Stats }
  | { kind: "error"; error: string };

export type Outbound =
  | { type: "cmd"; v: number; w: number }
  | { type: "stop" }
  | { type: "estop" };

export interface MapData {
  walls: Array<[number, number, number, number]>;
  start: [number, number, number] | null;   // x, y, theta
  goal: [number, number] | null;
}

function num(value: unknown, name: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new Error(`bad ${name} in gateway message`);
  }
  return value;
}

export function parseInbound(line: string): Inbound {
  let msg: unknown;
  try {
    msg = JSON.parse(line);
  } catch {
    throw new Error("gateway message is not valid JSON");
  }
  if (typeof msg !== "object" || msg === null) {
    throw new Error("gateway message must be an object");
  }
  const obj = msg as Record<string, unknown>;
  if (obj.type === "telemetry") {
    const sonar = obj.sonar;
    if (!Array.isArray(sonar) || sonar.length !== 3) {
      throw new Error("bad sonar in gateway message");
    }
    return {
      kind: "telemetry",
      telemetry: {
        x: num(obj.x, "x"),
        y: num(obj.y, "y"),
        theta: num(obj.theta, "theta"),
        sonar: [num(sonar[0], "sonar"), num(sonar[1], "sonar"),
                num(sonar[2], "sonar")],
        delay_ms: num(obj.delay_ms, "delay_ms"),
        jitter_ms: num(obj.jitter_ms, "jitter_ms"),
        seq: num(obj.seq, "seq"),
      },
    };
  }
  if (obj.type === "stats") {
    return {
      kind: "stats",
      stats: {
        delay_ms: num(obj.delay_ms, "delay_ms"),
        jitter_ms: num(obj.jitter_ms, "jitter_ms"),
        loss_rate: num(obj.loss_rate, "loss_rate"),
        estopped: Boolean(obj.estopped),
        malformed: num(obj.malformed, "malformed"),
      },
    };
  }
  if (obj.type === "error") {
    return { kind: "error", error: String(obj.error ?? "unknown error") };
  }
  throw new Error(`unknown gateway message type ${JSON.stringify(obj.type)}`);
}

export function encodeOutbound(msg: Outbound): string {
  // velocities are clamped to the wire format's signed 16-bit range
  if (msg.type === "cmd") {
    const clamp = (v: number) =>
      Math.min(Math.max(Math.round(v), -32768), 32767);
    return JSON.stringify({ type: "cmd", v: clamp(msg.v), w: clamp(msg.w) });
  }
  return JSON.stringify({ type: msg.type });
}

// Accepts the page address or an explicit ws/http URL and returns the
// websocket endpoint; rejects anything that cannot name a gateway.
export function gatewayUrl(raw: string): string {
  let url: URL;
  try {
    url = new URL(raw);
  } catch {
    throw new Error(`not a valid gateway URL: ${raw}`);
  }
  const scheme = url.protocol;
  if (scheme === "ws:" || scheme === "wss:") {
    // keep an explicit path, default to /ws
    if (url.pathname === "/" || url.pathname === "") url.pathname = "/ws";
    return url.toString();
  }
  if (scheme === "http:" || scheme === "https:") {
    url.protocol = scheme === "https:" ? "wss:" : "ws:";
    url.pathname = "/ws";
    url.search = "";
    url.hash = "";
    return url.toString();
  }
  throw new Error(`not a valid gateway URL: ${raw}`);
}

export function mapUrl(wsUrl: string): string {
  const url = new URL(wsUrl);
  url.protocol = url.protocol === "wss:" ? "https:" : "http:";
  url.pathname = "/map";
  return url.toString();
}

export function parseMap(data: unknown): MapData {
  if (typeof data !== "object" || data === null) {
    throw new Error("bad map payload");
  }
  const obj = data as Record<string, unknown>;
  const walls: Array<[number, number, number, number]> = [];
  if (!Array.isArray(obj.walls)) throw new Error("bad map payload");
  for (const wall of obj.walls) {
    if (!Array.isArray(wall) || wall.length !== 4) {
      throw new Error("bad wall in map payload");
    }
    walls.push([num(wall[0], "wall"), num(wall[1], "wall"),
                num(wall[2], "wall"), num(wall[3], "wall")]);
  }
  const start = Array.isArray(obj.start) && obj.start.length === 3
    ? [num(obj.start[0], "start"), num(obj.start[1], "start"),
       num(obj.start[2], "start")] as [number, number, number]
    : null;
  const goal = Array.isArray(obj.goal) && obj.goal.length === 2
    ? [num(obj.goal[0], "goal"), num(obj.goal[1], "goal")] as
      [number, number]
    : null;
  return { walls, start, goal };
}
