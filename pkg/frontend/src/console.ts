// Connection and command state for the operator console, free of any
// DOM or socket dependency so the behavior is testable headless.
//
// Invariants enforced here:
//   - nothing is ever emitted unless the connection is live
//   - the displayed pose is the last telemetry verbatim, never
//     extrapolated
//   - the pose trail and the chart series are bounded

import { Inbound, Outbound, Stats, Telemetry, encodeOutbound,
         parseInbound } from "./protocol.js";

export type Connection = "disconnected" | "connecting" | "live";

export const COMMAND_INTERVAL_MS = 100;   // 10 Hz stream while held
export const TRAIL_CAP = 2000;            // pose history points
export const SERIES_CAP = 1200;           // chart points (60 s at 20 Hz)
export const RECONNECT_BACKOFF_S = [1, 2, 4];
export const JITTER_REFERENCE_MS = 15;    // video comfort threshold

export interface SeriesPoint {
  t: number;        // ms, console clock
  value: number;    // ms
}

interface Hold {
  v: number;
  w: number;
}

export class ConsoleCore {
  connection: Connection = "disconnected";
  latest: Telemetry | null = null;
  stats: Stats | null = null;
  lastError: string | null = null;
  trail: Array<[number, number]> = [];
  delaySeries: SeriesPoint[] = [];
  jitterSeries: SeriesPoint[] = [];
  sent: string[] = [];              // gateway message log, newest last

  private hold: Hold | null = null;
  private nextSendAt = 0;

  constructor(private transmit: (line: string) => void) {}

  // -- connection lifecycle, driven by the socket owner ------------

  socketConnecting(): void {
    this.connection = "connecting";
  }

  socketOpen(): void {
    this.connection = "live";
    this.lastError = null;
  }

  socketClosed(reason?: string): void {
    this.connection = "disconnected";
    this.hold = null;              // a stale hold must not resume
    if (reason) this.lastError = reason;
  }

  reconnectDelayS(attempt: number): number {
    const idx = Math.min(attempt, RECONNECT_BACKOFF_S.length - 1);
    return RECONNECT_BACKOFF_S[Math.max(idx, 0)];
  }

  // -- operator input ----------------------------------------------

  private emit(msg: Outbound): void {
    if (this.connection !== "live") return;
    const line = encodeOutbound(msg);
    this.sent.push(line);
    this.transmit(line);
  }

  /** Starts or updates a held velocity; streams at 10 Hz via tick(). */
  setDrive(v: number, w: number, nowMs: number): void {
    if (this.connection !== "live") return;
    if (this.hold && this.hold.v === v && this.hold.w === w) return;
    this.hold = { v, w };
    this.emit({ type: "cmd", v, w });
    this.nextSendAt = nowMs + COMMAND_INTERVAL_MS;
  }

  /** Releases the held input: one stop, then silence. */
  release(): void {
    if (!this.hold) return;
    this.hold = null;
    this.emit({ type: "stop" });
  }

  /** Emergency stop wins over any held keys. */
  estop(): void {
    this.hold = null;
    this.emit({ type: "estop" });
  }

  /** Drives the 10 Hz repeat; call at any faster cadence. */
  tick(nowMs: number): void {
    if (this.connection !== "live" || !this.hold) return;
    if (nowMs < this.nextSendAt) return;
    this.emit({ type: "cmd", v: this.hold.v, w: this.hold.w });
    // keep the schedule when on time, resync after a stall so a
    // sleeping tab does not wake up to a burst
    this.nextSendAt = nowMs - this.nextSendAt > COMMAND_INTERVAL_MS
      ? nowMs + COMMAND_INTERVAL_MS
      : this.nextSendAt + COMMAND_INTERVAL_MS;
  }

  get holding(): boolean {
    return this.hold !== null;
  }

  // -- inbound -----------------------------------------------------

  handleMessage(line: string, nowMs: number): Inbound | null {
    let msg: Inbound;
    try {
      msg = parseInbound(line);
    } catch (err) {
      this.lastError = (err as Error).message;
      return null;
    }
    if (msg.kind === "telemetry") {
      this.latest = msg.telemetry;     // displayed pose, verbatim
      this.trail.push([msg.telemetry.x, msg.telemetry.y]);
      if (this.trail.length > TRAIL_CAP) {
        this.trail.splice(0, this.trail.length - TRAIL_CAP);
      }
      this.pushPoint(this.delaySeries, nowMs, msg.telemetry.delay_ms);
      this.pushPoint(this.jitterSeries, nowMs, msg.telemetry.jitter_ms);
    } else if (msg.kind === "stats") {
      this.stats = msg.stats;
    } else {
      this.lastError = msg.error;
    }
    return msg;
  }

  private pushPoint(series: SeriesPoint[], t: number, value: number): void {
    series.push({ t, value });
    if (series.length > SERIES_CAP) {
      series.splice(0, series.length - SERIES_CAP);
    }
  }
}
