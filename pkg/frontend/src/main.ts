// Browser wiring: sockets, keyboard, buttons and the render loop.

import { ConsoleCore, JITTER_REFERENCE_MS } from "./console.js";
import { MapData, gatewayUrl, mapUrl, parseMap } from "./protocol.js";
import { drawChart, drawMap, drawSonar } from "./view.js";

const FORWARD_MM_S = 100;   // held-key cruise
const TURN_MRAD_S = 500;

let socket: WebSocket | null = null;
let core: ConsoleCore;
let map: MapData | null = null;
let wsUrl = "";
let reconnectAttempt = 0;
let reconnectTimer: number | null = null;
let wantConnection = false;

const held = { fwd: false, back: false, left: false, right: false };

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

function connect(): void {
  if (!wantConnection) return;
  core.socketConnecting();
  socket = new WebSocket(wsUrl);
  socket.addEventListener("open", () => {
    reconnectAttempt = 0;
    core.socketOpen();
  });
  socket.addEventListener("message", (event) => {
    core.handleMessage(String(event.data), performance.now());
  });
  socket.addEventListener("close", () => {
    socket = null;
    core.socketClosed(wantConnection ? "connection lost" : undefined);
    scheduleReconnect();
  });
  socket.addEventListener("error", () => {
    // close follows; the banner picks the state up there
  });
}

function scheduleReconnect(): void {
  if (!wantConnection || reconnectTimer !== null) return;
  const delayS = core.reconnectDelayS(reconnectAttempt);
  reconnectAttempt += 1;
  reconnectTimer = window.setTimeout(() => {
    reconnectTimer = null;
    connect();
  }, delayS * 1000);
}

async function fetchMap(): Promise<void> {
  try {
    const response = await fetch(mapUrl(wsUrl));
    map = parseMap(await response.json());
  } catch {
    map = null;   // map is decoration; driving works without it
  }
}

function applyHeld(): void {
  const v = (held.fwd ? FORWARD_MM_S : 0) - (held.back ? FORWARD_MM_S : 0);
  const w = (held.left ? TURN_MRAD_S : 0) - (held.right ? TURN_MRAD_S : 0);
  if (v === 0 && w === 0) {
    core.release();
  } else {
    core.setDrive(v, w, performance.now());
  }
}

const KEYMAP: Record<string, keyof typeof held> = {
  ArrowUp: "fwd", KeyW: "fwd",
  ArrowDown: "back", KeyS: "back",
  ArrowLeft: "left", KeyA: "left",
  ArrowRight: "right", KeyD: "right",
};

function bindInputs(): void {
  document.addEventListener("keydown", (event) => {
    if (event.code === "Space") {
      core.estop();
      event.preventDefault();
      return;
    }
    const slot = KEYMAP[event.code];
    if (slot && !event.repeat) {
      held[slot] = true;
      applyHeld();
      event.preventDefault();
    }
  });
  document.addEventListener("keyup", (event) => {
    const slot = KEYMAP[event.code];
    if (slot) {
      held[slot] = false;
      applyHeld();
      event.preventDefault();
    }
  });

  // virtual joystick buttons: press-and-hold semantics
  for (const [id, slot] of [["btn-fwd", "fwd"], ["btn-back", "back"],
                            ["btn-left", "left"],
                            ["btn-right", "right"]] as const) {
    const el = $(id);
    el.addEventListener("pointerdown", (event) => {
      el.setPointerCapture(event.pointerId);
      held[slot] = true;
      applyHeld();
    });
    const stop = () => {
      if (held[slot]) {
        held[slot] = false;
        applyHeld();
      }
    };
    el.addEventListener("pointerup", stop);
    el.addEventListener("pointercancel", stop);
  }

  $("btn-estop").addEventListener("click", () => core.estop());
  $("btn-connect").addEventListener("click", () => {
    const input = $("gateway-url") as HTMLInputElement;
    try {
      wsUrl = gatewayUrl(input.value);
    } catch (err) {
      core.lastError = (err as Error).message;
      return;
    }
    wantConnection = true;
    reconnectAttempt = 0;
    if (reconnectTimer !== null) {
      clearTimeout(reconnectTimer);
      reconnectTimer = null;
    }
    if (socket) socket.close();
    void fetchMap();
    connect();
  });
  $("btn-disconnect").addEventListener("click", () => {
    wantConnection = false;
    if (reconnectTimer !== null) {
      clearTimeout(reconnectTimer);
      reconnectTimer = null;
    }
    if (socket) socket.close();
  });
}

function renderStatus(): void {
  const banner = $("status");
  banner.textContent = core.connection +
    (core.lastError ? ` — ${core.lastError}` : "");
  banner.className = `status ${core.connection}`;

  const stats = core.stats;
  const t = core.latest;
  $("readout").textContent = [
    t ? `x ${t.x} mm  y ${t.y} mm  heading ${t.theta} mrad` : "no telemetry",
    stats
      ? `delay ${stats.delay_ms.toFixed(1)} ms  ` +
        `jitter ${stats.jitter_ms.toFixed(2)} ms  ` +
        `loss ${(stats.loss_rate * 100).toFixed(2)}%` +
        (stats.estopped ? "  [ESTOPPED]" : "")
      : "",
  ].join("\n");
}

function frame(): void {
  const now = performance.now();
  core.tick(now);
  drawMap($("map-canvas") as HTMLCanvasElement, core, map);
  drawSonar($("sonar-canvas") as HTMLCanvasElement, core.latest);
  drawChart($("delay-canvas") as HTMLCanvasElement, core.delaySeries, now,
            "one-way delay, ms", null);
  drawChart($("jitter-canvas") as HTMLCanvasElement, core.jitterSeries,
            now, "interarrival jitter, ms", JITTER_REFERENCE_MS);
  renderStatus();
  requestAnimationFrame(frame);
}

function main(): void {
  core = new ConsoleCore((line) => {
    if (socket && socket.readyState === WebSocket.OPEN) socket.send(line);
  });
  const input = $("gateway-url") as HTMLInputElement;
  input.value = `ws://${location.hostname}:${location.port || "8080"}/ws`;
  bindInputs();
  requestAnimationFrame(frame);
}

window.addEventListener("load", main);
