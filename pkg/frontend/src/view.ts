// Canvas drawing for the floor map, sonar bars and the two scrolling
// charts.  All geometry beyond simple scaling lives in charts.ts.

import { ChartLayout, DEFAULT_LAYOUT, chartGeometry, plotArea }
  from "./charts.js";
import { ConsoleCore, SeriesPoint } from "./console.js";
import { MapData, Telemetry } from "./protocol.js";

const SONAR_MAX_MM = 4000;

interface MapTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

function fitMap(map: MapData | null, latest: Telemetry | null,
                width: number, height: number): MapTransform {
  let minX = -500, minY = -500, maxX = 500, maxY = 500;
  const stretch = (x: number, y: number) => {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  };
  if (map) {
    for (const [x1, y1, x2, y2] of map.walls) {
      stretch(x1, y1); stretch(x2, y2);
    }
    if (map.start) stretch(map.start[0], map.start[1]);
    if (map.goal) stretch(map.goal[0], map.goal[1]);
  }
  if (latest) stretch(latest.x, latest.y);
  const margin = 250;
  minX -= margin; minY -= margin; maxX += margin; maxY += margin;
  const scale = Math.min(width / (maxX - minX), height / (maxY - minY));
  return { scale, offsetX: minX, offsetY: minY };
}

export function drawMap(canvas: HTMLCanvasElement, core: ConsoleCore,
                        map: MapData | null): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);

  const tf = fitMap(map, core.latest, width, height);
  // map y grows upward, canvas y grows downward
  const px = (x: number) => (x - tf.offsetX) * tf.scale;
  const py = (y: number) => height - (y - tf.offsetY) * tf.scale;

  if (map) {
    ctx.strokeStyle = "#8a93a6";
    ctx.lineWidth = 2;
    for (const [x1, y1, x2, y2] of map.walls) {
      ctx.beginPath();
      ctx.moveTo(px(x1), py(y1));
      ctx.lineTo(px(x2), py(y2));
      ctx.stroke();
    }
    if (map.start) {
      drawMarker(ctx, px(map.start[0]), py(map.start[1]), "#4d96ff",
                 "start");
    }
    if (map.goal) {
      drawMarker(ctx, px(map.goal[0]), py(map.goal[1]), "#6bcb77", "goal");
    }
  }

  if (core.trail.length > 1) {
    ctx.strokeStyle = "#ffd93d";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(px(core.trail[0][0]), py(core.trail[0][1]));
    for (const [x, y] of core.trail) ctx.lineTo(px(x), py(y));
    ctx.stroke();
  }

  const t = core.latest;
  if (t) {
    // robot: a triangle pointing along the heading
    const theta = t.theta / 1000;
    const cx = px(t.x);
    const cy = py(t.y);
    const r = 9;
    ctx.fillStyle = "#ff6b6b";
    ctx.beginPath();
    ctx.moveTo(cx + r * Math.cos(theta) * 1.6,
               cy - r * Math.sin(theta) * 1.6);
    ctx.lineTo(cx + r * Math.cos(theta + 2.5),
               cy - r * Math.sin(theta + 2.5));
    ctx.lineTo(cx + r * Math.cos(theta - 2.5),
               cy - r * Math.sin(theta - 2.5));
    ctx.closePath();
    ctx.fill();
  }
}

function drawMarker(ctx: CanvasRenderingContext2D, x: number, y: number,
                    color: string, label: string): void {
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, 6, 0, 2 * Math.PI);
  ctx.fill();
  ctx.font = "12px sans-serif";
  ctx.fillText(label, x + 9, y + 4);
}

export function drawSonar(canvas: HTMLCanvasElement,
                          latest: Telemetry | null): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);
  const labels = ["front", "left", "right"];
  const values = latest ? latest.sonar : [0, 0, 0];
  const barWidth = width / 3 - 18;
  values.forEach((v, i) => {
    const x = 12 + i * (barWidth + 18);
    const frac = Math.min(v / SONAR_MAX_MM, 1);
    const barHeight = frac * (height - 34);
    ctx.fillStyle = frac < 0.15 ? "#ff6b6b" : "#4d96ff";
    ctx.fillRect(x, height - 20 - barHeight, barWidth, barHeight);
    ctx.fillStyle = "#c8cfdb";
    ctx.font = "11px sans-serif";
    ctx.fillText(`${labels[i]} ${v}`, x, height - 6);
  });
}

export function drawChart(canvas: HTMLCanvasElement, points: SeriesPoint[],
                          nowMs: number, title: string,
                          refValue: number | null,
                          layout: ChartLayout = DEFAULT_LAYOUT): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, layout.width, layout.height);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, layout.width, layout.height);

  const area = plotArea(layout);
  const geom = chartGeometry(points, nowMs, refValue, layout);

  ctx.strokeStyle = "#39415199";
  ctx.strokeRect(area.x0, area.y0, area.x1 - area.x0, area.y1 - area.y0);
  ctx.fillStyle = "#c8cfdb";
  ctx.font = "11px sans-serif";
  ctx.fillText(title, area.x0 + 4, area.y0 + 12);
  ctx.fillText(geom.yMax.toFixed(0), 6, area.y0 + 10);
  ctx.fillText("0", 6, area.y1);

  if (geom.referenceY !== null && refValue !== null) {
    ctx.strokeStyle = "#ff6b6b";
    ctx.setLineDash([5, 4]);
    ctx.beginPath();
    ctx.moveTo(area.x0, geom.referenceY);
    ctx.lineTo(area.x1, geom.referenceY);
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = "#ff6b6b";
    ctx.fillText(`${refValue} ms`, area.x1 - 38, geom.referenceY - 4);
  }

  if (geom.polyline.length > 1) {
    ctx.strokeStyle = "#4d96ff";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(geom.polyline[0][0], geom.polyline[0][1]);
    for (const [x, y] of geom.polyline) ctx.lineTo(x, y);
    ctx.stroke();
  }
}
