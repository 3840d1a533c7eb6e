// Scrolling line-chart geometry, kept separate from canvas calls so
// the mapping from data to pixels is testable.

import { SeriesPoint } from "./console.js";

export interface ChartLayout {
  width: number;
  height: number;
  padLeft: number;
  padRight: number;
  padTop: number;
  padBottom: number;
  windowMs: number;     // visible span of the time axis
}

export const DEFAULT_LAYOUT: ChartLayout = {
  width: 420,
  height: 140,
  padLeft: 40,
  padRight: 8,
  padTop: 8,
  padBottom: 18,
  windowMs: 30_000,
};

export function plotArea(layout: ChartLayout) {
  return {
    x0: layout.padLeft,
    y0: layout.padTop,
    x1: layout.width - layout.padRight,
    y1: layout.height - layout.padBottom,
  };
}

/** Y-axis ceiling: snug around the data but never hiding refValue. */
export function yAxisMax(points: SeriesPoint[], refValue: number | null):
    number {
  let top = refValue !== null ? refValue * 4 / 3 : 1;
  for (const p of points) top = Math.max(top, p.value * 1.1);
  // round up to a tidy step so gridlines land on round numbers
  const step = Math.pow(10, Math.floor(Math.log10(top)));
  return Math.ceil(top / step) * step;
}

export function xPixel(t: number, nowMs: number, layout: ChartLayout):
    number {
  const area = plotArea(layout);
  const frac = 1 - (nowMs - t) / layout.windowMs;
  return area.x0 + frac * (area.x1 - area.x0);
}

export function yPixel(value: number, yMax: number, layout: ChartLayout):
    number {
  const area = plotArea(layout);
  const frac = Math.min(Math.max(value / yMax, 0), 1);
  return area.y1 - frac * (area.y1 - area.y0);
}

export interface ChartGeometry {
  yMax: number;
  polyline: Array<[number, number]>;
  referenceY: number | null;    // inside the plot area when not null
}

/** Maps the visible slice of a series onto pixel coordinates. */
export function chartGeometry(points: SeriesPoint[], nowMs: number,
                              refValue: number | null,
                              layout: ChartLayout = DEFAULT_LAYOUT):
    ChartGeometry {
  const visible = points.filter((p) => nowMs - p.t <= layout.windowMs);
  const yMax = yAxisMax(visible, refValue);
  const polyline = visible.map((p): [number, number] =>
    [xPixel(p.t, nowMs, layout), yPixel(p.value, yMax, layout)]);
  const referenceY = refValue !== null
    ? yPixel(refValue, yMax, layout)
    : null;
  return { yMax, polyline, referenceY };
}
