"""Measurement pipeline: per-flow sample records, CSV export, summary
statistics, and deterministic vector chart rendering.

The CSV schema is shared by the protocol race and the replication
harness: `t,flow,throughput_bps,delay_ms,jitter_ms,drops`.  Floats are
written with repr precision so a parse round-trips exactly.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

CSV_FIELDS = ("t", "flow", "throughput_bps", "delay_ms", "jitter_ms", "drops")

JITTER_REFERENCE_MS = 15.0  # streaming-video tolerance drawn on jitter charts


@dataclass(frozen=True)
class FlowSample:
    t: float
    flow: str
    throughput_bps: float = 0.0
    delay_ms: float = 0.0
    jitter_ms: float = 0.0
    drops: int = 0

    def __post_init__(self) -> None:
        if not self.flow:
            raise ValueError("flow id must be non-empty")
        for name in ("t", "throughput_bps", "delay_ms", "jitter_ms"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.jitter_ms < 0.0:
            raise ValueError("jitter_ms must be nonnegative")
        if self.drops < 0:
            raise ValueError("drops must be nonnegative")


def _row(sample: FlowSample) -> list[str]:
    return [str(getattr(sample, name)) for name in CSV_FIELDS]


class SampleSink:
    """Single-writer sample collector, optionally flushing rows to CSV
    as they arrive so a crash loses at most the current row."""

    def __init__(self, path=None):
        self.samples: list[FlowSample] = []
        self._last_t: dict[str, float] = {}
        self._file = None
        self._writer = None
        if path is not None:
            self._file = open(path, "w", newline="", encoding="utf-8")
            self._writer = csv.writer(self._file)
            self._writer.writerow(CSV_FIELDS)
            self._file.flush()

    def record(self, sample: FlowSample) -> None:
        last = self._last_t.get(sample.flow)
        if last is not None and sample.t < last:
            raise ValueError(f"t must be non-decreasing per flow "
                             f"({sample.flow}: {sample.t} after {last})")
        self._last_t[sample.flow] = sample.t
        self.samples.append(sample)
        if self._writer is not None:
            self._writer.writerow(_row(sample))
            self._file.flush()

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None
            self._writer = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_csv(samples, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for sample in samples:
            writer.writerow(_row(sample))


def read_csv(path) -> list[FlowSample]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(CSV_FIELDS):
            raise ValueError(f"unexpected CSV header {header}")
        out = []
        for row in reader:
            if len(row) != len(CSV_FIELDS):
                raise ValueError(f"row has {len(row)} fields: {row}")
            t, flow, tput, delay, jitter, drops = row
            out.append(FlowSample(t=float(t), flow=flow,
                                  throughput_bps=float(tput),
                                  delay_ms=float(delay),
                                  jitter_ms=float(jitter),
                                  drops=int(drops)))
        return out


def flows(samples) -> list[str]:
    """Flow ids present, in first-appearance order."""
    seen: dict[str, None] = {}
    for sample in samples:
        seen.setdefault(sample.flow, None)
    return list(seen)


def percentile_nearest_rank(values, fraction: float) -> float:
    ordered = sorted(values)
    if not ordered:
        raise ValueError("no values")
    rank = max(1, math.ceil(fraction * len(ordered)))
    return ordered[rank - 1]


def summarize(samples, flow: str) -> dict:
    """Summary statistics over one flow's samples.

    loss_rate treats each sample row as one delivered unit, which is
    exact for per-packet series; windowed series carry their own
    throughput numbers and should be judged on those.
    """
    rows = [s for s in samples if s.flow == flow]
    if not rows:
        raise ValueError(f"no samples for flow {flow!r}")
    n = len(rows)
    total_drops = sum(s.drops for s in rows)
    return {
        "mean_delay_ms": sum(s.delay_ms for s in rows) / n,
        "mean_jitter_ms": sum(s.jitter_ms for s in rows) / n,
        "p95_delay_ms": percentile_nearest_rank([s.delay_ms for s in rows], 0.95),
        "loss_rate": total_drops / (n + total_drops),
    }


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_WIDTH, _HEIGHT = 800, 420
_ML, _MR, _MT, _MB = 80, 30, 40, 50


def _scale(lo: float, hi: float, include=()):
    for value in include:
        lo = min(lo, value)
        hi = max(hi, value)
    if hi - lo < 1e-12:
        pad = max(abs(hi) * 0.1, 1.0)
    else:
        pad = (hi - lo) * 0.05
    new_lo = lo - pad
    if lo >= 0.0 and new_lo < 0.0:
        new_lo = 0.0  # nonnegative metrics keep a zero floor
    return new_lo, hi + pad


def _render_chart(series: dict, title: str, ylabel: str, out_path,
                  reference: float | None = None) -> None:
    ts = [t for rows in series.values() for t, _ in rows]
    vs = [v for rows in series.values() for _, v in rows]
    tmin, tmax = min(ts), max(ts)
    if tmax - tmin < 1e-12:
        tmax = tmin + 1.0
    include = (reference,) if reference is not None else ()
    vmin, vmax = _scale(min(vs), max(vs), include)

    plot_w = _WIDTH - _ML - _MR
    plot_h = _HEIGHT - _MT - _MB

    def px(t):
        return _ML + (t - tmin) / (tmax - tmin) * plot_w

    def py(v):
        return _HEIGHT - _MB - (v - vmin) / (vmax - vmin) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.2f}" y="24" text-anchor="middle" '
        f'font-size="15">{title}</text>',
    ]
    # axes
    parts.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" '
                 f'y2="{_HEIGHT - _MB}" stroke="black"/>')
    parts.append(f'<line x1="{_ML}" y1="{_HEIGHT - _MB}" x2="{_WIDTH - _MR}" '
                 f'y2="{_HEIGHT - _MB}" stroke="black"/>')
    for i in range(5):
        tv = tmin + (tmax - tmin) * i / 4
        x = px(tv)
        parts.append(f'<line x1="{x:.2f}" y1="{_HEIGHT - _MB}" x2="{x:.2f}" '
                     f'y2="{_HEIGHT - _MB + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.2f}" y="{_HEIGHT - _MB + 20}" '
                     f'text-anchor="middle">{tv:.4g}</text>')
        vv = vmin + (vmax - vmin) * i / 4
        y = py(vv)
        parts.append(f'<line x1="{_ML - 5}" y1="{y:.2f}" x2="{_ML}" '
                     f'y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{_ML - 8}" y="{y + 4:.2f}" '
                     f'text-anchor="end">{vv:.4g}</text>')
    parts.append(f'<text x="{_WIDTH / 2:.2f}" y="{_HEIGHT - 12}" '
                 f'text-anchor="middle">time (s)</text>')
    parts.append(f'<text x="18" y="{_HEIGHT / 2:.2f}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {_HEIGHT / 2:.2f})">{ylabel}</text>')

    if reference is not None:
        y = py(reference)
        parts.append(f'<line x1="{_ML}" y1="{y:.2f}" x2="{_WIDTH - _MR}" '
                     f'y2="{y:.2f}" stroke="#888888" stroke-dasharray="6,4"/>')
        parts.append(f'<text x="{_WIDTH - _MR - 4}" y="{y - 6:.2f}" '
                     f'text-anchor="end" fill="#888888">{reference:.4g} ms'
                     f'</text>')

    for idx, flow in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        points = " ".join(f"{px(t):.2f},{py(v):.2f}" for t, v in series[flow])
        parts.append(f'<polyline fill="none" stroke="{color}" '
                     f'stroke-width="1.5" points="{points}"/>')
        parts.append(f'<text x="{_WIDTH - _MR - 4}" y="{_MT + 16 * idx + 12}" '
                     f'text-anchor="end" fill="{color}">{flow}</text>')

    parts.append("</svg>")
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def render(samples, out_dir) -> list[str]:
    """Writes delay, jitter, and throughput charts; returns the paths.

    The jitter chart carries a dashed reference line at 15 ms, the
    usual tolerance quoted for interactive video streams.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise ValueError("need at least 2 samples to render")
    os.makedirs(out_dir, exist_ok=True)
    charts = (
        ("delay.svg", "Packet delay", "delay (ms)",
         lambda s: s.delay_ms, None),
        ("jitter.svg", "Delay jitter", "jitter (ms)",
         lambda s: s.jitter_ms, JITTER_REFERENCE_MS),
        ("throughput.svg", "Throughput", "throughput (bit/s)",
         lambda s: s.throughput_bps, None),
    )
    paths = []
    for name, title, ylabel, get, reference in charts:
        series = {flow: [(s.t, get(s)) for s in samples if s.flow == flow]
                  for flow in flows(samples)}
        path = os.path.join(out_dir, name)
        _render_chart(series, title, ylabel, path, reference)
        paths.append(path)
    return paths
