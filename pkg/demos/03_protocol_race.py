"""
Three transports share one slow link
====================================

Runs both shipped link scenarios and renders SVG charts.  Scenario A
leaves headroom so everyone gets a fair share; scenario B oversubscribes
the link and shows the congestion-controlled flow starving while the
constant-rate flows shrug.
"""

from pathlib import Path

from rtpteleop.metrics import render, summarize, write_csv
from rtpteleop.race import (run_scenario, scenario_a, scenario_b,
                            window_means)

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

for label, scenario in (("a", scenario_a(seed=1)), ("b", scenario_b(seed=1))):
    result = run_scenario(scenario)
    print(f"scenario {label.upper()}: {scenario.duration:.0f} s over a "
          f"{scenario.link_rate / 1e6:.1f} Mbit/s link")
    for flow in ("rtp", "udp", "tcp"):
        means = window_means(result.samples, flow, after=10.0)
        stats = summarize(result.samples, flow)
        print(f"  {flow:4s} {means['throughput_bps'] / 1e6:6.3f} Mbit/s"
              f"  delay {stats['mean_delay_ms']:7.2f} ms"
              f"  jitter {stats['mean_jitter_ms']:6.2f} ms"
              f"  drops {means['drops']}")
    block = result.rtp_report
    print(f"  rtp receiver report: lost {block.cumulative_lost},"
          f" jitter {block.interarrival_jitter} ticks;"
          f" tcp timeouts: {result.tcp_timeouts}")

    csv_path = out / f"race_{label}.csv"
    write_csv(result.samples, csv_path)
    charts = render(result.samples, out / f"race_{label}")
    print(f"  wrote {csv_path.name} and {len(charts)} charts")
    print()

print("open demos/out/race_*/throughput.svg to see the two regimes")
