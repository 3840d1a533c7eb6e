import random
from dataclasses import replace

import pytest

from rtpteleop.race import (
    FlowSpec,
    Scenario,
    TcpState,
    load_scenario,
    parse_scenario,
    run_scenario,
    scenario_a,
    scenario_b,
    tcp_on_ack,
    tcp_on_timeout,
    window_means,
)

LINK_RATE = 1.5e6
PKT_BITS = 1000 * 8


def jitter_by_window(samples, after):
    rows = {}
    for s in samples:
        if s.t > after:
            rows.setdefault(round(s.t, 6), {})[s.flow] = s.jitter_ms
    return [d for d in rows.values() if len(d) == 3]


# --- pure Reno state machine ---------------------------------------


def test_slow_start_ack_grows_cwnd():
    t = TcpState()
    t = tcp_on_ack(t, 1)
    assert t.cwnd == 2.0
    assert t.state == "slow_start"


def test_slow_start_doubles_per_round():
    t = TcpState(cwnd=4.0, next_seq=4)
    for ack in range(1, 5):
        t = tcp_on_ack(t, ack)
    assert t.cwnd == 8.0


def test_congestion_avoidance_adds_one_per_window():
    t = TcpState(cwnd=8.0, ssthresh=8.0, state="congestion_avoidance",
                 next_seq=8)
    expected = 8.0
    for _ in range(8):
        expected += 1.0 / expected
    for ack in range(1, 9):
        t = tcp_on_ack(t, ack)
    assert t.cwnd == expected
    assert 8.9 < t.cwnd < 9.1


def test_third_dup_ack_enters_fast_recovery():
    t = TcpState(cwnd=16.0, ssthresh=8.0, state="congestion_avoidance",
                 next_seq=30, highest_acked=10)
    for _ in range(2):
        t = tcp_on_ack(t, 10)
        assert t.state == "congestion_avoidance"
    t = tcp_on_ack(t, 10)
    assert t.ssthresh == 8.0
    assert t.cwnd == 11.0
    assert t.state == "fast_recovery"


def test_fast_recovery_inflates_then_deflates():
    t = TcpState(cwnd=11.0, ssthresh=8.0, state="fast_recovery",
                 dup_acks=3, next_seq=30, highest_acked=10)
    t = tcp_on_ack(t, 10)
    assert t.cwnd == 12.0
    t = tcp_on_ack(t, 30)
    assert t.cwnd == 8.0
    assert t.state == "congestion_avoidance"
    assert t.dup_acks == 0


def test_timeout_collapses_window_and_rewinds():
    t = TcpState(cwnd=10.0, ssthresh=8.0, rto=1.0,
                 next_seq=30, highest_acked=10)
    t = tcp_on_timeout(t)
    assert t.ssthresh == 5.0
    assert t.cwnd == 1.0
    assert t.state == "slow_start"
    assert t.next_seq == 10


def test_timeout_ssthresh_floor():
    t = tcp_on_timeout(TcpState(cwnd=1.0))
    assert t.ssthresh == 2.0


def test_consecutive_timeouts_double_rto():
    t = TcpState(rto=1.0)
    seen = []
    for _ in range(8):
        t = tcp_on_timeout(t)
        seen.append(t.rto)
    assert seen[:3] == [2.0, 4.0, 8.0]
    assert seen[-1] == 60.0  # backoff cap


def test_stale_ack_is_ignored():
    t = TcpState(cwnd=5.0, ssthresh=4.0, state="congestion_avoidance",
                 next_seq=20, highest_acked=10)
    assert tcp_on_ack(t, 3) == t


def test_transitions_never_mutate_input():
    t = TcpState(cwnd=16.0, ssthresh=8.0, state="congestion_avoidance",
                 next_seq=30, highest_acked=10)
    for _ in range(3):
        tcp_on_ack(t, 10)
    tcp_on_timeout(t)
    assert t == TcpState(cwnd=16.0, ssthresh=8.0,
                         state="congestion_avoidance",
                         next_seq=30, highest_acked=10)


def test_state_invariants_over_random_walk():
    rng = random.Random(7)
    t = TcpState()
    for _ in range(5000):
        outstanding = t.next_seq - t.highest_acked
        roll = rng.random()
        if roll < 0.4 or outstanding == 0:
            t = replace(t, next_seq=t.next_seq + rng.randint(1, 4))
        elif roll < 0.8:
            t = tcp_on_ack(t, t.highest_acked + rng.randint(1, outstanding))
        elif roll < 0.95:
            t = tcp_on_ack(t, t.highest_acked)
        else:
            t = tcp_on_timeout(t)
        assert t.cwnd >= 1.0
        assert t.ssthresh >= 2.0
        assert (t.state == "slow_start") == (t.cwnd < t.ssthresh)
        assert t.highest_acked <= t.next_seq


# --- simulator basics ----------------------------------------------


def test_single_udp_uncontended():
    sc = Scenario(flows=[FlowSpec(kind="udp_cbr", rate=0.5e6)],
                  duration=10.0, sample_window=0.5)
    res = run_scenario(sc)
    expected_delay = (0.01 + PKT_BITS / LINK_RATE) * 1e3
    for s in res.samples:
        assert s.delay_ms == pytest.approx(expected_delay)
        assert s.jitter_ms < 1e-9  # only float accumulation noise
        assert s.drops == 0
    mean = window_means(res.samples, "udp", after=1.0)
    assert mean["throughput_bps"] == pytest.approx(0.5e6, rel=0.02)
    assert res.totals["udp"]["drops"] == 0


def test_single_rtp_flow_throttled_to_95_percent():
    sc = Scenario(flows=[FlowSpec(kind="rtp_cbr", rate=0.5e6)],
                  duration=20.0, sample_window=0.5)
    res = run_scenario(sc)
    mean = window_means(res.samples, "rtp", after=1.0)
    assert mean["throughput_bps"] == pytest.approx(0.95 * 0.5e6, rel=0.02)
    assert res.rtp_report is not None
    assert res.rtp_report.cumulative_lost == 0
    assert res.rtp_data_drops == 0


def test_throughput_sum_bounded_by_link_rate():
    res = run_scenario(scenario_a())
    by_t = {}
    for s in res.samples:
        by_t.setdefault(s.t, 0.0)
        by_t[s.t] += s.throughput_bps
    # one in-service packet can spill across a window boundary
    slack = PKT_BITS / 0.5
    assert all(total <= LINK_RATE + slack for total in by_t.values())


def test_saturated_link_is_work_conserving():
    res = run_scenario(scenario_b())
    bits = sum(s.throughput_bps * 0.5 for s in res.samples if s.t > 5.0)
    span = 60.0 - 5.0
    assert bits == pytest.approx(LINK_RATE * span, rel=0.01)


def test_result_iterates_as_sample_list():
    res = run_scenario(Scenario(
        flows=[FlowSpec(kind="udp_cbr", rate=0.5e6)], duration=2.0))
    assert list(res) == res.samples
    assert len(res) == len(res.samples)


def test_determinism_identical_series():
    a = run_scenario(scenario_a(duration=15.0, seed=9))
    b = run_scenario(scenario_a(duration=15.0, seed=9))
    assert a.samples == b.samples
    assert a.totals == b.totals


def test_seed_changes_series():
    a = run_scenario(scenario_a(duration=15.0, seed=1))
    b = run_scenario(scenario_a(duration=15.0, seed=2))
    assert a.samples != b.samples


# --- shipped presets against the published behavior ----------------


def test_scenario_a_fair_share():
    res = run_scenario(scenario_a())
    for flow in ("rtp", "udp", "tcp"):
        mean = window_means(res.samples, flow, after=10.0)
        assert abs(mean["throughput_bps"] - 0.5e6) <= 0.1 * 0.5e6


def test_scenario_a_tcp_jitter_dominates():
    res = run_scenario(scenario_a())
    rows = jitter_by_window(res.samples, after=10.0)
    wins = sum(1 for d in rows
               if d["tcp"] > d["rtp"] and d["tcp"] > d["udp"])
    assert wins >= 0.9 * len(rows)


def test_scenario_b_starves_tcp():
    res = run_scenario(scenario_b())
    rows = [s for s in res.samples if s.flow == "tcp" and s.t > 10.0]
    starved = sum(1 for s in rows if s.throughput_bps < 0.05 * LINK_RATE)
    assert starved >= 0.9 * len(rows)


def test_scenario_b_splits_residual_between_cbr_flows():
    res = run_scenario(scenario_b())
    rtp = window_means(res.samples, "rtp", after=10.0)["throughput_bps"]
    udp = window_means(res.samples, "udp", after=10.0)["throughput_bps"]
    assert abs(rtp - udp) <= 0.1 * max(rtp, udp)
    assert rtp == pytest.approx(0.75e6, rel=0.1)
    assert udp == pytest.approx(0.75e6, rel=0.1)


def test_receiver_report_matches_simulator_drops():
    for res in (run_scenario(scenario_a()), run_scenario(scenario_b())):
        assert res.rtp_report is not None
        assert res.rtp_report.cumulative_lost == res.rtp_data_drops


# --- scenario configuration ----------------------------------------


def test_flow_spec_validation():
    with pytest.raises(ValueError):
        FlowSpec(kind="carrier_pigeon")
    with pytest.raises(ValueError):
        FlowSpec(kind="tcp", rate=1e6)
    with pytest.raises(ValueError):
        FlowSpec(kind="udp_cbr")
    with pytest.raises(ValueError):
        FlowSpec(kind="udp_cbr", rate=1e6, packet_size=20)


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario(flows=[])
    with pytest.raises(ValueError):
        Scenario(flows=[FlowSpec(kind="tcp", name="x"),
                        FlowSpec(kind="tcp", name="x")])
    with pytest.raises(ValueError):
        Scenario(flows=[FlowSpec(kind="tcp")], duration=0.0)


def test_default_flow_names():
    sc = scenario_a()
    assert [f.name for f in sc.flows] == ["rtp", "udp", "tcp"]


def test_parse_scenario_text():
    sc = parse_scenario("""
        # bottleneck setup
        link_rate = 1.5e6
        duration = 12
        sample_window = 0.5
        seed = 4
        flow rtp_cbr rate=0.5e6
        flow udp_cbr rate=0.5e6 packet_size=500
        flow tcp start=2.0 name=bulk
    """)
    assert sc.link_rate == 1.5e6
    assert sc.duration == 12.0
    assert sc.seed == 4
    assert [f.name for f in sc.flows] == ["rtp", "udp", "bulk"]
    assert sc.flows[1].packet_size == 500
    assert sc.flows[2].start_time == 2.0


def test_parse_scenario_errors_carry_line_numbers():
    with pytest.raises(ValueError, match="line 2"):
        parse_scenario("duration = 5\nwombats = 3\nflow tcp")
    with pytest.raises(ValueError, match="no flows"):
        parse_scenario("duration = 5")
    with pytest.raises(ValueError, match="line 1"):
        parse_scenario("flow tcp rate=oops")


def test_load_scenario_round_trip(tmp_path):
    path = tmp_path / "race.txt"
    path.write_text("duration = 3\nflow udp_cbr rate=0.5e6\n")
    sc = load_scenario(path)
    assert sc.duration == 3.0
    assert sc.flows[0].kind == "udp_cbr"
