import random

import pytest

from rtpteleop.playout import PlayoutBuffer
from rtpteleop.wire import RtpPacket


def pkt(seq, ts):
    return RtpPacket(payload_type=97, sequence=seq % 65536, timestamp=ts, ssrc=1)


def test_reorders_by_sequence():
    buf = PlayoutBuffer(mode="fixed", base_delay=0.1)
    for seq in (1, 3, 2):
        buf.insert(pkt(seq, seq * 20), arrival=0.2)
    out = buf.poll_due(now=10.0)
    assert [p.sequence for p in out] == [1, 2, 3]


def test_fixed_mode_due_time():
    buf = PlayoutBuffer(mode="fixed", base_delay=0.100)
    # sent at t=0 (ts 0), arrives immediately: due at t=0.100
    buf.insert(pkt(0, 0), arrival=0.0)
    assert buf.poll_due(now=0.099) == []
    assert [p.sequence for p in buf.poll_due(now=0.100)] == [0]


def test_adaptive_delay_from_jitter():
    buf = PlayoutBuffer(mode="adaptive", base_delay=0.020, jitter_factor=4.0)
    buf.insert(pkt(0, 0), arrival=0.0, jitter_estimate=4.0)   # 4 ticks = 4 ms
    assert buf.current_delay == pytest.approx(0.036)


def test_empty_poll():
    buf = PlayoutBuffer()
    assert buf.poll_due(now=100.0) == []


def test_partial_release_in_order():
    buf = PlayoutBuffer(mode="fixed", base_delay=0.050)
    buf.insert(pkt(1, 0), arrival=0.0)
    buf.insert(pkt(2, 100), arrival=0.11)
    buf.insert(pkt(3, 2000), arrival=2.0)
    out = buf.poll_due(now=0.2)
    assert [p.sequence for p in out] == [1, 2]
    assert buf.poll_due(now=0.2) == []


def test_gap_counted_as_playout_loss():
    buf = PlayoutBuffer(mode="fixed", base_delay=0.050)
    buf.insert(pkt(4, 0), arrival=0.0)
    buf.insert(pkt(6, 200), arrival=0.2)      # 5 never arrives
    assert [p.sequence for p in buf.poll_due(now=0.06)] == [4]
    assert [p.sequence for p in buf.poll_due(now=0.26)] == [6]
    assert buf.stats()["playout_losses"] == 1


def test_late_packet_dropped():
    buf = PlayoutBuffer(mode="fixed", base_delay=0.030)
    buf.insert(pkt(1, 0), arrival=0.0)
    buf.insert(pkt(2, 10), arrival=0.5)       # due at 0.040, long past
    assert buf.stats()["late_drops"] == 1
    assert [p.sequence for p in buf.poll_due(now=1.0)] == [1]


def test_duplicate_dropped():
    buf = PlayoutBuffer(mode="fixed", base_delay=0.030)
    buf.insert(pkt(1, 0), arrival=0.0)
    buf.insert(pkt(1, 0), arrival=0.001)
    assert buf.stats()["duplicates"] == 1
    assert len(buf.poll_due(now=1.0)) == 1


def test_packet_below_release_point_is_late():
    buf = PlayoutBuffer(mode="fixed", base_delay=0.010)
    buf.insert(pkt(1, 0), arrival=0.0)
    buf.insert(pkt(2, 10), arrival=0.0)
    buf.poll_due(now=1.0)
    buf.insert(pkt(1, 0), arrival=1.1)
    assert buf.stats()["late_drops"] == 1


def test_fresh_stats_all_zero():
    st = PlayoutBuffer().stats()
    assert st["late_drops"] == 0
    assert st["duplicates"] == 0
    assert st["playout_losses"] == 0


def test_overflow_forces_oldest_out():
    buf = PlayoutBuffer(mode="fixed", base_delay=10.0, capacity=8)
    for seq in range(10):
        buf.insert(pkt(seq, seq), arrival=0.001 * seq)
    assert len(buf) == 8
    out = buf.poll_due(now=0.1)               # nothing due, but 2 were forced
    assert [p.sequence for p in out] == [0, 1]
    assert buf.forced_releases == 2


def test_sequence_extension_across_wrap():
    buf = PlayoutBuffer(mode="fixed", base_delay=0.05)
    buf.insert(pkt(65534, 0), arrival=0.0)
    buf.insert(pkt(65535, 10), arrival=0.01)
    buf.insert(pkt(0, 20), arrival=0.02)
    buf.insert(pkt(1, 30), arrival=0.03)
    out = buf.poll_due(now=1.0)
    assert [p.sequence for p in out] == [65534, 65535, 0, 1]


def test_delivery_strictly_increasing_under_chaos():
    rng = random.Random(5)
    buf = PlayoutBuffer(mode="adaptive", base_delay=0.040, capacity=64)
    t = 0.0
    released = []
    seq = 0
    while seq < 2000:
        # 20 ms spacing, random network delay, occasional loss/dup
        batch = []
        if rng.random() > 0.05:                     # 5% loss
            batch.append(seq)
        if rng.random() < 0.05:                     # 5% duplicates
            batch.append(seq)
        for s in batch:
            delay = rng.uniform(0.01, 0.06)
            buf.insert(pkt(s, s * 20), arrival=seq * 0.020 + delay,
                       jitter_estimate=10.0)
        seq += 1
        t = seq * 0.020
        released.extend(buf.poll_due(t))
    for a, b in zip(released, released[1:]):
        assert (b.sequence - a.sequence) % 65536 > 0
    ext = [p.sequence for p in released]
    assert ext == sorted(ext)
