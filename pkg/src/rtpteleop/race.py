"""Discrete-event comparison of RTP, UDP, and TCP flows sharing one
bottleneck link.

Topology: every source feeds a router that forwards onto a duplex
link (default 1.5 Mbit/s, 10 ms propagation, droptail queue of 50
packets).  The reverse direction carries only TCP acknowledgements and
RTCP receiver reports, so it is modeled as pure propagation delay.

Flow kinds:
  udp_cbr   constant bit rate datagrams at exact spacing
  rtp_cbr   the same payload stream throttled to 95% of the nominal
            rate, with real RTP headers and periodic RTCP sender
            reports inside the remaining 5% budget; the sink runs the
            regular session accounting, so receiver reports can be
            checked against the simulator's own drop counters
  tcp       Reno congestion control (slow start, congestion avoidance,
            fast retransmit and recovery, exponential RTO backoff);
            the delivered rate is emergent

Per sample window and per flow the simulator records delivered
throughput, mean one-way delay, and an interarrival jitter estimate
of the delivery process (successive-gap variation smoothed with the
session estimator gain).  RTCP overhead packets contend for the link
but are excluded from the rtp flow's throughput and drop accounting,
keeping the receiver-report cross-check exact.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, replace
from random import Random

from .metrics import FlowSample
from .session import JITTER_GAIN, RtpSender, SourceState, rtcp_interval
from .wire import (SenderInfo, SenderReport, SourceDescription,
                   encode_rtcp_compound)

FLOW_KINDS = ("udp_cbr", "rtp_cbr", "tcp")

TCP_INITIAL_RTO = 1.0
TCP_MIN_RTO = 0.2
TCP_MAX_RTO = 60.0
TCP_RTO_GRANULARITY = 0.010
TCP_INITIAL_SSTHRESH = 1 << 30


@dataclass
class TcpState:
    """Reno congestion-control state.

    Transitions live in tcp_on_ack and tcp_on_timeout, which return new
    states and never mutate their argument.  The simulator's flow object
    owns an instance and layers timers, retransmission bookkeeping, and
    RTT estimation on top.
    """

    cwnd: float = 1.0               # segments, real-valued
    ssthresh: float = float(TCP_INITIAL_SSTHRESH)
    state: str = "slow_start"       # or congestion_avoidance, fast_recovery
    dup_acks: int = 0
    rto: float = TCP_INITIAL_RTO
    srtt: float | None = None
    rttvar: float = 0.0
    next_seq: int = 0
    highest_acked: int = 0


def tcp_on_ack(t: TcpState, acked_seq: int) -> TcpState:
    """Apply one cumulative acknowledgement.

    New data acked grows the window (exponentially in slow start, by
    1/cwnd per segment in congestion avoidance) or, in fast recovery,
    deflates cwnd back to ssthresh.  A duplicate ack inflates the window
    during recovery; the third consecutive duplicate halves ssthresh and
    enters recovery.  Stale acks below highest_acked are ignored.
    """
    if acked_seq > t.highest_acked:
        newly = acked_seq - t.highest_acked
        t = replace(t, highest_acked=acked_seq, dup_acks=0)
        if t.state == "fast_recovery":
            # deflate: the retransmission got through
            return replace(t, cwnd=t.ssthresh, state="congestion_avoidance")
        if t.state == "slow_start":
            cwnd = t.cwnd + newly
            if cwnd >= t.ssthresh:
                return replace(t, cwnd=cwnd, state="congestion_avoidance")
            return replace(t, cwnd=cwnd)
        cwnd = t.cwnd
        for _ in range(newly):
            cwnd += 1.0 / cwnd
        return replace(t, cwnd=cwnd)
    if acked_seq < t.highest_acked:
        return t
    if t.state == "fast_recovery":
        return replace(t, cwnd=t.cwnd + 1.0)
    dup_acks = t.dup_acks + 1
    if dup_acks == 3:
        ssthresh = max(t.cwnd / 2.0, 2.0)
        return replace(t, dup_acks=dup_acks, ssthresh=ssthresh,
                       cwnd=ssthresh + 3.0, state="fast_recovery")
    return replace(t, dup_acks=dup_acks)


def tcp_on_timeout(t: TcpState) -> TcpState:
    """Retransmission timeout: collapse to one segment, restart slow
    start, double the timer (capped), and rewind next_seq to the lowest
    unacked segment so the whole gap is resent."""
    return replace(t, ssthresh=max(t.cwnd / 2.0, 2.0), cwnd=1.0,
                   state="slow_start", dup_acks=0,
                   rto=min(t.rto * 2.0, TCP_MAX_RTO),
                   next_seq=t.highest_acked)


@dataclass
class FlowSpec:
    kind: str
    rate: float = 0.0          # bits/s, CBR kinds only
    packet_size: int = 1000    # bytes on the wire
    start_time: float = 0.0
    name: str | None = None    # flow id in samples; defaults per kind

    def __post_init__(self) -> None:
        if self.kind not in FLOW_KINDS:
            raise ValueError(f"unknown flow kind {self.kind!r}")
        if self.kind == "tcp":
            if self.rate:
                raise ValueError("tcp rate is emergent, not configured")
        elif self.rate <= 0.0:
            raise ValueError(f"{self.kind} needs rate > 0")
        if self.packet_size < 40:
            raise ValueError("packet_size must be at least 40 bytes")
        if self.start_time < 0.0:
            raise ValueError("start_time must be nonnegative")


@dataclass
class Scenario:
    flows: list
    link_rate: float = 1.5e6
    link_prop_delay: float = 0.01
    queue_capacity: int = 50
    duration: float = 40.0
    sample_window: float = 0.1
    seed: int = 1

    def __post_init__(self) -> None:
        if not self.flows:
            raise ValueError("scenario needs at least one flow")
        if self.link_rate <= 0 or self.link_prop_delay < 0:
            raise ValueError("bad link parameters")
        if self.queue_capacity < 1:
            raise ValueError("queue_capacity must be >= 1")
        if self.duration <= 0 or self.sample_window <= 0:
            raise ValueError("duration and sample_window must be positive")
        names = [f.name or _default_name(f, i)
                 for i, f in enumerate(self.flows)]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate flow names {names}")
        for f, name in zip(self.flows, names):
            f.name = name


def _default_name(spec: FlowSpec, index: int) -> str:
    base = {"udp_cbr": "udp", "rtp_cbr": "rtp", "tcp": "tcp"}[spec.kind]
    return base if index < 3 else f"{base}{index}"


def scenario_a(duration: float = 40.0, seed: int = 1) -> Scenario:
    """Shared 1.5 Mbit/s link with headroom: RTP and UDP at 0.5 Mbit/s
    each leave TCP a fair third of the capacity.

    The preset samples in 0.5 s windows so each TCP loss-recovery cycle
    (roughly one every few seconds) lands whole inside a window instead
    of smearing across several.
    """
    return Scenario(flows=[
        FlowSpec(kind="rtp_cbr", rate=0.5e6),
        FlowSpec(kind="udp_cbr", rate=0.5e6),
        FlowSpec(kind="tcp"),
    ], duration=duration, sample_window=0.5, seed=seed)


def scenario_b(duration: float = 60.0, seed: int = 1) -> Scenario:
    """Congested link: RTP and UDP offered at 1.0 Mbit/s each already
    exceed capacity, starving TCP out."""
    return Scenario(flows=[
        FlowSpec(kind="rtp_cbr", rate=1.0e6),
        FlowSpec(kind="udp_cbr", rate=1.0e6),
        FlowSpec(kind="tcp"),
    ], duration=duration, sample_window=0.5, seed=seed)


def parse_scenario(text: str) -> Scenario:
    """Flat text scenario format: `key = value` lines for the link and
    run fields plus one `flow <kind> [key=value ...]` line per flow."""
    fields: dict = {}
    flows: list[FlowSpec] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("flow "):
                flows.append(_parse_flow(line.split()[1:]))
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"expected key = value, got {raw!r}")
            key = key.strip()
            value = value.strip()
            if key in ("queue_capacity", "seed"):
                fields[key] = int(value)
            elif key in ("link_rate", "link_prop_delay", "duration",
                         "sample_window"):
                fields[key] = float(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if not flows:
        raise ValueError("scenario file defines no flows")
    return Scenario(flows=flows, **fields)


def _parse_flow(tokens: list[str]) -> FlowSpec:
    if not tokens:
        raise ValueError("flow line needs a kind")
    kind = tokens[0]
    kw: dict = {}
    for token in tokens[1:]:
        key, sep, value = token.partition("=")
        if not sep:
            raise ValueError(f"bad flow option {token!r}")
        if key == "rate":
            kw["rate"] = float(value)
        elif key == "packet_size":
            kw["packet_size"] = int(value)
        elif key == "start":
            kw["start_time"] = float(value)
        elif key == "name":
            kw["name"] = value
        else:
            raise ValueError(f"unknown flow option {key!r}")
    return FlowSpec(kind=kind, **kw)


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


class _Simulator:
    def __init__(self):
        self.now = 0.0
        self._heap: list = []
        self._order = 0

    def at(self, time: float, fn) -> None:
        heapq.heappush(self._heap, (time, self._order, fn))
        self._order += 1

    def run(self) -> None:
        while self._heap:
            time, _, fn = heapq.heappop(self._heap)
            self.now = time
            fn()


class _Packet:
    __slots__ = ("flow", "size", "tx_time", "seq", "rtp_seq", "rtp_ts",
                 "is_rtcp", "retransmit")

    def __init__(self, flow, size, tx_time, seq=None, rtp_seq=None,
                 rtp_ts=None, is_rtcp=False, retransmit=False):
        self.flow = flow
        self.size = size
        self.tx_time = tx_time
        self.seq = seq
        self.rtp_seq = rtp_seq
        self.rtp_ts = rtp_ts
        self.is_rtcp = is_rtcp
        self.retransmit = retransmit


class _Link:
    """Rate-limited droptail FIFO; never idle while packets wait."""

    def __init__(self, sim: _Simulator, rate: float, prop_delay: float,
                 capacity: int, deliver):
        self.sim = sim
        self.rate = rate
        self.prop_delay = prop_delay
        self.capacity = capacity
        self.deliver = deliver
        self.queue: deque = deque()
        self.busy = False

    def enqueue(self, pkt: _Packet) -> bool:
        if self.busy:
            if len(self.queue) >= self.capacity:
                return False
            self.queue.append(pkt)
        else:
            self._start_service(pkt)
        return True

    def _start_service(self, pkt: _Packet) -> None:
        self.busy = True
        self.sim.at(self.sim.now + pkt.size * 8 / self.rate,
                    lambda: self._finish_service(pkt))

    def _finish_service(self, pkt: _Packet) -> None:
        self.sim.at(self.sim.now + self.prop_delay,
                    lambda: self.deliver(pkt))
        if self.queue:
            self._start_service(self.queue.popleft())
        else:
            self.busy = False


class _FlowStats:
    """Per-flow sink accounting and window accumulators.

    Jitter is measured on the delivery process itself: D is the change
    between consecutive interarrival gaps and the estimator runs the
    session recurrence J += (|D| - J)/16.  Transit-time jitter would
    cancel for TCP, whose ack-clocked sender mirrors its own delivery
    pattern; the gap form keeps bursty delivery visible for every flow
    while matching the transit form for constant-spacing senders.
    A sample reports the mean estimator value over the window.
    """

    def __init__(self, name: str):
        self.name = name
        self.jitter = 0.0        # seconds, delivery-gap estimate
        self._prev_arrival: float | None = None
        self._prev_gap: float | None = None
        self.window_bits = 0
        self.window_delay_sum = 0.0
        self.window_jitter_sum = 0.0
        self.window_count = 0
        self.window_drops = 0
        self.total_bits = 0
        self.total_delivered = 0
        self.total_drops = 0

    def on_deliver(self, pkt: _Packet, now: float) -> None:
        self.window_bits += pkt.size * 8
        self.total_bits += pkt.size * 8
        self.window_delay_sum += now - pkt.tx_time
        self.window_count += 1
        self.total_delivered += 1
        if self._prev_arrival is not None:
            gap = now - self._prev_arrival
            if self._prev_gap is not None:
                d = gap - self._prev_gap
                self.jitter += (abs(d) - self.jitter) * JITTER_GAIN
            self._prev_gap = gap
        self._prev_arrival = now
        self.window_jitter_sum += self.jitter

    def on_drop(self) -> None:
        self.window_drops += 1
        self.total_drops += 1

    def take_sample(self, t: float, window: float) -> FlowSample:
        count = self.window_count
        sample = FlowSample(
            t=t,
            flow=self.name,
            throughput_bps=self.window_bits / window,
            delay_ms=(self.window_delay_sum / count * 1e3) if count else 0.0,
            jitter_ms=(self.window_jitter_sum / count * 1e3) if count
                      else self.jitter * 1e3,
            drops=self.window_drops,
        )
        self.window_bits = 0
        self.window_delay_sum = 0.0
        self.window_jitter_sum = 0.0
        self.window_count = 0
        self.window_drops = 0
        return sample


class _CbrFlow:
    def __init__(self, sim, link, spec: FlowSpec, stats: _FlowStats,
                 duration: float):
        self.sim = sim
        self.link = link
        self.spec = spec
        self.stats = stats
        self.duration = duration
        self.interval = spec.packet_size * 8 / spec.rate
        sim.at(spec.start_time, self.tick)

    def tick(self) -> None:
        if self.sim.now >= self.duration:
            return
        if not self.link.enqueue(self._make_packet()):
            self.stats.on_drop()
        self.sim.at(self.sim.now + self.interval, self.tick)

    def _make_packet(self) -> _Packet:
        return _Packet(self.stats.name, self.spec.packet_size, self.sim.now)


class _RtpFlow(_CbrFlow):
    """CBR data at 95% of nominal plus RTCP sender reports; the sink
    runs the shared session accounting."""

    def __init__(self, sim, link, spec, stats, duration, rng: Random,
                 rtcp_drop_counter):
        self.sender = RtpSender(ssrc=0x52545021, payload_type=98,
                                clock_rate=1000)
        self.source_state: SourceState | None = None
        self.rng = rng
        self.rtcp_sent = 0
        self.rtcp_drop_counter = rtcp_drop_counter
        self.nominal_rate = spec.rate
        sr = SenderReport(ssrc=0x52545021,
                          info=SenderInfo(0, 0, 0, 0, 0), reports=[])
        sdes = SourceDescription(ssrc=0x52545021, items=[(1, "rtp@race")])
        self._sr_size = len(encode_rtcp_compound([sr, sdes]))
        super().__init__(sim, link, spec, stats, duration)
        self.interval = spec.packet_size * 8 / (0.95 * spec.rate)
        sim.at(spec.start_time + rtcp_interval(
            members=2, rtcp_bandwidth=0.05 * spec.rate,
            avg_pkt_size=self._sr_size, rng=rng, is_initial=True),
            self.rtcp_tick)

    def _make_packet(self) -> _Packet:
        payload = bytes(self.spec.packet_size - 12)
        rtp = self.sender.next_packet(payload, self.sim.now)
        return _Packet(self.stats.name, self.spec.packet_size, self.sim.now,
                       rtp_seq=rtp.sequence, rtp_ts=rtp.timestamp)

    def rtcp_tick(self) -> None:
        if self.sim.now >= self.duration:
            return
        pkt = _Packet(self.stats.name, self._sr_size, self.sim.now,
                      is_rtcp=True)
        if not self.link.enqueue(pkt):
            self.rtcp_drop_counter()
        self.rtcp_sent += 1
        self.sim.at(self.sim.now + rtcp_interval(
            members=2, rtcp_bandwidth=0.05 * self.nominal_rate,
            avg_pkt_size=self._sr_size, rng=self.rng), self.rtcp_tick)

    def on_deliver_data(self, pkt: _Packet, now: float) -> None:
        if self.source_state is None:
            self.source_state = SourceState(ssrc=self.sender.ssrc,
                                            clock_rate=1000)
        self.source_state.on_receive_data(pkt.rtp_seq, pkt.rtp_ts, now)


class _TcpFlow:
    """One-way bulk Reno transfer with an infinite backlog.

    Congestion-control transitions go through the pure TcpState
    functions; this class adds the retransmission timer, Karn's rule
    bookkeeping, RTT estimation, and the receiver side.
    """

    def __init__(self, sim, link, spec: FlowSpec, stats: _FlowStats,
                 duration: float):
        self.sim = sim
        self.link = link
        self.spec = spec
        self.stats = stats
        self.duration = duration
        self.tcb = TcpState()
        self.send_times: dict[int, float] = {}
        self.retransmitted: set[int] = set()
        self.timer_epoch = 0
        self.timer_armed = False
        # receiver side
        self.rcv_next = 0
        self.rcv_buffer: set[int] = set()
        self.timeouts = 0
        sim.at(spec.start_time, self.try_send)

    # --- sender -----------------------------------------------------

    def try_send(self) -> None:
        if self.sim.now >= self.duration:
            return
        tcb = self.tcb
        while tcb.next_seq < tcb.highest_acked + int(tcb.cwnd):
            self._transmit(tcb.next_seq)
            self.tcb = tcb = replace(tcb, next_seq=tcb.next_seq + 1)

    def _transmit(self, seq: int) -> None:
        # Karn's rule: a second send of the same segment never yields
        # an RTT sample, so keep the first send time and flag it.
        retransmit = seq in self.send_times or seq in self.retransmitted
        if retransmit:
            self.retransmitted.add(seq)
        else:
            self.send_times[seq] = self.sim.now
        pkt = _Packet(self.stats.name, self.spec.packet_size, self.sim.now,
                      seq=seq, retransmit=retransmit)
        if not self.link.enqueue(pkt):
            self.stats.on_drop()
        if not self.timer_armed:
            self._arm_timer()

    def _arm_timer(self) -> None:
        self.timer_epoch += 1
        self.timer_armed = True
        epoch = self.timer_epoch
        self.sim.at(self.sim.now + self.tcb.rto,
                    lambda: self._on_rto(epoch))

    def _cancel_timer(self) -> None:
        self.timer_epoch += 1
        self.timer_armed = False

    def _on_rto(self, epoch: int) -> None:
        if epoch != self.timer_epoch:
            return
        self.timer_armed = False
        if (self.tcb.highest_acked >= self.tcb.next_seq
                or self.sim.now >= self.duration):
            return
        self.timeouts += 1
        self.tcb = tcp_on_timeout(self.tcb)
        self.try_send()
        self._arm_timer()

    def on_ack(self, ack: int) -> None:
        if self.sim.now >= self.duration:
            return
        prev = self.tcb
        if ack > prev.highest_acked:
            sample_seq = ack - 1
            if sample_seq not in self.retransmitted:
                sent = self.send_times.get(sample_seq)
                if sent is not None:
                    self._rtt_sample(self.sim.now - sent)
            for seq in range(prev.highest_acked, ack):
                self.send_times.pop(seq, None)
                self.retransmitted.discard(seq)
            self.tcb = tcp_on_ack(prev, ack)
            if self.tcb.highest_acked < self.tcb.next_seq:
                self._arm_timer()
            else:
                self._cancel_timer()
        elif prev.next_seq > prev.highest_acked:
            self.tcb = tcp_on_ack(prev, ack)
            if (self.tcb.state == "fast_recovery"
                    and prev.state != "fast_recovery"):
                self._transmit(self.tcb.highest_acked)
                self._arm_timer()
        self.try_send()

    def _rtt_sample(self, r: float) -> None:
        tcb = self.tcb
        if tcb.srtt is None:
            srtt = r
            rttvar = r / 2.0
        else:
            rttvar = 0.75 * tcb.rttvar + 0.25 * abs(tcb.srtt - r)
            srtt = 0.875 * tcb.srtt + 0.125 * r
        rto = srtt + max(TCP_RTO_GRANULARITY, 4.0 * rttvar)
        rto = min(max(rto, TCP_MIN_RTO), TCP_MAX_RTO)
        self.tcb = replace(tcb, srtt=srtt, rttvar=rttvar, rto=rto)

    # --- receiver ---------------------------------------------------

    def on_segment(self, pkt: _Packet, prop_delay: float) -> None:
        seq = pkt.seq
        if seq == self.rcv_next:
            self.rcv_next += 1
            while self.rcv_next in self.rcv_buffer:
                self.rcv_buffer.discard(self.rcv_next)
                self.rcv_next += 1
        elif seq > self.rcv_next:
            self.rcv_buffer.add(seq)
        ack = self.rcv_next
        self.sim.at(self.sim.now + prop_delay, lambda: self.on_ack(ack))


@dataclass
class RaceResult:
    """Sample series plus run-level accounting.

    Iterates as the flat list of FlowSample rows, so callers that only
    want the series can treat the result as one.
    """

    samples: list
    totals: dict            # flow -> {delivered, drops, bits, mean_bps}
    rtp_report: object | None = None    # final RTCP receiver report block
    rtp_data_drops: int = 0
    rtp_rtcp_drops: int = 0
    tcp_timeouts: int = 0
    duration: float = 0.0

    def __iter__(self):
        return iter(self.samples)

    def __len__(self) -> int:
        return len(self.samples)


def run_scenario(scenario: Scenario) -> RaceResult:
    sim = _Simulator()
    rng = Random(scenario.seed)
    stats: dict[str, _FlowStats] = {}
    rtp_flows: dict[str, _RtpFlow] = {}
    tcp_flows: dict[str, _TcpFlow] = {}
    rtcp_drops = [0]

    def deliver(pkt: _Packet) -> None:
        flow_stats = stats[pkt.flow]
        if pkt.is_rtcp:
            return  # RTCP overhead is tracked separately
        flow_stats.on_deliver(pkt, sim.now)
        if pkt.flow in rtp_flows:
            rtp_flows[pkt.flow].on_deliver_data(pkt, sim.now)
        if pkt.flow in tcp_flows:
            tcp_flows[pkt.flow].on_segment(pkt, scenario.link_prop_delay)

    link = _Link(sim, scenario.link_rate, scenario.link_prop_delay,
                 scenario.queue_capacity, deliver)

    for spec in scenario.flows:
        flow_stats = _FlowStats(spec.name)
        stats[spec.name] = flow_stats
        if spec.kind == "udp_cbr":
            _CbrFlow(sim, link, spec, flow_stats, scenario.duration)
        elif spec.kind == "rtp_cbr":
            rtp_flows[spec.name] = _RtpFlow(
                sim, link, spec, flow_stats, scenario.duration, rng,
                lambda: rtcp_drops.__setitem__(0, rtcp_drops[0] + 1))
        else:
            tcp_flows[spec.name] = _TcpFlow(sim, link, spec, flow_stats,
                                            scenario.duration)

    samples: list[FlowSample] = []

    def sample_tick() -> None:
        t = sim.now
        for spec in scenario.flows:
            if t <= spec.start_time:
                continue
            samples.append(stats[spec.name].take_sample(
                t, scenario.sample_window))
        if t + scenario.sample_window <= scenario.duration + 1e-9:
            sim.at(t + scenario.sample_window, sample_tick)

    sim.at(scenario.sample_window, sample_tick)
    sim.run()  # drains fully: nothing reschedules past the duration

    totals = {}
    elapsed = {spec.name: scenario.duration - spec.start_time
               for spec in scenario.flows}
    for name, flow_stats in stats.items():
        totals[name] = {
            "delivered": flow_stats.total_delivered,
            "drops": flow_stats.total_drops,
            "bits": flow_stats.total_bits,
            "mean_bps": flow_stats.total_bits / elapsed[name],
        }

    result = RaceResult(samples=samples, totals=totals,
                        duration=scenario.duration,
                        rtp_rtcp_drops=rtcp_drops[0])
    for name, rtp in rtp_flows.items():
        result.rtp_data_drops = stats[name].total_drops
        if rtp.source_state is not None:
            result.rtp_report = rtp.source_state.make_receiver_report(
                scenario.duration)
    for flow in tcp_flows.values():
        result.tcp_timeouts = flow.timeouts
    return result


def window_means(samples, flow: str, after: float = 0.0) -> dict:
    """Steady-state averages over a flow's sample windows."""
    rows = [s for s in samples if s.flow == flow and s.t > after]
    if not rows:
        raise ValueError(f"no samples for {flow!r} after t={after}")
    n = len(rows)
    return {
        "throughput_bps": sum(s.throughput_bps for s in rows) / n,
        "delay_ms": sum(s.delay_ms for s in rows) / n,
        "jitter_ms": sum(s.jitter_ms for s in rows) / n,
        "drops": sum(s.drops for s in rows),
        "windows": n,
    }
