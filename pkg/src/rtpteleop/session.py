"""Per-session RTP send/receive state.

The receive side tracks one SourceState per SSRC: a 32-bit extended
sequence number (16-bit wire sequence plus wrap cycles), loss counters
snapshotted at each report, and the interarrival jitter estimator

    D = (arrival_k - arrival_{k-1}) - (ts_k - ts_{k-1})        [ticks]
    J <- J + (|D| - J) / 16

The send side assigns sequence numbers and media-clock timestamps and
produces sender reports.  Periodic report scheduling follows the usual
interval rule: the deterministic part is the larger of a 5 s floor
(2.5 s for the very first report) and members * avg_pkt_size * 8 /
rtcp_bandwidth, randomized uniformly over [0.5 T, 1.5 T].
"""

from __future__ import annotations

import math
from enum import Enum
from random import Random

from .wire import ReportBlock, SenderInfo, SenderReport

SEQ_MOD = 1 << 16
WRAP_WINDOW = 1 << 15        # forward-jump window for wrap detection
LATE_WINDOW = 100            # packets further behind count as duplicates/late
MIN_SEQUENTIAL = 2           # in-order packets needed to validate a source
JITTER_GAIN = 1 / 16

RTCP_MIN_INTERVAL = 5.0
RTCP_INITIAL_MIN_INTERVAL = 2.5
RTCP_BANDWIDTH_FRACTION = 0.05   # share of the session bandwidth given to RTCP
MEMBER_TIMEOUT_INTERVALS = 5

NTP_EPOCH_OFFSET = 2208988800    # seconds between 1900-01-01 and 1970-01-01


class NoDataYet(RuntimeError):
    """Raised when a report is requested before any validated data."""


class NotASender(RuntimeError):
    """Raised when a sender report is requested before any data was sent."""


class Verdict(Enum):
    """Classification of one received data packet."""

    PROBATION = "probation"    # source not yet validated; do not deliver
    NEW = "new"                # advances the extended sequence
    REORDERED = "reordered"    # behind, but within the late window
    DUPLICATE = "duplicate"    # same seq, or too far behind to matter


def extend_sequence(prev_ext: int | None, seq: int) -> int:
    """Map a 16-bit sequence onto the extended timeline nearest prev_ext."""
    if prev_ext is None:
        return seq
    delta = (seq - prev_ext) % SEQ_MOD
    if delta < WRAP_WINDOW:
        return prev_ext + delta
    return prev_ext - (SEQ_MOD - delta)


def ntp_timestamp(t: float) -> tuple[int, int]:
    """Split a wall-clock time (seconds) into 32.32 NTP format."""
    seconds = int(t) + NTP_EPOCH_OFFSET
    fraction = int((t - int(t)) * (1 << 32))
    return seconds & 0xFFFFFFFF, fraction & 0xFFFFFFFF


def ntp_middle32(ntp_seconds: int, ntp_fraction: int) -> int:
    """The middle 32 bits of a 64-bit NTP timestamp, as used in LSR."""
    return ((ntp_seconds & 0xFFFF) << 16) | (ntp_fraction >> 16)


class SourceState:
    """Receiver statistics for one synchronization source."""

    def __init__(self, ssrc: int, clock_rate: int = 1000):
        self.ssrc = ssrc
        self.clock_rate = clock_rate
        self.probation = MIN_SEQUENTIAL
        self.base_seq = 0
        self.cycles = 0              # completed 16-bit wraps, in units of 65536
        self.max_seq = 0
        self.packets_received = 0
        self.late_or_duplicate = 0
        self.expected_prior = 0
        self.received_prior = 0
        self.jitter = 0.0            # timestamp ticks
        self.last_transit: float | None = None
        self.last_sr_ntp = 0
        self.last_sr_arrival: float | None = None
        self._started = False

    @property
    def extended_max(self) -> int:
        return self.cycles + self.max_seq

    @property
    def validated(self) -> bool:
        return self.probation == 0

    @property
    def expected(self) -> int:
        return self.extended_max - self.base_seq + 1

    @property
    def cumulative_lost(self) -> int:
        return self.expected - self.packets_received

    def on_receive_data(self, seq: int, rtp_ts: int, arrival: float) -> tuple[Verdict, int]:
        """Account for one data packet; returns its verdict and extended seq.

        ``arrival`` is local time in seconds and must be non-decreasing.
        Out-of-order and duplicate packets update counters but never
        reduce the extended maximum.
        """
        verdict, ext = self._update_seq(seq)
        if verdict in (Verdict.NEW, Verdict.REORDERED, Verdict.PROBATION):
            transit = arrival * self.clock_rate - rtp_ts
            if self.last_transit is not None:
                d = abs(transit - self.last_transit)
                self.jitter += (d - self.jitter) * JITTER_GAIN
            self.last_transit = transit
        return verdict, ext

    def _init_counts(self, seq: int) -> None:
        self.base_seq = seq
        self.max_seq = seq
        self.cycles = 0
        self.packets_received = 1
        self.late_or_duplicate = 0
        self.expected_prior = 0
        self.received_prior = 0

    def _update_seq(self, seq: int) -> tuple[Verdict, int]:
        if self.probation:
            if self._started and seq == (self.max_seq + 1) % SEQ_MOD:
                self.probation -= 1
                self.max_seq = seq
                if self.probation == 0:
                    self._init_counts(seq)
                    return Verdict.NEW, seq
            else:
                self._started = True
                self.probation = MIN_SEQUENTIAL - 1
                self.max_seq = seq
            return Verdict.PROBATION, seq

        udelta = (seq - self.max_seq) % SEQ_MOD
        if udelta == 0:
            self.packets_received += 1
            self.late_or_duplicate += 1
            return Verdict.DUPLICATE, self.extended_max
        if udelta < WRAP_WINDOW:
            if seq < self.max_seq:
                self.cycles += SEQ_MOD
            self.max_seq = seq
            self.packets_received += 1
            return Verdict.NEW, self.extended_max
        # behind the highest seen
        behind = SEQ_MOD - udelta
        ext = self.cycles + seq
        if seq > self.max_seq:   # reordered across a wrap boundary
            ext -= SEQ_MOD
        self.packets_received += 1
        if behind <= LATE_WINDOW:
            return Verdict.REORDERED, ext
        self.late_or_duplicate += 1
        return Verdict.DUPLICATE, ext

    def on_receive_sr(self, info: SenderInfo, arrival: float) -> None:
        self.last_sr_ntp = ntp_middle32(info.ntp_seconds, info.ntp_fraction)
        self.last_sr_arrival = arrival

    def make_receiver_report(self, now: float) -> ReportBlock:
        """Snapshot reception quality since the previous report."""
        if not self.validated:
            raise NoDataYet(f"no validated data from ssrc {self.ssrc:#x}")
        expected = self.expected
        expected_interval = expected - self.expected_prior
        received_interval = self.packets_received - self.received_prior
        self.expected_prior = expected
        self.received_prior = self.packets_received
        lost_interval = expected_interval - received_interval
        if expected_interval <= 0 or lost_interval <= 0:
            fraction = 0
        else:
            fraction = min(255, (lost_interval * 256) // expected_interval)
        cumulative = max(-(1 << 23), min((1 << 23) - 1, self.cumulative_lost))
        if self.last_sr_arrival is None:
            lsr, dlsr = 0, 0
        else:
            lsr = self.last_sr_ntp
            dlsr = int((now - self.last_sr_arrival) * 65536) & 0xFFFFFFFF
        return ReportBlock(
            source_ssrc=self.ssrc,
            fraction_lost=fraction,
            cumulative_lost=cumulative,
            extended_highest_seq=self.extended_max & 0xFFFFFFFF,
            interarrival_jitter=int(self.jitter),
            last_sr=lsr,
            delay_since_last_sr=dlsr,
        )


class RtpSender:
    """Send-side state: sequence/timestamp assignment and SR generation."""

    def __init__(self, ssrc: int, payload_type: int, clock_rate: int = 1000,
                 initial_seq: int = 0, initial_ts: int = 0, start_time: float = 0.0,
                 wall_offset: float = 0.0):
        self.ssrc = ssrc
        self.payload_type = payload_type
        self.clock_rate = clock_rate
        self.sequence = initial_seq % SEQ_MOD
        self.initial_ts = initial_ts
        self.start_time = start_time
        self.wall_offset = wall_offset
        self.packet_count = 0
        self.octet_count = 0

    def media_ticks(self, now: float) -> int:
        return (self.initial_ts + round((now - self.start_time) * self.clock_rate)) & 0xFFFFFFFF

    def next_packet(self, payload: bytes, now: float, marker: bool = False):
        from .wire import RtpPacket

        pkt = RtpPacket(
            payload_type=self.payload_type,
            sequence=self.sequence,
            timestamp=self.media_ticks(now),
            ssrc=self.ssrc,
            payload=payload,
            marker=marker,
        )
        self.sequence = (self.sequence + 1) % SEQ_MOD
        self.packet_count += 1
        self.octet_count += len(payload)
        return pkt

    def make_sender_report(self, now: float) -> SenderReport:
        """SR with wall time in NTP format and the matching media ticks."""
        if self.packet_count == 0:
            raise NotASender(f"ssrc {self.ssrc:#x} has sent no data")
        ntp_s, ntp_f = ntp_timestamp(now + self.wall_offset)
        return SenderReport(
            ssrc=self.ssrc,
            info=SenderInfo(
                ntp_seconds=ntp_s,
                ntp_fraction=ntp_f,
                rtp_timestamp=self.media_ticks(now),
                packet_count=self.packet_count,
                octet_count=self.octet_count,
            ),
        )


def rtcp_interval_base(members: int, rtcp_bandwidth: float, avg_pkt_size: float,
                       is_initial: bool = False) -> float:
    """Deterministic part of the report interval, in seconds."""
    if members < 1 or rtcp_bandwidth <= 0:
        raise ValueError("members must be >= 1 and rtcp_bandwidth > 0")
    t_min = RTCP_INITIAL_MIN_INTERVAL if is_initial else RTCP_MIN_INTERVAL
    return max(t_min, members * avg_pkt_size * 8 / rtcp_bandwidth)


def rtcp_interval(members: int, rtcp_bandwidth: float, avg_pkt_size: float,
                  rng: Random, is_initial: bool = False) -> float:
    """Report interval randomized over [0.5 T, 1.5 T] to avoid phase lock."""
    t = rtcp_interval_base(members, rtcp_bandwidth, avg_pkt_size, is_initial)
    return rng.uniform(0.5 * t, 1.5 * t)


class Membership:
    """Participants heard from recently; senders are those that sent data."""

    def __init__(self):
        self._last_heard: dict[int, float] = {}
        self.senders: set[int] = set()

    def heard(self, ssrc: int, kind: str, now: float) -> None:
        """Register traffic from ssrc; kind is 'data', 'report' or 'bye'."""
        if kind == "bye":
            self._last_heard.pop(ssrc, None)
            self.senders.discard(ssrc)
            return
        if kind not in ("data", "report"):
            raise ValueError(f"unknown traffic kind {kind!r}")
        self._last_heard[ssrc] = now
        if kind == "data":
            self.senders.add(ssrc)

    def sweep(self, now: float, interval: float) -> None:
        """Expire members silent for MEMBER_TIMEOUT_INTERVALS intervals."""
        cutoff = now - MEMBER_TIMEOUT_INTERVALS * interval
        for ssrc in [s for s, t in self._last_heard.items() if t < cutoff]:
            del self._last_heard[ssrc]
            self.senders.discard(ssrc)

    @property
    def members(self) -> set[int]:
        return set(self._last_heard)

    @property
    def count(self) -> int:
        return len(self._last_heard)
