"""Playout (jitter) buffer.

Packets are held keyed by extended sequence number and released in
strictly increasing order once their playout instant has passed.  The
playout instant maps the sender's media timestamp into local time via
an offset anchored at the first packet (re-anchored at talk-spurt
boundaries) plus the playout delay:

    due = ts / clock_rate + offset + delay

In fixed mode the delay is constant; in adaptive mode it is
base_delay + jitter_factor * jitter_estimate, re-evaluated only at
talk-spurt boundaries (sequence gaps larger than TALKSPURT_GAP) so the
stream is not warped mid-flow.
"""

from __future__ import annotations

from .session import extend_sequence
from .wire import RtpPacket

DEFAULT_CAPACITY = 256
TALKSPURT_GAP = 10           # packets; larger gaps delimit talk spurts


class PlayoutBuffer:
    def __init__(self, mode: str = "fixed", base_delay: float = 0.030,
                 jitter_factor: float = 4.0, capacity: int = DEFAULT_CAPACITY,
                 clock_rate: int = 1000):
        if mode not in ("fixed", "adaptive"):
            raise ValueError(f"unknown playout mode {mode!r}")
        self.mode = mode
        self.base_delay = base_delay
        self.jitter_factor = jitter_factor
        self.capacity = capacity
        self.clock_rate = clock_rate
        self.current_delay = base_delay
        self.late_drops = 0
        self.duplicates = 0
        self.playout_losses = 0
        self.forced_releases = 0
        self._entries: dict[int, tuple[float, RtpPacket]] = {}
        self._forced: list[RtpPacket] = []
        self._next_release: int | None = None
        self._offset: float | None = None
        self._highest_ext: int | None = None

    def __len__(self) -> int:
        return len(self._entries)

    def _set_delay(self, jitter_ticks: float) -> None:
        if self.mode == "adaptive":
            self.current_delay = self.base_delay + self.jitter_factor * jitter_ticks / self.clock_rate

    def insert(self, pkt: RtpPacket, arrival: float, jitter_estimate: float = 0.0,
               ext_seq: int | None = None):
        """Store a validated packet; returns self for chaining.

        ``jitter_estimate`` is the session's estimator in timestamp ticks.
        ``ext_seq`` may be supplied by the session; otherwise the buffer
        extends the 16-bit sequence itself.
        """
        ext = extend_sequence(self._highest_ext, pkt.sequence) if ext_seq is None else ext_seq

        boundary = self._highest_ext is None or ext - self._highest_ext > TALKSPURT_GAP
        if self._highest_ext is None or ext > self._highest_ext:
            self._highest_ext = ext
        if boundary:
            self._set_delay(jitter_estimate)
            self._offset = arrival - pkt.timestamp / self.clock_rate

        if self._next_release is not None and ext < self._next_release:
            self.late_drops += 1
            return self
        if ext in self._entries:
            self.duplicates += 1
            return self

        due = pkt.timestamp / self.clock_rate + self._offset + self.current_delay
        if due < arrival:
            self.late_drops += 1
            return self
        self._entries[ext] = (due, pkt)

        if len(self._entries) > self.capacity:
            oldest = min(self._entries)
            _, forced = self._entries.pop(oldest)
            self._forced.append(forced)
            self.forced_releases += 1
            if self._next_release is not None and oldest > self._next_release:
                self.playout_losses += oldest - self._next_release
            self._next_release = oldest + 1
        return self

    def poll_due(self, now: float) -> list[RtpPacket]:
        """All packets due by ``now``, in sequence order, gaps counted lost."""
        out = self._forced
        self._forced = []
        while self._entries:
            ext = min(self._entries)
            due, pkt = self._entries[ext]
            if due > now:
                break
            del self._entries[ext]
            if self._next_release is None:
                self._next_release = ext
            elif ext > self._next_release:
                self.playout_losses += ext - self._next_release
            out.append(pkt)
            self._next_release = ext + 1
        return out

    def stats(self) -> dict:
        return {
            "late_drops": self.late_drops,
            "duplicates": self.duplicates,
            "playout_losses": self.playout_losses,
            "current_delay": self.current_delay,
        }
