"""Seedable one-way network impairment channel.

Models an Internet-like path as a per-packet pipeline: random loss,
random duplication, a rate-limited droptail queue, then a fixed base
delay plus a random jitter sample.  Queue order never inverts; jitter
applied after the queue is the only source of reordering.

Time is injected by the caller, so the same channel runs against a
virtual clock in simulations and the monotonic clock in live mode.
Submission times must be nondecreasing.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass

JITTER_MODELS = ("none", "uniform", "gaussian")

# Gaussian jitter samples are clamped to this many standard deviations.
GAUSSIAN_CLAMP = 4.0


@dataclass
class ImpairmentProfile:
    """Parameters describing one direction of an impaired path."""

    base_delay: float = 0.0        # seconds
    jitter_model: str = "none"     # none | uniform | gaussian
    jitter_param: float = 0.0      # half-width (uniform) or sigma (gaussian), seconds
    loss_prob: float = 0.0
    dup_prob: float = 0.0
    rate_limit: float = 0.0        # bits/s, 0 = unlimited
    queue_capacity: int = 50       # waiting packets, excludes the one in service
    seed: int = 0

    def __post_init__(self) -> None:
        if self.jitter_model not in JITTER_MODELS:
            raise ValueError(f"unknown jitter model {self.jitter_model!r}")
        for name in ("loss_prob", "dup_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if self.base_delay < 0.0 or self.jitter_param < 0.0:
            raise ValueError("delays must be nonnegative")
        if self.rate_limit < 0.0:
            raise ValueError("rate_limit must be nonnegative")
        if self.queue_capacity < 0:
            raise ValueError("queue_capacity must be nonnegative")


class ImpairmentChannel:
    """Applies an ImpairmentProfile to submitted packets.

    Drops are counted, never raised.  The accounting identity holds at
    every instant:

        submitted == delivered + dropped_loss + dropped_queue
                     + in_flight - duplicated
    """

    def __init__(self, profile: ImpairmentProfile):
        self.profile = profile
        self.rng = random.Random(profile.seed)
        self.submitted = 0
        self.delivered = 0
        self.dropped_loss = 0
        self.dropped_queue = 0
        self.duplicated = 0
        self._heap: list[tuple[float, int, bytes]] = []
        self._order = 0
        self._link_free_at = 0.0
        self._waiting: list[float] = []  # service-start times of queued packets

    def submit(self, payload: bytes, now: float) -> None:
        if not payload:
            raise ValueError("payload must be non-empty")
        self.submitted += 1
        if self.rng.random() < self.profile.loss_prob:
            self.dropped_loss += 1
            return
        copies = 1
        if self.rng.random() < self.profile.dup_prob:
            copies = 2
            self.duplicated += 1
        for _ in range(copies):
            self._enqueue(payload, now)

    def _enqueue(self, payload: bytes, now: float) -> None:
        prof = self.profile
        if prof.rate_limit > 0.0:
            self._waiting = [s for s in self._waiting if s > now]
            if len(self._waiting) >= prof.queue_capacity:
                self.dropped_queue += 1
                return
            start = max(now, self._link_free_at)
            depart = start + len(payload) * 8 / prof.rate_limit
            self._link_free_at = depart
            if start > now:
                self._waiting.append(start)
        else:
            depart = now
        # Negative jitter never pulls delivery before the queue departure.
        extra = max(0.0, prof.base_delay + self._jitter_sample())
        heapq.heappush(self._heap, (depart + extra, self._order, payload))
        self._order += 1

    def _jitter_sample(self) -> float:
        prof = self.profile
        if prof.jitter_model == "uniform":
            return self.rng.uniform(-prof.jitter_param, prof.jitter_param)
        if prof.jitter_model == "gaussian":
            bound = GAUSSIAN_CLAMP * prof.jitter_param
            return min(max(self.rng.gauss(0.0, prof.jitter_param), -bound), bound)
        return 0.0

    def poll_deliveries(self, now: float) -> list[tuple[bytes, float]]:
        """Returns (payload, deliver_time) for everything due by now,
        sorted by delivery time with ties in submission order."""
        out = []
        while self._heap and self._heap[0][0] <= now:
            deliver, _, payload = heapq.heappop(self._heap)
            out.append((payload, deliver))
            self.delivered += 1
        return out

    def next_delivery_time(self) -> float | None:
        """Earliest pending delivery, or None when nothing is in flight."""
        return self._heap[0][0] if self._heap else None

    @property
    def in_flight(self) -> int:
        return len(self._heap)

    def stats(self) -> dict:
        return {
            "submitted": self.submitted,
            "delivered": self.delivered,
            "dropped_loss": self.dropped_loss,
            "dropped_queue": self.dropped_queue,
            "duplicated": self.duplicated,
            "in_flight": self.in_flight,
        }


def parse_profile(text: str) -> ImpairmentProfile:
    """Parses the flat key/value profile format.

    One `key = value` pair per line; `#` starts a comment.  Keys match
    the ImpairmentProfile fields; unknown keys are rejected.
    """
    fields: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key = key.strip()
        value = value.strip()
        try:
            if key == "jitter_model":
                fields[key] = value
            elif key in ("seed", "queue_capacity"):
                fields[key] = int(value)
            elif key in ("base_delay", "jitter_param", "loss_prob", "dup_prob",
                         "rate_limit"):
                fields[key] = float(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return ImpairmentProfile(**fields)


def load_profile(path) -> ImpairmentProfile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_profile(fh.read())
