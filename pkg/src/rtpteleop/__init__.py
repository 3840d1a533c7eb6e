"""Teleoperation over RTP: wire codecs, session statistics, playout
buffering, a deterministic impairment channel, a protocol-comparison
simulator, and a simulated mobile robot driven through it all."""

__version__ = "0.1.0"
