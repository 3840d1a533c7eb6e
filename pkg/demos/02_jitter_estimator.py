"""
Watching the interarrival jitter estimator settle
=================================================

Feeds one receiver state two phases of traffic: a calm stretch where
packets arrive exactly on schedule, then a noisy stretch with random
queueing delay.  Prints the estimator every few packets so the 1/16
gain is visible as a gentle exponential chase.
"""

import random

from rtpteleop.session import SourceState

rng = random.Random(7)
state = SourceState(ssrc=0x0B5E, clock_rate=1000)

# Phase 1: a 50 Hz stream delivered with constant network delay.
# Transit time never changes, so the estimate stays at zero.
print("phase 1: constant 40 ms transit")
for seq in range(100):
    send = seq * 0.02
    ts = 20 * seq
    state.on_receive_data(seq, ts, send + 0.040)
    if seq % 25 == 24:
        print(f"  packet {seq + 1:3d}  jitter = {state.jitter:8.4f} ticks")

# Phase 2: the same stream through a queue that adds 0 to 30 ms of
# random delay.  The estimate climbs toward the mean absolute transit
# difference, one sixteenth of the error per packet.
print("phase 2: uniform 0..30 ms queueing noise")
for seq in range(100, 400):
    send = seq * 0.02
    ts = 20 * seq
    state.on_receive_data(seq, ts, send + 0.040 + rng.uniform(0.0, 0.030))
    if seq % 50 == 49:
        print(f"  packet {seq + 1:3d}  jitter = {state.jitter:8.4f} ticks")

# Phase 3: calm again; the noise drains at the same 1/16 rate.
print("phase 3: calm again, estimate decays geometrically")
for seq in range(400, 600):
    send = seq * 0.02
    ts = 20 * seq
    state.on_receive_data(seq, ts, send + 0.040)
    if seq % 50 == 49:
        print(f"  packet {seq + 1:3d}  jitter = {state.jitter:8.4f} ticks")

print()
print("validated:", state.validated,
      " highest seq:", state.max_seq,
      " final jitter: %.4f ticks" % state.jitter)
