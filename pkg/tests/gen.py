"""Seeded random generators shared by round-trip and fuzz tests."""

import random

from rtpteleop.wire import (
    Bye,
    ReceiverReport,
    ReportBlock,
    RtpPacket,
    SenderInfo,
    SenderReport,
    SourceDescription,
)


def random_rtp_packet(rng: random.Random) -> RtpPacket:
    cc = rng.choice((0, 0, 0, 1, 2, 15))
    return RtpPacket(
        payload_type=rng.randrange(128),
        sequence=rng.randrange(1 << 16),
        timestamp=rng.randrange(1 << 32),
        ssrc=rng.randrange(1 << 32),
        payload=rng.randbytes(rng.randrange(0, 64)),
        marker=rng.random() < 0.5,
        csrc_list=tuple(rng.randrange(1 << 32) for _ in range(cc)),
    )


def random_report_block(rng: random.Random) -> ReportBlock:
    return ReportBlock(
        source_ssrc=rng.randrange(1 << 32),
        fraction_lost=rng.randrange(256),
        cumulative_lost=rng.randrange(-(1 << 23), 1 << 23),
        extended_highest_seq=rng.randrange(1 << 32),
        interarrival_jitter=rng.randrange(1 << 32),
        last_sr=rng.randrange(1 << 32),
        delay_since_last_sr=rng.randrange(1 << 32),
    )


def random_rtcp_compound(rng: random.Random) -> list:
    blocks = [random_report_block(rng) for _ in range(rng.randrange(3))]
    if rng.random() < 0.5:
        first = SenderReport(
            ssrc=rng.randrange(1 << 32),
            info=SenderInfo(*(rng.randrange(1 << 32) for _ in range(5))),
            reports=blocks,
        )
    else:
        first = ReceiverReport(ssrc=rng.randrange(1 << 32), reports=blocks)
    pkts = [first]
    if rng.random() < 0.7:
        cname = "".join(rng.choice("abcdefgh0123456789.@-") for _ in range(rng.randrange(1, 30)))
        pkts.append(SourceDescription(rng.randrange(1 << 32), [(1, cname)]))
    if rng.random() < 0.3:
        pkts.append(Bye(rng.randrange(1 << 32), reason=rng.choice(("", "done", "leaving now"))))
    return pkts
