"""
Anatomy of the packets on the wire
==================================

Builds one command packet and one compound control report by hand,
prints every field next to its bytes, and round-trips both through
the codecs.
"""

from rtpteleop.teleop import (CMD_VELOCITY, CommandPayload, PT_COMMAND,
                              encode_command)
from rtpteleop.wire import (ReceiverReport, ReportBlock, RtpPacket,
                            SDES_CNAME, SenderInfo, SenderReport,
                            SourceDescription, decode_rtcp_compound,
                            decode_rtp, encode_rtcp_compound, encode_rtp)

# A media packet is a fixed 12 byte header followed by the payload.
# Here the payload is a drive command: forward 250 mm/s, turn 100 mrad/s.
cmd = CommandPayload(CMD_VELOCITY, 250, 100)
pkt = RtpPacket(payload_type=PT_COMMAND, sequence=7, timestamp=120,
                ssrc=0x44524956, payload=encode_command(cmd))
wire = encode_rtp(pkt)

print("command packet,", len(wire), "bytes on the wire")
print("  header   ", wire[:12].hex())
print("  payload  ", wire[12:].hex())
print("  version=2 pt=%d seq=%d ts=%d ssrc=%08x"
      % (pkt.payload_type, pkt.sequence, pkt.timestamp, pkt.ssrc))

back = decode_rtp(wire)
print("  decode round-trip ok:", back == pkt)
print()

# Control traffic travels as compound reports on the next port up.
# A sender report carries the wall-clock anchor and send counters; a
# receiver report mirrors back loss, highest sequence and jitter.
sr = SenderReport(
    ssrc=0x54454C45,
    info=SenderInfo(ntp_seconds=3_900_000_000, ntp_fraction=0x80000000,
                    rtp_timestamp=120, packet_count=8, octet_count=96))
rr = ReceiverReport(
    ssrc=0x44524956,
    reports=[ReportBlock(source_ssrc=0x54454C45, fraction_lost=5,
                         cumulative_lost=2, extended_highest_seq=7,
                         interarrival_jitter=3, last_sr=0x1234,
                         delay_since_last_sr=0x20000)])
sdes = SourceDescription(ssrc=0x54454C45,
                         items=[(SDES_CNAME, "telemetry@robot")])

blob = encode_rtcp_compound([sr, rr, sdes])
print("compound control report,", len(blob), "bytes")
for item in decode_rtcp_compound(blob):
    print("  ", type(item).__name__, "ssrc=%08x" % item.ssrc)
print("  decode round-trip ok:",
      decode_rtcp_compound(blob) == [sr, rr, sdes])
