"""RTP and RTCP wire codecs.

RTP data packets use the 12-byte fixed header below (all multi-byte
fields big-endian), optionally followed by CSRC identifiers::

     0                   1                   2                   3
     0 1 2 3 4 5 6 7 8 9 0 1 2 3 4 5 6 7 8 9 0 1 2 3 4 5 6 7 8 9 0 1
    +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
    |V=2|P|X|  CC   |M|     PT      |        sequence number        |
    +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
    |                           timestamp                           |
    +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
    |           synchronization source (SSRC) identifier            |
    +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+
    |            contributing source (CSRC) identifiers             |
    +-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+-+

RTCP control packets (SR=200, RR=201, SDES=202, BYE=203) share a common
4-byte header carrying a 5-bit count, the packet type, and a length in
32-bit words minus one.  A compound packet is a plain concatenation of
individually valid packets and must begin with an SR or RR.

Header extensions and padding are parsed (and skipped/stripped) but never
generated; SDES emits CNAME only.  Unknown RTCP packet types are skipped
with a warning so compound parsing can continue by the length field.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

RTP_VERSION = 2
RTP_HEADER_LEN = 12

# RTCP packet types
PT_SR = 200
PT_RR = 201
PT_SDES = 202
PT_BYE = 203

# SDES item types (only CNAME is ever generated)
SDES_CNAME = 1


class WireError(ValueError):
    """Base class for encode/decode failures."""


class TruncatedPacket(WireError):
    pass


class BadVersion(WireError):
    pass


class BadPadding(WireError):
    pass


class InvalidField(WireError):
    pass


class BadCompoundOrder(WireError):
    pass


@dataclass
class RtpPacket:
    payload_type: int
    sequence: int
    timestamp: int
    ssrc: int
    payload: bytes = b""
    marker: bool = False
    padding: bool = False
    extension: bool = False
    csrc_list: tuple[int, ...] = ()
    version: int = RTP_VERSION

    @property
    def csrc_count(self) -> int:
        return len(self.csrc_list)


@dataclass
class ReportBlock:
    source_ssrc: int
    fraction_lost: int = 0
    cumulative_lost: int = 0
    extended_highest_seq: int = 0
    interarrival_jitter: int = 0
    last_sr: int = 0
    delay_since_last_sr: int = 0


@dataclass
class SenderInfo:
    ntp_seconds: int
    ntp_fraction: int
    rtp_timestamp: int
    packet_count: int
    octet_count: int


@dataclass
class SenderReport:
    ssrc: int
    info: SenderInfo
    reports: list[ReportBlock] = field(default_factory=list)


@dataclass
class ReceiverReport:
    ssrc: int
    reports: list[ReportBlock] = field(default_factory=list)


@dataclass
class SourceDescription:
    ssrc: int
    items: list[tuple[int, str]] = field(default_factory=list)


@dataclass
class Bye:
    ssrc: int
    reason: str = ""


RtcpPacket = SenderReport | ReceiverReport | SourceDescription | Bye


def _check_uint(value: int, bits: int, name: str) -> None:
    if not 0 <= value < (1 << bits):
        raise InvalidField(f"{name} out of range for {bits}-bit field: {value}")


def encode_rtp(pkt: RtpPacket) -> bytes:
    """Encode an RTP data packet: fixed header, CSRCs, then payload."""
    if pkt.version != RTP_VERSION:
        raise InvalidField(f"version must be {RTP_VERSION}, got {pkt.version}")
    if pkt.padding or pkt.extension:
        raise InvalidField("padding/extension generation is unsupported")
    if pkt.csrc_count > 15:
        raise InvalidField(f"csrc_count > 15: {pkt.csrc_count}")
    _check_uint(pkt.payload_type, 7, "payload_type")
    _check_uint(pkt.sequence, 16, "sequence")
    _check_uint(pkt.timestamp, 32, "timestamp")
    _check_uint(pkt.ssrc, 32, "ssrc")
    b0 = (pkt.version << 6) | (int(pkt.padding) << 5) | (int(pkt.extension) << 4) | pkt.csrc_count
    b1 = (int(pkt.marker) << 7) | pkt.payload_type
    head = struct.pack("!BBHII", b0, b1, pkt.sequence, pkt.timestamp, pkt.ssrc)
    for csrc in pkt.csrc_list:
        _check_uint(csrc, 32, "csrc")
        head += struct.pack("!I", csrc)
    return head + pkt.payload


def decode_rtp(buf: bytes) -> RtpPacket:
    """Parse an RTP data packet.

    Padding is stripped (the flag stays set on the result) and a header
    extension, if present, is skipped.  Raises TruncatedPacket, BadVersion
    or BadPadding; never reads past the end of ``buf``.
    """
    if len(buf) < RTP_HEADER_LEN:
        raise TruncatedPacket(f"need {RTP_HEADER_LEN} bytes, got {len(buf)}")
    b0, b1, sequence, timestamp, ssrc = struct.unpack("!BBHII", buf[:RTP_HEADER_LEN])
    version = b0 >> 6
    if version != RTP_VERSION:
        raise BadVersion(f"unsupported RTP version {version}")
    padding = bool(b0 & 0x20)
    extension = bool(b0 & 0x10)
    cc = b0 & 0x0F
    marker = bool(b1 & 0x80)
    payload_type = b1 & 0x7F

    offset = RTP_HEADER_LEN + 4 * cc
    if len(buf) < offset:
        raise TruncatedPacket(f"header with {cc} CSRCs needs {offset} bytes, got {len(buf)}")
    csrc_list = tuple(struct.unpack(f"!{cc}I", buf[RTP_HEADER_LEN:offset])) if cc else ()

    if extension:
        if len(buf) < offset + 4:
            raise TruncatedPacket("truncated extension header")
        (ext_words,) = struct.unpack("!H", buf[offset + 2:offset + 4])
        offset += 4 + 4 * ext_words
        if len(buf) < offset:
            raise TruncatedPacket("extension overruns packet")

    payload = buf[offset:]
    if padding:
        if not payload:
            raise BadPadding("padding flag set but no payload bytes")
        pad = payload[-1]
        if pad < 1 or pad > len(payload):
            raise BadPadding(f"pad count {pad} exceeds payload of {len(payload)} bytes")
        payload = payload[:-pad]

    return RtpPacket(
        payload_type=payload_type,
        sequence=sequence,
        timestamp=timestamp,
        ssrc=ssrc,
        payload=payload,
        marker=marker,
        padding=padding,
        extension=extension,
        csrc_list=csrc_list,
    )


def _rtcp_header(count: int, packet_type: int, body_len: int) -> bytes:
    # body_len excludes this header; total must be a whole number of words
    total = 4 + body_len
    assert total % 4 == 0
    return struct.pack("!BBH", (RTP_VERSION << 6) | count, packet_type, total // 4 - 1)


def _encode_report_block(rb: ReportBlock) -> bytes:
    _check_uint(rb.source_ssrc, 32, "source_ssrc")
    _check_uint(rb.fraction_lost, 8, "fraction_lost")
    if not -(1 << 23) <= rb.cumulative_lost < (1 << 23):
        raise InvalidField(f"cumulative_lost outside signed 24-bit range: {rb.cumulative_lost}")
    _check_uint(rb.extended_highest_seq, 32, "extended_highest_seq")
    _check_uint(rb.interarrival_jitter, 32, "interarrival_jitter")
    _check_uint(rb.last_sr, 32, "last_sr")
    _check_uint(rb.delay_since_last_sr, 32, "delay_since_last_sr")
    word1 = (rb.fraction_lost << 24) | (rb.cumulative_lost & 0xFFFFFF)
    return struct.pack(
        "!IIIIII",
        rb.source_ssrc,
        word1,
        rb.extended_highest_seq,
        rb.interarrival_jitter,
        rb.last_sr,
        rb.delay_since_last_sr,
    )


def _decode_report_block(buf: bytes) -> ReportBlock:
    ssrc, word1, ext_seq, jitter, lsr, dlsr = struct.unpack("!IIIIII", buf)
    lost = word1 & 0xFFFFFF
    if lost & 0x800000:
        lost -= 1 << 24
    return ReportBlock(
        source_ssrc=ssrc,
        fraction_lost=word1 >> 24,
        cumulative_lost=lost,
        extended_highest_seq=ext_seq,
        interarrival_jitter=jitter,
        last_sr=lsr,
        delay_since_last_sr=dlsr,
    )


def encode_rtcp(pkt: RtcpPacket) -> bytes:
    """Encode a single RTCP packet, padded to a 32-bit word boundary."""
    if isinstance(pkt, SenderReport):
        _check_uint(pkt.ssrc, 32, "ssrc")
        if len(pkt.reports) > 31:
            raise InvalidField("more than 31 report blocks")
        info = pkt.info
        body = struct.pack(
            "!IIIIII",
            pkt.ssrc,
            info.ntp_seconds & 0xFFFFFFFF,
            info.ntp_fraction & 0xFFFFFFFF,
            info.rtp_timestamp & 0xFFFFFFFF,
            info.packet_count & 0xFFFFFFFF,
            info.octet_count & 0xFFFFFFFF,
        )
        body += b"".join(_encode_report_block(rb) for rb in pkt.reports)
        return _rtcp_header(len(pkt.reports), PT_SR, len(body)) + body
    if isinstance(pkt, ReceiverReport):
        _check_uint(pkt.ssrc, 32, "ssrc")
        if len(pkt.reports) > 31:
            raise InvalidField("more than 31 report blocks")
        body = struct.pack("!I", pkt.ssrc)
        body += b"".join(_encode_report_block(rb) for rb in pkt.reports)
        return _rtcp_header(len(pkt.reports), PT_RR, len(body)) + body
    if isinstance(pkt, SourceDescription):
        _check_uint(pkt.ssrc, 32, "ssrc")
        chunk = struct.pack("!I", pkt.ssrc)
        for item_type, text in pkt.items:
            raw = text.encode()
            _check_uint(item_type, 8, "sdes item type")
            if len(raw) > 255:
                raise InvalidField("SDES item text longer than 255 bytes")
            chunk += struct.pack("!BB", item_type, len(raw)) + raw
        chunk += b"\x00"  # item list terminator
        if len(chunk) % 4:
            chunk += b"\x00" * (4 - len(chunk) % 4)
        return _rtcp_header(1, PT_SDES, len(chunk)) + chunk
    if isinstance(pkt, Bye):
        _check_uint(pkt.ssrc, 32, "ssrc")
        body = struct.pack("!I", pkt.ssrc)
        if pkt.reason:
            raw = pkt.reason.encode()
            if len(raw) > 255:
                raise InvalidField("BYE reason longer than 255 bytes")
            body += struct.pack("!B", len(raw)) + raw
            if len(body) % 4:
                body += b"\x00" * (4 - len(body) % 4)
        return _rtcp_header(1, PT_BYE, len(body)) + body
    raise InvalidField(f"unknown RTCP packet object: {pkt!r}")


def encode_rtcp_compound(pkts: list[RtcpPacket]) -> bytes:
    """Concatenate RTCP packets; the compound must start with SR or RR."""
    if not pkts:
        raise InvalidField("empty compound")
    if not isinstance(pkts[0], (SenderReport, ReceiverReport)):
        raise BadCompoundOrder("compound packet must begin with SR or RR")
    return b"".join(encode_rtcp(p) for p in pkts)


def _decode_one_rtcp(packet_type: int, count: int, body: bytes) -> RtcpPacket | None:
    if packet_type == PT_SR:
        if len(body) < 24 + 24 * count:
            raise TruncatedPacket("SR body too short for report count")
        ssrc, ntp_s, ntp_f, rtp_ts, pkts, octets = struct.unpack("!IIIIII", body[:24])
        reports = [
            _decode_report_block(body[24 + 24 * i:48 + 24 * i]) for i in range(count)
        ]
        return SenderReport(ssrc, SenderInfo(ntp_s, ntp_f, rtp_ts, pkts, octets), reports)
    if packet_type == PT_RR:
        if len(body) < 4 + 24 * count:
            raise TruncatedPacket("RR body too short for report count")
        (ssrc,) = struct.unpack("!I", body[:4])
        reports = [
            _decode_report_block(body[4 + 24 * i:28 + 24 * i]) for i in range(count)
        ]
        return ReceiverReport(ssrc, reports)
    if packet_type == PT_SDES:
        if count < 1 or len(body) < 4:
            raise TruncatedPacket("SDES without a chunk")
        # Only the first chunk's CNAME items are retained; other item
        # types and chunks are membership noise we do not need.
        (ssrc,) = struct.unpack("!I", body[:4])
        items: list[tuple[int, str]] = []
        pos = 4
        while pos < len(body):
            item_type = body[pos]
            if item_type == 0:
                break
            if pos + 2 > len(body):
                raise TruncatedPacket("SDES item header overruns chunk")
            length = body[pos + 1]
            if pos + 2 + length > len(body):
                raise TruncatedPacket("SDES item text overruns chunk")
            if item_type == SDES_CNAME:
                items.append((item_type, body[pos + 2:pos + 2 + length].decode(errors="replace")))
            pos += 2 + length
        return SourceDescription(ssrc, items)
    if packet_type == PT_BYE:
        if count < 1 or len(body) < 4:
            raise TruncatedPacket("BYE without a source")
        (ssrc,) = struct.unpack("!I", body[:4])
        reason = ""
        pos = 4 * count
        if pos < len(body):
            rlen = body[pos]
            if pos + 1 + rlen > len(body):
                raise TruncatedPacket("BYE reason overruns packet")
            reason = body[pos + 1:pos + 1 + rlen].decode(errors="replace")
        return Bye(ssrc, reason)
    log.warning("skipping unknown RTCP packet type %d", packet_type)
    return None


def decode_rtcp_compound(buf: bytes) -> list[RtcpPacket]:
    """Parse sequential RTCP packets by their length fields.

    Unknown packet types are skipped (logged), preserving forward
    compatibility; truncation raises TruncatedPacket.
    """
    if len(buf) % 4:
        raise TruncatedPacket(f"compound length {len(buf)} not a multiple of 4")
    out: list[RtcpPacket] = []
    pos = 0
    while pos < len(buf):
        if pos + 4 > len(buf):
            raise TruncatedPacket("dangling RTCP header")
        b0, packet_type, length_words = struct.unpack("!BBH", buf[pos:pos + 4])
        if b0 >> 6 != RTP_VERSION:
            raise BadVersion(f"unsupported RTCP version {b0 >> 6}")
        count = b0 & 0x1F
        total = 4 * (length_words + 1)
        if pos + total > len(buf):
            raise TruncatedPacket("declared RTCP length overruns buffer")
        body = buf[pos + 4:pos + total]
        pkt = _decode_one_rtcp(packet_type, count, body)
        if pkt is not None:
            out.append(pkt)
        pos += total
    return out
