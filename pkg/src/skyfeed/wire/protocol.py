"""Message framing for the feed protocol.

Every message is ``kind:u8 | length:u32 | payload | crc32:u32``, all big-endian,
with the CRC taken over everything before it. Payload layouts::

    HELLO      version:u8 (=1) | key: 24 ASCII bytes
    HELLO_ACK  status:u8 | name_len:u8 | name | fw_len:u8 | fw
    FRAME      seq:u32 | flags:u8 (bit0 keyframe) | pts_micros:u64 | width:u16 | height:u16 | codec payload
    BYE        (empty)
"""

from __future__ import annotations

import enum
import io
import struct
import zlib
from dataclasses import dataclass

from ..codec import EncodedFrame
from ..frames import Resolution

PROTOCOL_VERSION = 1
HEADER = struct.Struct(">BI")
CRC = struct.Struct(">I")
FRAME_HEADER = struct.Struct(">IBQHH")
FLAG_KEYFRAME = 0x01
# decode-side cap; a 640x480 worst-case RLE payload is under 1 MiB
DEFAULT_MAX_PAYLOAD = 64 * 1024 * 1024


class MessageKind(enum.IntEnum):
    HELLO = 0x01
    HELLO_ACK = 0x02
    FRAME = 0x03
    BYE = 0x04


class AckStatus(enum.IntEnum):
    ACCEPTED = 0
    DENIED = 1


class ProtocolError(Exception):
    pass


class UnknownKindError(ProtocolError):
    pass


class CrcMismatchError(ProtocolError):
    """Message failed its CRC check; the connection must be dropped."""


class TruncatedStreamError(ProtocolError):
    pass


class PayloadError(ProtocolError):
    """CRC was fine but the payload does not parse for its kind."""


def crc32(data: bytes) -> int:
    """CRC-32/ISO-HDLC (the zlib/PNG/Ethernet CRC)."""
    return zlib.crc32(data) & 0xFFFFFFFF


@dataclass(frozen=True)
class WireMessage:
    kind: MessageKind
    payload: bytes = b""


def encode_message(msg: WireMessage) -> bytes:
    if len(msg.payload) >= 2**32:
        raise ValueError("payload too large for a u32 length field")
    head = HEADER.pack(int(msg.kind), len(msg.payload)) + msg.payload
    return head + CRC.pack(crc32(head))


def _read_exact(stream, n: int, what: str) -> bytes:
    chunks = []
    remaining = n
    while remaining:
        chunk = stream.read(remaining)
        if not chunk:
            raise TruncatedStreamError(f"stream ended with {remaining} of {n} {what} bytes missing")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def decode_message(stream, max_payload: int = DEFAULT_MAX_PAYLOAD) -> WireMessage:
    """Read exactly one message from a binary stream (anything with ``read(n)``).

    Raises TruncatedStreamError if the stream ends first, including at a clean
    message boundary; callers that expect EOF should catch it.
    """
    if isinstance(stream, (bytes, bytearray, memoryview)):
        stream = io.BytesIO(stream)
    header = _read_exact(stream, HEADER.size, "header")
    kind_byte, length = HEADER.unpack(header)
    try:
        kind = MessageKind(kind_byte)
    except ValueError:
        raise UnknownKindError(f"unknown message kind 0x{kind_byte:02X}") from None
    if length > max_payload:
        raise ProtocolError(f"payload length {length} exceeds limit {max_payload}")
    payload = _read_exact(stream, length, "payload")
    (expected,) = CRC.unpack(_read_exact(stream, CRC.size, "crc"))
    actual = crc32(header + payload)
    if actual != expected:
        raise CrcMismatchError(f"crc mismatch on {kind.name}: got 0x{actual:08X}, trailer 0x{expected:08X}")
    return WireMessage(kind, payload)


# -- payload helpers ---------------------------------------------------------

def hello(key: str, version: int = PROTOCOL_VERSION) -> WireMessage:
    raw = key.encode("ascii", errors="replace")
    return WireMessage(MessageKind.HELLO, bytes([version]) + raw)


def parse_hello(msg: WireMessage) -> tuple[int, str]:
    if msg.kind is not MessageKind.HELLO or not msg.payload:
        raise PayloadError("not a HELLO payload")
    return msg.payload[0], msg.payload[1:].decode("ascii", errors="replace")


@dataclass(frozen=True)
class HelloAck:
    status: AckStatus
    product_name: str = ""
    firmware: str = ""

    def to_message(self) -> WireMessage:
        name = self.product_name.encode("utf-8")
        fw = self.firmware.encode("utf-8")
        if len(name) > 255 or len(fw) > 255:
            raise ValueError("product name and firmware must each be <= 255 UTF-8 bytes")
        payload = bytes([int(self.status), len(name)]) + name + bytes([len(fw)]) + fw
        return WireMessage(MessageKind.HELLO_ACK, payload)

    @classmethod
    def from_message(cls, msg: WireMessage) -> "HelloAck":
        p = msg.payload
        try:
            status = AckStatus(p[0])
            n = p[1]
            name = p[2:2 + n]
            m = p[2 + n]
            fw = p[3 + n:3 + n + m]
        except (IndexError, ValueError) as exc:
            raise PayloadError(f"malformed HELLO_ACK: {exc}") from None
        if len(name) != n or len(fw) != m or len(p) != 3 + n + m:
            raise PayloadError("HELLO_ACK length fields do not match payload")
        return cls(status, name.decode("utf-8"), fw.decode("utf-8"))


def frame_message(enc: EncodedFrame) -> WireMessage:
    flags = FLAG_KEYFRAME if enc.keyframe else 0
    head = FRAME_HEADER.pack(enc.seq, flags, enc.pts_micros,
                             enc.resolution.width, enc.resolution.height)
    return WireMessage(MessageKind.FRAME, head + enc.payload)


def parse_frame(msg: WireMessage) -> EncodedFrame:
    if msg.kind is not MessageKind.FRAME or len(msg.payload) < FRAME_HEADER.size:
        raise PayloadError("not a FRAME payload")
    seq, flags, pts, w, h = FRAME_HEADER.unpack_from(msg.payload)
    try:
        res = Resolution(w, h)
    except ValueError as exc:
        raise PayloadError(str(exc)) from None
    return EncodedFrame(keyframe=bool(flags & FLAG_KEYFRAME),
                        payload=msg.payload[FRAME_HEADER.size:],
                        resolution=res, seq=seq, pts_micros=pts)


BYE = WireMessage(MessageKind.BYE)
