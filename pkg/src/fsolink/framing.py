"""CRC-protected, sequence-numbered transport frames.

Wire layout (big-endian integers, bit-exact across implementations):

    magic   4 bytes  ASCII "FSO1"
    version 1 byte   0x01
    flags   1 byte   bit0: 0 = opaque stream, 1 = raw video frames
    seq     4 bytes  u32
    len     2 bytes  u16 payload length (<= 8192)
    payload len bytes
    crc     4 bytes  u32, IEEE CRC-32 over every preceding byte
"""

import struct
from dataclasses import dataclass

from ._kernels import crc32_update

MAGIC = b"FSO1"
VERSION = 0x01
MAX_PAYLOAD = 8192
HEADER_LEN = 12
TRAILER_LEN = 4

FLAG_RAW_FRAMES = 0x01


class IntegrityError(ValueError):
    """Frame validation failure; `check` names the first failed check."""

    def __init__(self, check: str, message: str):
        super().__init__(message)
        self.check = check


def crc32(data) -> int:
    """IEEE CRC-32: reflected poly 0xEDB88320, init and final XOR 0xFFFFFFFF."""
    return crc32_update(data, 0xFFFFFFFF) ^ 0xFFFFFFFF


@dataclass(frozen=True)
class Frame:
    seq: int
    flags: int
    payload: bytes

    @property
    def raw_frames(self) -> bool:
        return bool(self.flags & FLAG_RAW_FRAMES)


def frame_pack(seq: int, flags: int, payload: bytes) -> bytes:
    if not 0 <= seq <= 0xFFFFFFFF:
        raise ValueError("seq must fit in u32")
    if not 0 <= flags <= 0xFF:
        raise ValueError("flags must fit in u8")
    if len(payload) > MAX_PAYLOAD:
        raise ValueError(f"payload exceeds {MAX_PAYLOAD} bytes")
    head = MAGIC + struct.pack(">BBIH", VERSION, flags, seq, len(payload)) + payload
    return head + struct.pack(">I", crc32(head))


def frame_unpack(buf: bytes) -> Frame:
    """Validate magic, version, length, CRC (in that order) and unpack."""
    if len(buf) < 4:
        raise IntegrityError("length", f"buffer too short for a frame ({len(buf)} bytes)")
    if buf[:4] != MAGIC:
        raise IntegrityError("magic", f"bad magic {buf[:4]!r}")
    if buf[4] != VERSION:
        raise IntegrityError("version", f"unsupported version {buf[4]}")
    if len(buf) < HEADER_LEN + TRAILER_LEN:
        raise IntegrityError("length", f"buffer too short for a frame ({len(buf)} bytes)")
    flags, seq, plen = struct.unpack(">BIH", buf[5:HEADER_LEN])
    if plen > MAX_PAYLOAD:
        raise IntegrityError("length", f"payload length {plen} exceeds {MAX_PAYLOAD}")
    if len(buf) != HEADER_LEN + plen + TRAILER_LEN:
        raise IntegrityError(
            "length", f"buffer is {len(buf)} bytes, expected {HEADER_LEN + plen + TRAILER_LEN}"
        )
    body = buf[: HEADER_LEN + plen]
    (stated,) = struct.unpack(">I", buf[HEADER_LEN + plen :])
    actual = crc32(body)
    if stated != actual:
        raise IntegrityError("crc", f"crc mismatch: frame says {stated:#010x}, computed {actual:#010x}")
    return Frame(seq=seq, flags=flags, payload=bytes(buf[HEADER_LEN : HEADER_LEN + plen]))


def frame_wire_length(payload_len: int) -> int:
    """Total on-wire bytes for a payload of the given length."""
    return HEADER_LEN + payload_len + TRAILER_LEN
