"""Video source/sink: raw grayscale frame transport with loss concealment.

Frames are 8-bit grayscale PGM (P5) files.  The transmit side concatenates
per-frame records (8-byte header: frame index u32 BE, byte length u32 BE,
then the raster) into one stream and slices it into fixed-size payloads;
the receive side rebuilds frames, freeze-frame-concealing byte ranges that
arrived in lost or corrupted packets, and scores PSNR against the source.
An opaque mode pushes an arbitrary byte blob through the same machinery as
a single record.
"""

import math
import os
import struct
from dataclasses import dataclass, field

import numpy as np

RECORD_HEADER_LEN = 8
CONCEAL_FILL = 128  # mid-gray used before any frame has been delivered
MIN_PAYLOAD = 64
MAX_PAYLOAD = 8192


@dataclass(frozen=True)
class VideoFrame:
    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("frame dimensions must be positive")
        if len(self.pixels) != self.width * self.height:
            raise ValueError(
                f"pixel count {len(self.pixels)} != {self.width}x{self.height}"
            )


@dataclass
class TransportMetrics:
    bits_sent: int = 0
    bit_errors_pre_fec: int = 0
    bit_errors_post_fec: int = 0
    packets_sent: int = 0
    packets_lost: int = 0
    frames_delivered: int = 0
    frames_concealed: int = 0
    psnr_per_frame: list = field(default_factory=list)


def _read_pgm_header(data: bytes, name: str):
    """Parse a P5 header, tolerating comments; returns (w, h, raster offset)."""
    if data[:2] != b"P5":
        raise ValueError(f"{name}: not a binary PGM (P5) file")
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(data):
            raise ValueError(f"{name}: truncated PGM header")
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        elif c.isdigit():
            start = pos
            while pos < len(data) and data[pos : pos + 1].isdigit():
                pos += 1
            fields.append(int(data[start:pos]))
        else:
            raise ValueError(f"{name}: unexpected byte {c!r} in PGM header")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise ValueError(f"{name}: missing whitespace before PGM raster")
    width, height, maxval = fields
    if maxval != 255:
        raise ValueError(f"{name}: only maxval 255 supported, got {maxval}")
    return width, height, pos + 1


def read_pgm(path) -> VideoFrame:
    with open(path, "rb") as fh:
        data = fh.read()
    name = os.path.basename(str(path))
    width, height, offset = _read_pgm_header(data, name)
    raster = data[offset : offset + width * height]
    if len(raster) != width * height:
        raise ValueError(f"{name}: raster has {len(raster)} bytes, expected {width * height}")
    return VideoFrame(width=width, height=height, pixels=raster)


def write_pgm(path, frame: VideoFrame) -> None:
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (frame.width, frame.height))
        fh.write(frame.pixels)


def load_frame_sequence(path) -> list[VideoFrame]:
    """Load all .pgm files under `path` in lexicographic order."""
    names = sorted(n for n in os.listdir(path) if n.lower().endswith(".pgm"))
    if not names:
        raise ValueError(f"no frames: no .pgm files in {path}")
    frames = [read_pgm(os.path.join(path, n)) for n in names]
    w, h = frames[0].width, frames[0].height
    for name, f in zip(names, frames):
        if (f.width, f.height) != (w, h):
            raise ValueError(
                f"{name}: dimension mismatch {f.width}x{f.height}, sequence is {w}x{h}"
            )
    return frames


def save_frame_sequence(path, frames) -> None:
    os.makedirs(path, exist_ok=True)
    for i, f in enumerate(frames):
        write_pgm(os.path.join(path, f"frame_{i:06d}.pgm"), f)


def make_gradient_frames(count: int, width: int, height: int) -> list[VideoFrame]:
    """Deterministic synthetic source: a diagonal gradient drifting per frame."""
    x = np.arange(width, dtype=np.uint16)
    y = np.arange(height, dtype=np.uint16)[:, None]
    frames = []
    for k in range(count):
        img = ((x + 2 * y + 5 * k) % 256).astype(np.uint8)
        frames.append(VideoFrame(width=width, height=height, pixels=img.tobytes()))
    return frames


def build_stream(frames) -> bytes:
    """Concatenate per-frame records: [index u32 BE][length u32 BE][raster]."""
    parts = []
    for i, f in enumerate(frames):
        parts.append(struct.pack(">II", i, len(f.pixels)))
        parts.append(f.pixels)
    return b"".join(parts)


def build_opaque_stream(data: bytes) -> bytes:
    """Wrap an opaque blob as a single record."""
    return struct.pack(">II", 0, len(data)) + bytes(data)


def segment(stream: bytes, payload_size: int) -> list[bytes]:
    """Slice a stream into payload_size chunks (last chunk short)."""
    if not MIN_PAYLOAD <= payload_size <= MAX_PAYLOAD:
        raise ValueError(f"payload_size must be in [{MIN_PAYLOAD}, {MAX_PAYLOAD}]")
    return [stream[i : i + payload_size] for i in range(0, len(stream), payload_size)]


def psnr(reference: VideoFrame, received: VideoFrame) -> float:
    """Peak signal-to-noise ratio in dB; +inf when identical."""
    if (reference.width, reference.height) != (received.width, received.height):
        raise ValueError("psnr requires equal frame dimensions")
    a = np.frombuffer(reference.pixels, dtype=np.uint8).astype(np.float64)
    b = np.frombuffer(received.pixels, dtype=np.uint8).astype(np.float64)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)


class Reassembler:
    """Streaming receive-side frame rebuilder with freeze-frame concealment.

    Packets are fed strictly in stream order; a frame is finalized as soon
    as the stream position passes its record.  Byte ranges covered by lost
    packets are filled from the co-located bytes of the last fully
    delivered frame (mid-gray before any frame has been fully delivered).
    Total: every source frame produces exactly one output frame.
    """

    def __init__(self, frame_sizes, width: int, height: int, payload_size: int):
        self.width = width
        self.height = height
        self.payload_size = payload_size
        self.frame_sizes = list(frame_sizes)
        # pixel-byte range of each frame within the stream
        self.ranges = []
        off = 0
        for size in self.frame_sizes:
            off += RECORD_HEADER_LEN
            self.ranges.append((off, off + size))
            off += size
        self.stream_len = off
        self._buf = bytearray(self.stream_len)
        self._lost = np.zeros(self.stream_len, dtype=bool)
        self._pos = 0  # bytes of stream fed so far
        self._next_frame = 0
        self._reference: bytes | None = None  # last fully delivered raster
        self.frames: list[VideoFrame] = []
        self.concealed_flags: list[bool] = []
        self.metrics = TransportMetrics()

    def feed(self, payload: bytes | None) -> list[tuple[int, VideoFrame, bool]]:
        """Feed the next packet (None = lost); returns frames finalized now."""
        start = self._pos
        if payload is None:
            end = min(start + self.payload_size, self.stream_len)
            self._lost[start:end] = True
            self.metrics.packets_lost += 1
        else:
            end = start + len(payload)
            if end > self.stream_len:
                raise ValueError("packet overruns the expected stream length")
            self._buf[start:end] = payload
        self.metrics.packets_sent += 1
        self._pos = end
        return self._finalize_ready()

    def finish(self) -> list[tuple[int, VideoFrame, bool]]:
        """Mark everything not yet received as lost and finalize the rest."""
        if self._pos < self.stream_len:
            self._lost[self._pos :] = True
            self._pos = self.stream_len
        return self._finalize_ready()

    def _finalize_ready(self):
        done = []
        while self._next_frame < len(self.ranges):
            lo, hi = self.ranges[self._next_frame]
            if self._pos < hi:
                break
            done.append(self._finalize_frame(self._next_frame, lo, hi))
            self._next_frame += 1
        return done

    def _finalize_frame(self, index: int, lo: int, hi: int):
        raster = np.frombuffer(bytes(self._buf[lo:hi]), dtype=np.uint8).copy()
        lost = self._lost[lo:hi]
        concealed = bool(lost.any())
        if concealed:
            if self._reference is None:
                fill = np.full(hi - lo, CONCEAL_FILL, dtype=np.uint8)
            else:
                fill = np.frombuffer(self._reference, dtype=np.uint8)
            raster[lost] = fill[lost]
            self.metrics.frames_concealed += 1
        else:
            self.metrics.frames_delivered += 1
        frame = VideoFrame(width=self.width, height=self.height, pixels=raster.tobytes())
        if not concealed:
            self._reference = frame.pixels
        self.frames.append(frame)
        self.concealed_flags.append(concealed)
        return index, frame, concealed


def reassemble(
    received, frame_sizes, width: int, height: int, payload_size: int
) -> tuple[list[VideoFrame], TransportMetrics]:
    """Batch reassembly: `received` is the in-order packet list, None = lost."""
    asm = Reassembler(frame_sizes, width, height, payload_size)
    for payload in received:
        asm.feed(payload)
    asm.finish()
    return asm.frames, asm.metrics


class OpaqueReassembler:
    """Receive side for opaque byte streams: lost ranges become fill bytes."""

    def __init__(self, total_len: int, payload_size: int):
        self.stream_len = RECORD_HEADER_LEN + total_len
        self.payload_size = payload_size
        self._buf = bytearray(self.stream_len)
        self._lost = np.zeros(self.stream_len, dtype=bool)
        self._pos = 0
        self.metrics = TransportMetrics()

    def feed(self, payload: bytes | None) -> None:
        start = self._pos
        if payload is None:
            end = min(start + self.payload_size, self.stream_len)
            self._lost[start:end] = True
            self.metrics.packets_lost += 1
        else:
            end = start + len(payload)
            if end > self.stream_len:
                raise ValueError("packet overruns the expected stream length")
            self._buf[start:end] = payload
        self.metrics.packets_sent += 1
        self._pos = end

    def finish(self) -> bytes:
        if self._pos < self.stream_len:
            self._lost[self._pos :] = True
            self._pos = self.stream_len
        data = np.frombuffer(bytes(self._buf), dtype=np.uint8).copy()
        data[self._lost] = CONCEAL_FILL
        return data.tobytes()[RECORD_HEADER_LEN:]
