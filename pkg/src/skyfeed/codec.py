"""Lossless keyframe/delta video codec built on byte run-length encoding.

Payload format: a flat sequence of ``(count, value)`` byte pairs with
``1 <= count <= 255``. A keyframe payload encodes the concatenated planes; a
delta payload encodes ``frame - reference (mod 256)`` byte by byte.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import Layout, Resolution, YuvFrame

MAX_RUN = 255


class CodecError(ValueError):
    pass


class MalformedStreamError(CodecError):
    """RLE stream of odd length or containing a zero count."""


class MissingReferenceError(CodecError):
    """Delta frame decoded without the previous reconstruction (stream joined mid-GOP)."""


class PayloadLengthError(CodecError):
    """RLE payload expands to the wrong number of bytes for the frame geometry."""


class ReferenceMismatchError(CodecError):
    pass


def rle_encode(data) -> bytes:
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    if buf.size == 0:
        return b""
    # run starts
    starts = np.flatnonzero(np.concatenate(([True], buf[1:] != buf[:-1])))
    lengths = np.diff(np.append(starts, buf.size))
    values = buf[starts]
    pairs_per_run = (lengths + MAX_RUN - 1) // MAX_RUN
    counts = np.full(int(pairs_per_run.sum()), MAX_RUN, dtype=np.uint8)
    last = np.cumsum(pairs_per_run) - 1
    counts[last] = lengths - (pairs_per_run - 1) * MAX_RUN
    out = np.empty(2 * counts.size, dtype=np.uint8)
    out[0::2] = counts
    out[1::2] = np.repeat(values, pairs_per_run)
    return out.tobytes()


def rle_decode(data) -> bytes:
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    if buf.size % 2:
        raise MalformedStreamError(f"RLE stream has odd length {buf.size}")
    counts = buf[0::2]
    if counts.size and not counts.all():
        raise MalformedStreamError(f"zero count at pair {int(np.argmin(counts))}")
    return np.repeat(buf[1::2], counts).tobytes()


def rle_decoded_size(data) -> int:
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    return int(buf[0::2].sum(dtype=np.int64))


@dataclass(frozen=True)
class EncodedFrame:
    keyframe: bool
    payload: bytes
    resolution: Resolution
    seq: int = 0
    pts_micros: int = 0
    layout: Layout = Layout.PLANAR_420


def encode_frame(frame: YuvFrame, reference: YuvFrame | None = None) -> EncodedFrame:
    raw = np.frombuffer(frame.to_bytes(), dtype=np.uint8)
    if reference is None:
        body = raw
    else:
        if reference.resolution != frame.resolution or reference.layout is not frame.layout:
            raise ReferenceMismatchError(
                f"reference {reference.resolution}/{reference.layout.value} does not match "
                f"frame {frame.resolution}/{frame.layout.value}"
            )
        body = raw - np.frombuffer(reference.to_bytes(), dtype=np.uint8)  # wraps mod 256
    return EncodedFrame(
        keyframe=reference is None,
        payload=rle_encode(body.tobytes()),
        resolution=frame.resolution,
        seq=frame.seq,
        pts_micros=frame.pts_micros,
        layout=frame.layout,
    )


def decode_frame(enc: EncodedFrame, reference: YuvFrame | None = None) -> YuvFrame:
    expected = enc.resolution.pixels * 3 // 2
    body = rle_decode(enc.payload)
    if len(body) != expected:
        raise PayloadLengthError(f"payload expands to {len(body)} bytes, expected {expected}")
    raw = np.frombuffer(body, dtype=np.uint8)
    if not enc.keyframe:
        if reference is None:
            raise MissingReferenceError(f"delta frame seq={enc.seq} has no reference frame")
        if reference.resolution != enc.resolution or reference.layout is not enc.layout:
            raise ReferenceMismatchError(
                f"reference {reference.resolution} does not match delta frame {enc.resolution}"
            )
        raw = raw + np.frombuffer(reference.to_bytes(), dtype=np.uint8)
    return YuvFrame.from_bytes(enc.resolution, enc.layout, raw.tobytes(),
                               seq=enc.seq, pts_micros=enc.pts_micros, keyframe=enc.keyframe)


class Encoder:
    """Per-session encoder; emits a keyframe every ``keyframe_interval`` frames.

    Holds the previous frame as its reference; drive it from one thread only.
    """

    def __init__(self, keyframe_interval: int = 30):
        if keyframe_interval < 1:
            raise ValueError("keyframe_interval must be >= 1")
        self.keyframe_interval = keyframe_interval
        self._reference: YuvFrame | None = None
        self._count = 0

    def encode(self, frame: YuvFrame, force_keyframe: bool = False) -> EncodedFrame:
        key = (force_keyframe or self._reference is None
               or self._count % self.keyframe_interval == 0
               or self._reference.resolution != frame.resolution
               or self._reference.layout is not frame.layout)
        enc = encode_frame(frame, None if key else self._reference)
        # lossless, so the decoder's reconstruction is the input itself
        self._reference = frame
        self._count += 1
        return enc


class Decoder:
    """Per-session decoder holding the last reconstruction."""

    def __init__(self):
        self._reference: YuvFrame | None = None

    def decode(self, enc: EncodedFrame) -> YuvFrame:
        frame = decode_frame(enc, None if enc.keyframe else self._reference)
        self._reference = frame
        return frame

    def reset(self) -> None:
        self._reference = None
