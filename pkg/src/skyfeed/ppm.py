"""Binary PPM (P6, maxval 255) reading and writing."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .frames import RgbImage

_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*(\S+)")


class PpmError(ValueError):
    pass


def encode_ppm(image: RgbImage) -> bytes:
    return b"P6\n%d %d\n255\n" % (image.width, image.height) + image.rgb().tobytes()


def decode_ppm(data: bytes) -> RgbImage:
    pos = 0
    fields = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if not m:
            raise PpmError("truncated PPM header")
        fields.append(m.group(1))
        pos = m.end()
    magic, w, h, maxval = fields
    if magic != b"P6":
        raise PpmError(f"not a binary PPM (magic {magic!r})")
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise PpmError("non-numeric PPM header field") from None
    if maxval != 255:
        raise PpmError(f"only maxval 255 is supported, got {maxval}")
    pos += 1  # single whitespace byte before the raster
    raster = data[pos:pos + w * h * 3]
    if len(raster) != w * h * 3:
        raise PpmError(f"raster has {len(raster)} bytes, expected {w * h * 3}")
    return RgbImage.from_rgb(np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3))


def write_ppm(path, image: RgbImage) -> None:
    Path(path).write_bytes(encode_ppm(image))


def read_ppm(path) -> RgbImage:
    return decode_ppm(Path(path).read_bytes())
