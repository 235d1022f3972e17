"""Image value types shared by the codec, colorspace, pipeline and inference code."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class DimensionError(ValueError):
    """A plane or image buffer does not match its declared geometry."""


@dataclass(frozen=True, order=True)
class Resolution:
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DimensionError(f"resolution must be positive, got {self.width}x{self.height}")

    @property
    def pixels(self) -> int:
        return self.width * self.height

    def require_420(self) -> None:
        """Raise unless both sides are even and at least 2 (4:2:0 chroma needs 2x2 blocks)."""
        if self.width < 2 or self.height < 2 or self.width % 2 or self.height % 2:
            raise DimensionError(
                f"4:2:0 frames need even dimensions >= 2, got {self.width}x{self.height}"
            )

    @classmethod
    def parse(cls, text: str) -> "Resolution":
        w, sep, h = text.lower().partition("x")
        if not sep:
            raise ValueError(f"expected WxH, got {text!r}")
        return cls(int(w), int(h))

    def __str__(self):
        return f"{self.width}x{self.height}"


class Layout(enum.Enum):
    PLANAR_420 = "I420"       # Y, U, V
    SEMIPLANAR_420 = "NV21"   # Y, interleaved V/U


class Rotation(enum.IntEnum):
    DEG_0 = 0
    DEG_90 = 90
    DEG_180 = 180
    DEG_270 = 270


@dataclass(frozen=True)
class YuvFrame:
    """One 4:2:0 frame.

    ``chroma`` holds ``(u, v)`` for :attr:`Layout.PLANAR_420` and a single
    interleaved ``(vu,)`` plane for :attr:`Layout.SEMIPLANAR_420`.
    """

    resolution: Resolution
    layout: Layout
    y: bytes
    chroma: tuple[bytes, ...]
    seq: int = 0
    pts_micros: int = 0
    keyframe: bool = False

    def __post_init__(self):
        res = self.resolution
        res.require_420()
        if len(self.y) != res.pixels:
            raise DimensionError(f"y plane has {len(self.y)} bytes, expected {res.pixels}")
        quarter = res.pixels // 4
        if self.layout is Layout.PLANAR_420:
            names, sizes = ("u", "v"), (quarter, quarter)
        else:
            names, sizes = ("vu",), (2 * quarter,)
        if len(self.chroma) != len(names):
            raise DimensionError(
                f"{self.layout.value} expects {len(names)} chroma plane(s), got {len(self.chroma)}"
            )
        for name, plane, size in zip(names, self.chroma, sizes):
            if len(plane) != size:
                raise DimensionError(f"{name} plane has {len(plane)} bytes, expected {size}")
        if not 0 <= self.seq < 2**32:
            raise ValueError(f"seq out of u32 range: {self.seq}")

    @property
    def width(self) -> int:
        return self.resolution.width

    @property
    def height(self) -> int:
        return self.resolution.height

    def to_bytes(self) -> bytes:
        """Concatenated planes in storage order (1.5 bytes per pixel)."""
        return self.y + b"".join(self.chroma)

    def y_array(self) -> np.ndarray:
        return np.frombuffer(self.y, dtype=np.uint8).reshape(self.height, self.width)

    def uv_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """U and V as (h/2, w/2) arrays, whatever the layout."""
        shape = (self.height // 2, self.width // 2)
        if self.layout is Layout.PLANAR_420:
            u = np.frombuffer(self.chroma[0], dtype=np.uint8).reshape(shape)
            v = np.frombuffer(self.chroma[1], dtype=np.uint8).reshape(shape)
        else:
            vu = np.frombuffer(self.chroma[0], dtype=np.uint8).reshape(shape[0], shape[1], 2)
            v, u = vu[..., 0], vu[..., 1]
        return u, v

    @classmethod
    def from_bytes(cls, resolution: Resolution, layout: Layout, data: bytes, **meta) -> "YuvFrame":
        n = resolution.pixels
        if len(data) != n * 3 // 2:
            raise DimensionError(f"frame buffer has {len(data)} bytes, expected {n * 3 // 2}")
        data = bytes(data)
        if layout is Layout.PLANAR_420:
            q = n // 4
            chroma = (data[n:n + q], data[n + q:])
        else:
            chroma = (data[n:],)
        return cls(resolution, layout, data[:n], chroma, **meta)

    @classmethod
    def from_arrays(cls, y: np.ndarray, u: np.ndarray, v: np.ndarray,
                    layout: Layout = Layout.PLANAR_420, **meta) -> "YuvFrame":
        h, w = y.shape
        u = np.asarray(u, dtype=np.uint8)
        v = np.asarray(v, dtype=np.uint8)
        if layout is Layout.PLANAR_420:
            chroma = (u.tobytes(), v.tobytes())
        else:
            chroma = (np.stack([v, u], axis=-1).tobytes(),)
        return cls(Resolution(w, h), layout, np.asarray(y, dtype=np.uint8).tobytes(), chroma, **meta)


def make_yuv_frame(resolution: Resolution, layout: Layout, planes, seq: int = 0,
                   pts_micros: int = 0, keyframe: bool = False) -> YuvFrame:
    """Build a frame from raw planes; raises DimensionError naming the bad plane."""
    y, *chroma = (bytes(p) for p in planes)
    return YuvFrame(resolution, layout, y, tuple(chroma), seq, pts_micros, keyframe)


@dataclass(frozen=True, eq=False)
class RgbImage:
    """ARGB8888 image; ``pixels`` is a read-only (h, w) uint32 array, alpha in the top byte."""

    resolution: Resolution
    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint32)
        if px.shape != (self.resolution.height, self.resolution.width):
            raise DimensionError(
                f"pixel array shape {px.shape} does not match {self.resolution}"
            )
        if px is self.pixels and px.flags.writeable:
            px = px.copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    def __eq__(self, other):
        if not isinstance(other, RgbImage):
            return NotImplemented
        return self.resolution == other.resolution and np.array_equal(self.pixels, other.pixels)

    __hash__ = None

    @property
    def width(self) -> int:
        return self.resolution.width

    @property
    def height(self) -> int:
        return self.resolution.height

    def rgb(self) -> np.ndarray:
        """(h, w, 3) uint8 copy in R, G, B order."""
        px = self.pixels
        return np.stack([(px >> 16) & 0xFF, (px >> 8) & 0xFF, px & 0xFF], axis=-1).astype(np.uint8)

    @classmethod
    def from_rgb(cls, rgb: np.ndarray) -> "RgbImage":
        rgb = np.asarray(rgb, dtype=np.uint32)
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise DimensionError(f"expected (h, w, 3) array, got shape {rgb.shape}")
        h, w, _ = rgb.shape
        px = np.uint32(0xFF000000) | (rgb[..., 0] << 16) | (rgb[..., 1] << 8) | rgb[..., 2]
        return cls(Resolution(w, h), px)

    @classmethod
    def solid(cls, resolution: Resolution, rgb) -> "RgbImage":
        arr = np.empty((resolution.height, resolution.width, 3), dtype=np.uint8)
        arr[...] = rgb
        return cls.from_rgb(arr)
