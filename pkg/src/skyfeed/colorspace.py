"""Pixel format conversions between the YUV decoder output and the inference input.

YUV->RGB uses the BT.601 limited-range fixed-point form::

    C = Y - 16, D = U - 128, E = V - 128
    R = clamp((298C + 409E + 128) >> 8)
    G = clamp((298C - 100D - 208E + 128) >> 8)
    B = clamp((298C + 516D + 128) >> 8)

with chroma taken from the pixel's 2x2 block (no interpolation).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .frames import Layout, Resolution, RgbImage, YuvFrame


class LayoutError(ValueError):
    pass


def planar_to_semiplanar(frame: YuvFrame) -> YuvFrame:
    """I420 -> NV21 (Y plane unchanged, chroma interleaved V then U)."""
    if frame.layout is not Layout.PLANAR_420:
        raise LayoutError(f"expected planar I420 input, got {frame.layout.value}")
    u, v = frame.uv_arrays()
    vu = np.empty(u.size * 2, dtype=np.uint8)
    vu[0::2] = v.ravel()
    vu[1::2] = u.ravel()
    return YuvFrame(frame.resolution, Layout.SEMIPLANAR_420, frame.y, (vu.tobytes(),),
                    frame.seq, frame.pts_micros, frame.keyframe)


def semiplanar_to_planar(frame: YuvFrame) -> YuvFrame:
    if frame.layout is not Layout.SEMIPLANAR_420:
        raise LayoutError(f"expected semi-planar NV21 input, got {frame.layout.value}")
    u, v = frame.uv_arrays()
    return YuvFrame(frame.resolution, Layout.PLANAR_420, frame.y, (u.tobytes(), v.tobytes()),
                    frame.seq, frame.pts_micros, frame.keyframe)


def _yuv_to_rgb_arrays(y, u, v) -> np.ndarray:
    c = y.astype(np.int32) - 16
    d = u.astype(np.int32) - 128
    e = v.astype(np.int32) - 128
    r = (298 * c + 409 * e + 128) >> 8
    g = (298 * c - 100 * d - 208 * e + 128) >> 8
    b = (298 * c + 516 * d + 128) >> 8
    return np.clip(np.stack([r, g, b], axis=-1), 0, 255).astype(np.uint8)


def yuv_to_argb(frame: YuvFrame) -> RgbImage:
    y = frame.y_array()
    u, v = frame.uv_arrays()
    u_full = np.repeat(np.repeat(u, 2, axis=0), 2, axis=1)
    v_full = np.repeat(np.repeat(v, 2, axis=0), 2, axis=1)
    return RgbImage.from_rgb(_yuv_to_rgb_arrays(y, u_full, v_full))


# -- RGB -> YUV (used to synthesize frames) ----------------------------------

_SEARCH = np.array(list(itertools.product(range(-2, 3), repeat=3)), dtype=np.int32)


def _best_yuv444(rgb: np.ndarray) -> np.ndarray:
    """Per colour, the (Y,U,V) whose fixed-point conversion lands closest to it.

    Searches +-2 around the floating-point BT.601 estimate; picks an exact
    preimage whenever one exists in that window.
    """
    f = rgb.astype(np.float64)
    est = np.stack([
        16 + 0.256788 * f[:, 0] + 0.504129 * f[:, 1] + 0.097906 * f[:, 2],
        128 - 0.148223 * f[:, 0] - 0.290993 * f[:, 1] + 0.439216 * f[:, 2],
        128 + 0.439216 * f[:, 0] - 0.367788 * f[:, 1] - 0.071427 * f[:, 2],
    ], axis=-1)
    cand = np.clip(np.rint(est)[:, None, :].astype(np.int32) + _SEARCH[None], 0, 255)
    back = _yuv_to_rgb_arrays(cand[..., 0], cand[..., 1], cand[..., 2]).astype(np.int32)
    err = np.abs(back - rgb[:, None, :].astype(np.int32)).sum(axis=-1)
    return cand[np.arange(len(rgb)), err.argmin(axis=1)]


def rgb_to_yuv_frame(image: RgbImage, layout: Layout = Layout.PLANAR_420, **meta) -> YuvFrame:
    """Inverse of :func:`yuv_to_argb` for images whose 2x2 blocks are uniform.

    Mixed blocks get the rounded mean chroma of their pixels and per-pixel luma
    re-fitted against that shared chroma.
    """
    image.resolution.require_420()
    rgb = image.rgb()
    h, w, _ = rgb.shape
    colors, inverse = np.unique(rgb.reshape(-1, 3), axis=0, return_inverse=True)
    yuv = _best_yuv444(colors)[inverse.ravel()].reshape(h, w, 3)
    blocks = yuv[..., 1:].reshape(h // 2, 2, w // 2, 2, 2).sum(axis=(1, 3))
    uv = (blocks + 2) // 4
    u, v = uv[..., 0], uv[..., 1]
    u_full = np.repeat(np.repeat(u, 2, axis=0), 2, axis=1)
    v_full = np.repeat(np.repeat(v, 2, axis=0), 2, axis=1)
    mixed = (u_full != yuv[..., 1]) | (v_full != yuv[..., 2])
    y = yuv[..., 0].copy()
    if mixed.any():
        target = rgb[mixed].astype(np.int32)
        best = None
        best_err = None
        for dy in range(-6, 7):
            cy = np.clip(y[mixed] + dy, 0, 255)
            back = _yuv_to_rgb_arrays(cy, u_full[mixed], v_full[mixed]).astype(np.int32)
            err = np.abs(back - target).sum(axis=-1)
            if best is None:
                best, best_err = cy.copy(), err
            else:
                better = err < best_err
                best[better] = cy[better]
                best_err[better] = err[better]
        y[mixed] = best
    return YuvFrame.from_arrays(y, u, v, layout, **meta)


# -- HSV ---------------------------------------------------------------------

@dataclass(frozen=True)
class HsvPixel:
    h: float
    s: float
    v: float


def rgb_to_hsv(r: int, g: int, b: int) -> HsvPixel:
    """Hexcone HSV: h in degrees [0, 360), s and v in [0, 1]; grey has h = 0."""
    mx = max(r, g, b)
    mn = min(r, g, b)
    v = mx / 255
    if mx == 0:
        return HsvPixel(0.0, 0.0, v)
    delta = mx - mn
    s = delta / mx
    if delta == 0:
        return HsvPixel(0.0, s, v)
    if mx == r:
        h = 60 * (((g - b) / delta) % 6)
    elif mx == g:
        h = 60 * (2 + (b - r) / delta)
    else:
        h = 60 * (4 + (r - g) / delta)
    h %= 360
    return HsvPixel(float(h), s, v)


def hsv_to_rgb(pixel: HsvPixel) -> tuple[int, int, int]:
    """Inverse hexcone model, rounded to the nearest byte."""
    c = pixel.v * pixel.s
    hp = (pixel.h % 360) / 60
    x = c * (1 - abs(hp % 2 - 1))
    sector = int(hp) % 6
    r, g, b = [(c, x, 0), (x, c, 0), (0, c, x), (0, x, c), (x, 0, c), (c, 0, x)][sector]
    m = pixel.v - c
    return tuple(int(np.floor((ch + m) * 255 + 0.5)) for ch in (r, g, b))


def rgb_to_hsv_array(rgb: np.ndarray) -> np.ndarray:
    """Vectorized :func:`rgb_to_hsv` over an (..., 3) uint8 array; returns float64 (..., 3)."""
    c = rgb.astype(np.float64)
    r, g, b = c[..., 0], c[..., 1], c[..., 2]
    mx = c.max(axis=-1)
    mn = c.min(axis=-1)
    delta = mx - mn
    safe = np.where(delta == 0, 1.0, delta)
    h = np.where(mx == r, ((g - b) / safe) % 6,
                 np.where(mx == g, 2 + (b - r) / safe, 4 + (r - g) / safe)) * 60
    h = np.where(delta == 0, 0.0, h % 360)
    s = np.where(mx == 0, 0.0, delta / np.where(mx == 0, 1.0, mx))
    return np.stack([h, s, mx / 255], axis=-1)


# -- scaling -----------------------------------------------------------------

def downscale(image: RgbImage, target: Resolution) -> RgbImage:
    """Box-average downscale; each output pixel is the round-half-up mean of its source rectangle."""
    src = image.resolution
    if target.width > src.width or target.height > src.height:
        raise ValueError(f"cannot upscale {src} to {target}")
    if target == src:
        return image
    rows = np.arange(target.height + 1) * src.height // target.height
    cols = np.arange(target.width + 1) * src.width // target.width
    rgb = image.rgb().astype(np.int64)
    sums = np.add.reduceat(np.add.reduceat(rgb, rows[:-1], axis=0), cols[:-1], axis=1)
    counts = np.diff(rows)[:, None, None] * np.diff(cols)[None, :, None]
    return RgbImage.from_rgb((2 * sums + counts) // (2 * counts))
