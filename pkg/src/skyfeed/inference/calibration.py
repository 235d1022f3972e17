"""Frame-to-display mapping for drawing detection boxes.

The frame is rotated clockwise by the camera rotation, scaled uniformly to the
largest size that fits the display, and centred with letterbox margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..frames import Resolution, Rotation


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class Calibration:
    frame_res: Resolution
    display_res: Resolution
    rotation: Rotation = Rotation.DEG_0

    def __post_init__(self):
        object.__setattr__(self, "rotation", Rotation(self.rotation))

    @property
    def rotated_res(self) -> Resolution:
        if self.rotation in (Rotation.DEG_90, Rotation.DEG_270):
            return Resolution(self.frame_res.height, self.frame_res.width)
        return self.frame_res

    @property
    def scale(self) -> float:
        r = self.rotated_res
        return min(self.display_res.width / r.width, self.display_res.height / r.height)

    @property
    def offset(self) -> tuple[float, float]:
        r, s = self.rotated_res, self.scale
        return (self.display_res.width - r.width * s) / 2, (self.display_res.height - r.height * s) / 2


def rotate_box(box, frame_res: Resolution, rotation) -> tuple[int, int, int, int]:
    """Rotate a frame-space box clockwise about the frame; result is in rotated-frame space."""
    x, y, w, h = box
    W, H = frame_res.width, frame_res.height
    rotation = Rotation(rotation)
    if rotation is Rotation.DEG_0:
        return x, y, w, h
    if rotation is Rotation.DEG_90:
        return H - (y + h), x, h, w
    if rotation is Rotation.DEG_180:
        return W - (x + w), H - (y + h), w, h
    return y, W - (x + w), h, w


def calibrate_box(box, cal: Calibration) -> tuple[int, int, int, int]:
    x, y, w, h = rotate_box(box, cal.frame_res, cal.rotation)
    s = cal.scale
    ox, oy = cal.offset
    dw, dh = cal.display_res.width, cal.display_res.height
    x0 = min(max(_round_half_up(ox + x * s), 0), dw)
    y0 = min(max(_round_half_up(oy + y * s), 0), dh)
    x1 = min(max(_round_half_up(ox + (x + w) * s), 0), dw)
    y1 = min(max(_round_half_up(oy + (y + h) * s), 0), dh)
    return x0, y0, x1 - x0, y1 - y0
