"""Colour blob detector: blur, HSV threshold, 4-connected components, area/aspect filter."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from ..colorspace import rgb_to_hsv_array
from ..frames import RgbImage

Box = tuple[int, int, int, int]  # x, y, w, h


class DetectorConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Detection:
    label: str
    score: float
    box: Box


@dataclass(frozen=True)
class ColorClass:
    label: str
    h_low: float
    h_high: float
    s_low: float = 0.0
    s_high: float = 1.0
    v_low: float = 0.0
    v_high: float = 1.0
    min_area: int = 1
    aspect_min: float = 0.01
    aspect_max: float = 100.0

    def __post_init__(self):
        if not (0 <= self.h_low <= 360 and 0 <= self.h_high <= 360):
            raise DetectorConfigError(f"{self.label}: hue bounds must lie in [0, 360]")
        for lo, hi, name in ((self.s_low, self.s_high, "s"), (self.v_low, self.v_high, "v")):
            if not 0 <= lo <= hi <= 1:
                raise DetectorConfigError(f"{self.label}: need 0 <= {name}_low <= {name}_high <= 1")
        if self.min_area < 1:
            raise DetectorConfigError(f"{self.label}: min_area must be >= 1")
        if not 0 < self.aspect_min <= self.aspect_max:
            raise DetectorConfigError(f"{self.label}: need 0 < aspect_min <= aspect_max")

    def mask(self, hsv: np.ndarray) -> np.ndarray:
        h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
        if self.h_low <= self.h_high:
            hue = (h >= self.h_low) & (h <= self.h_high)
        else:  # wraps through 360/0
            hue = (h >= self.h_low) | (h <= self.h_high)
        return (hue & (s >= self.s_low) & (s <= self.s_high)
                & (v >= self.v_low) & (v <= self.v_high))


@dataclass(frozen=True)
class DetectorConfig:
    classes: tuple[ColorClass, ...]

    @classmethod
    def parse(cls, text: str) -> "DetectorConfig":
        """One class per line: ``label h_low h_high s_low s_high v_low v_high min_area aspect_min aspect_max``."""
        classes = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 10:
                raise DetectorConfigError(f"line {lineno}: expected 10 fields, got {len(parts)}")
            try:
                nums = [float(x) for x in parts[1:]]
            except ValueError as exc:
                raise DetectorConfigError(f"line {lineno}: {exc}") from None
            if not nums[6].is_integer():
                raise DetectorConfigError(f"line {lineno}: min_area must be an integer")
            classes.append(ColorClass(parts[0], *nums[:6], int(nums[6]), nums[7], nums[8]))
        if not classes:
            raise DetectorConfigError("detector config defines no classes")
        return cls(tuple(classes))

    @classmethod
    def read(cls, path) -> "DetectorConfig":
        return cls.parse(Path(path).read_text(encoding="utf-8"))


def box_blur3(rgb: np.ndarray) -> np.ndarray:
    """3x3 mean with replicated edges, rounded half up."""
    padded = np.pad(rgb.astype(np.int32), ((1, 1), (1, 1), (0, 0)), mode="edge")
    h, w = rgb.shape[:2]
    acc = sum(padded[dy:dy + h, dx:dx + w] for dy in range(3) for dx in range(3))
    return ((2 * acc + 9) // 18).astype(np.uint8)


def detect(image: RgbImage, config: DetectorConfig) -> list[Detection]:
    hsv = rgb_to_hsv_array(box_blur3(image.rgb()))
    found = []
    for cc in config.classes:
        labels, count = ndimage.label(cc.mask(hsv))  # default structure is 4-connected
        if not count:
            continue
        areas = np.bincount(labels.ravel(), minlength=count + 1)
        for idx, sl in enumerate(ndimage.find_objects(labels), 1):
            area = int(areas[idx])
            y0, y1 = sl[0].start, sl[0].stop
            x0, x1 = sl[1].start, sl[1].stop
            w, h = x1 - x0, y1 - y0
            if area < cc.min_area or not cc.aspect_min <= w / h <= cc.aspect_max:
                continue
            found.append(Detection(cc.label, area / (w * h), (x0, y0, w, h)))
    return found
