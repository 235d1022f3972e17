"""Synthetic moving-rectangle scenes with known ground truth.

Scene files are line-oriented ``key = value``::

    resolution = 160x120
    background = 0,0,0
    frame_count = 30
    object = 255,0,0, 30,40, 20,10, 2,1     # r,g,b, x,y, w,h, dx,dy
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .colorspace import rgb_to_yuv_frame
from .frames import Layout, Resolution, RgbImage, YuvFrame
from .ppm import write_ppm


class SceneSpecError(ValueError):
    pass


@dataclass(frozen=True)
class SceneObject:
    rgb: tuple[int, int, int]
    x: int
    y: int
    w: int
    h: int
    dx: int = 0
    dy: int = 0


@dataclass(frozen=True)
class SyntheticSceneSpec:
    resolution: Resolution
    background_rgb: tuple[int, int, int] = (0, 0, 0)
    objects: tuple[SceneObject, ...] = field(default_factory=tuple)
    frame_count: int = 1

    def __post_init__(self):
        self.resolution.require_420()
        if self.frame_count < 1:
            raise SceneSpecError("frame_count must be >= 1")
        W, H = self.resolution.width, self.resolution.height
        for i, o in enumerate(self.objects):
            if o.w < 1 or o.h < 1 or o.w > W or o.h > H:
                raise SceneSpecError(f"object {i}: size {o.w}x{o.h} does not fit {self.resolution}")
            if not (0 <= o.x <= W - o.w and 0 <= o.y <= H - o.h):
                raise SceneSpecError(f"object {i}: initial box ({o.x},{o.y},{o.w},{o.h}) leaves the frame")

    @classmethod
    def parse(cls, text: str) -> "SyntheticSceneSpec":
        values: dict[str, str] = {}
        objects = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = (s.strip() for s in line.partition("="))
            if not sep:
                raise SceneSpecError(f"line {lineno}: expected 'key = value'")
            try:
                if key == "object":
                    nums = [int(v) for v in value.split(",")]
                    if len(nums) != 9:
                        raise SceneSpecError(f"line {lineno}: object needs 9 integers")
                    objects.append(SceneObject(tuple(nums[:3]), *nums[3:]))
                elif key in ("resolution", "background", "frame_count"):
                    values[key] = value
                else:
                    raise SceneSpecError(f"line {lineno}: unknown key {key!r}")
            except ValueError as exc:
                raise SceneSpecError(f"line {lineno}: {exc}") from None
        if "resolution" not in values:
            raise SceneSpecError("scene spec needs a resolution")
        try:
            bg = tuple(int(v) for v in values.get("background", "0,0,0").split(","))
            return cls(Resolution.parse(values["resolution"]), bg, tuple(objects),
                       int(values.get("frame_count", "1")))
        except ValueError as exc:
            raise SceneSpecError(str(exc)) from None

    @classmethod
    def read(cls, path) -> "SyntheticSceneSpec":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def dumps(self) -> str:
        bg = ",".join(map(str, self.background_rgb))
        lines = [f"resolution = {self.resolution}", f"background = {bg}",
                 f"frame_count = {self.frame_count}"]
        for o in self.objects:
            lines.append("object = " + ",".join(map(str, (*o.rgb, o.x, o.y, o.w, o.h, o.dx, o.dy))))
        return "\n".join(lines) + "\n"


def bounce(start: int, velocity: int, t: int, span: int) -> int:
    """Position after ``t`` steps on [0, span], reflecting off both ends."""
    if span == 0:
        return 0
    m = (start + velocity * t) % (2 * span)
    return m if m <= span else 2 * span - m


def object_boxes(spec: SyntheticSceneSpec, frame_index: int) -> list[tuple[int, int, int, int]]:
    W, H = spec.resolution.width, spec.resolution.height
    return [(bounce(o.x, o.dx, frame_index, W - o.w), bounce(o.y, o.dy, frame_index, H - o.h), o.w, o.h)
            for o in spec.objects]


def render_rgb(spec: SyntheticSceneSpec, frame_index: int) -> RgbImage:
    if not 0 <= frame_index < spec.frame_count:
        raise IndexError(f"frame {frame_index} outside 0..{spec.frame_count - 1}")
    arr = np.empty((spec.resolution.height, spec.resolution.width, 3), dtype=np.uint8)
    arr[...] = spec.background_rgb
    for o, (x, y, w, h) in zip(spec.objects, object_boxes(spec, frame_index)):
        arr[y:y + h, x:x + w] = o.rgb
    return RgbImage.from_rgb(arr)


def render_scene(spec: SyntheticSceneSpec, frame_index: int,
                 layout: Layout = Layout.PLANAR_420) -> tuple[RgbImage, YuvFrame]:
    image = render_rgb(spec, frame_index)
    return image, rgb_to_yuv_frame(image, layout, seq=frame_index)


def scene_frames(spec: SyntheticSceneSpec):
    for i in range(spec.frame_count):
        yield render_scene(spec, i)[1]


def truth_records(spec: SyntheticSceneSpec):
    for i in range(spec.frame_count):
        yield {"frame": i, "boxes": [
            {"rgb": list(o.rgb), "box": list(b)} for o, b in zip(spec.objects, object_boxes(spec, i))
        ]}


def write_scene(spec: SyntheticSceneSpec, out_dir) -> Path:
    """Write ``frame_<i>.ppm`` files plus ``truth.jsonl`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(spec.frame_count):
        write_ppm(out / f"frame_{i:05d}.ppm", render_rgb(spec, i))
    with open(out / "truth.jsonl", "w", encoding="utf-8") as fh:
        for rec in truth_records(spec):
            fh.write(json.dumps(rec) + "\n")
    return out
