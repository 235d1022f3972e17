"""Inference backends the pipeline worker can drive."""

from __future__ import annotations

from typing import Protocol

from ..frames import Resolution, RgbImage
from .detect import DetectorConfig, detect
from .model import ClassifierModel, classify


class Backend(Protocol):
    mode: str

    def input_resolution(self, frame_res: Resolution) -> Resolution: ...

    def run(self, image: RgbImage) -> list: ...


class ClassifierBackend:
    mode = "classify"

    def __init__(self, model: ClassifierModel, k: int = 3):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.model = model
        self.k = k

    def input_resolution(self, frame_res: Resolution) -> Resolution:
        side = self.model.input_side
        return Resolution(min(side, frame_res.width), min(side, frame_res.height))

    def run(self, image: RgbImage):
        return classify(image, self.model, self.k)


class DetectorBackend:
    """Runs at full frame resolution so boxes come out in frame coordinates."""

    mode = "detect"

    def __init__(self, config: DetectorConfig):
        self.config = config

    def input_resolution(self, frame_res: Resolution) -> Resolution:
        return frame_res

    def run(self, image: RgbImage):
        return detect(image, self.config)
