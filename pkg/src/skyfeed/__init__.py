"""Live drone-feed inference pipeline: feed protocol, toy codec, colour conversion, backpressure, backends."""

from .frames import DimensionError, Layout, Resolution, RgbImage, Rotation, YuvFrame, make_yuv_frame

__version__ = "0.1.0"
