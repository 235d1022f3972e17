"""Colour-histogram softmax classifier and its binary model file.

Model file, little-endian::

    "SKYM" | version:u8 (=1) | L:u16 | B:u8 | S:u16
    | L x (len:u8 | UTF-8 label)
    | L*B^3 float32 weights (row-major, one row per label)
    | L float32 biases
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..colorspace import downscale
from ..frames import Resolution, RgbImage

MAGIC = b"SKYM"
VERSION = 1
_HEAD = struct.Struct("<4sBHBH")
MAX_LABELS = 1000
DEFAULT_INPUT_SIDE = 64


class ModelFormatError(ValueError):
    pass


class TruncatedModelError(ModelFormatError):
    pass


@dataclass(frozen=True)
class Recognition:
    label: str
    score: float

    def __post_init__(self):
        if not (np.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ValueError(f"score out of [0, 1]: {self.score}")


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    labels: tuple[str, ...]
    weights: np.ndarray   # (L, B^3) float32
    biases: np.ndarray    # (L,) float32
    bins_per_channel: int
    input_side: int = DEFAULT_INPUT_SIDE

    def __post_init__(self):
        labels = tuple(self.labels)
        w = np.array(self.weights, dtype=np.float32)
        b = np.array(self.biases, dtype=np.float32).reshape(-1)
        L, B = len(labels), self.bins_per_channel
        if not 1 <= L <= MAX_LABELS:
            raise ModelFormatError(f"label count {L} outside 1..{MAX_LABELS}")
        if not 1 <= B <= 255:
            raise ModelFormatError(f"bins_per_channel {B} outside 1..255")
        if not 1 <= self.input_side <= 0xFFFF:
            raise ModelFormatError(f"input_side {self.input_side} outside 1..65535")
        if w.shape != (L, B ** 3) or b.shape != (L,):
            raise ModelFormatError(
                f"weights {w.shape} / biases {b.shape} do not match L={L}, F={B ** 3}"
            )
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ModelFormatError("non-finite weight or bias")
        for arr in (w, b):
            arr.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    @property
    def feature_dim(self) -> int:
        return self.bins_per_channel ** 3

    @property
    def input_resolution(self) -> Resolution:
        return Resolution(self.input_side, self.input_side)

    def __eq__(self, other):
        if not isinstance(other, ClassifierModel):
            return NotImplemented
        return (self.labels == other.labels and self.bins_per_channel == other.bins_per_channel
                and self.input_side == other.input_side
                and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.biases, other.biases))


def save_model(model: ClassifierModel) -> bytes:
    parts = [_HEAD.pack(MAGIC, VERSION, len(model.labels), model.bins_per_channel, model.input_side)]
    for label in model.labels:
        raw = label.encode("utf-8")
        if len(raw) > 255:
            raise ModelFormatError(f"label longer than 255 bytes: {label!r}")
        parts.append(bytes([len(raw)]) + raw)
    parts.append(model.weights.astype("<f4").tobytes())
    parts.append(model.biases.astype("<f4").tobytes())
    return b"".join(parts)


def load_model(data: bytes) -> ClassifierModel:
    data = bytes(data)
    if len(data) < 4 or data[:4] != MAGIC:
        raise ModelFormatError("bad magic, not a SKYM model file")
    if len(data) < _HEAD.size:
        raise TruncatedModelError("file ends inside the header")
    _, version, L, B, S = _HEAD.unpack_from(data)
    if version != VERSION:
        raise ModelFormatError(f"unsupported model version {version}")
    pos = _HEAD.size
    labels = []
    for i in range(L):
        if pos >= len(data):
            raise TruncatedModelError(f"file ends before label {i}")
        n = data[pos]
        raw = data[pos + 1:pos + 1 + n]
        if len(raw) != n:
            raise TruncatedModelError(f"file ends inside label {i}")
        labels.append(raw.decode("utf-8"))
        pos += 1 + n
    F = B ** 3
    need = 4 * (L * F + L)
    if len(data) - pos < need:
        raise TruncatedModelError(f"need {need} bytes of weights and biases, have {len(data) - pos}")
    if len(data) - pos > need:
        raise ModelFormatError(f"{len(data) - pos - need} trailing bytes after biases")
    weights = np.frombuffer(data, dtype="<f4", count=L * F, offset=pos).reshape(L, F)
    biases = np.frombuffer(data, dtype="<f4", count=L, offset=pos + 4 * L * F)
    return ClassifierModel(tuple(labels), weights, biases, B, S)


def read_model(path) -> ClassifierModel:
    with open(path, "rb") as fh:
        return load_model(fh.read())


def write_model(path, model: ClassifierModel) -> None:
    with open(path, "wb") as fh:
        fh.write(save_model(model))


def color_histogram(rgb: np.ndarray, bins: int) -> np.ndarray:
    """Normalized joint (R, G, B) histogram with equal-width bins, flattened R-major."""
    q = rgb.reshape(-1, 3).astype(np.int64) * bins // 256
    idx = (q[:, 0] * bins + q[:, 1]) * bins + q[:, 2]
    hist = np.bincount(idx, minlength=bins ** 3).astype(np.float64)
    total = hist.sum()
    if total == 0:
        return np.full(bins ** 3, 1.0 / bins ** 3)
    return hist / total


def featurize(image: RgbImage, model: ClassifierModel) -> np.ndarray:
    side = model.input_side
    res = image.resolution
    target = Resolution(min(side, res.width), min(side, res.height))
    return color_histogram(downscale(image, target).rgb(), model.bins_per_channel)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def top_k(scores, labels, k: int) -> list[Recognition]:
    """Highest ``k`` scores, descending; equal scores ordered by label."""
    if k < 1:
        raise ValueError("k must be >= 1")
    order = sorted(range(len(labels)), key=lambda i: (-float(scores[i]), labels[i]))
    return [Recognition(labels[i], float(scores[i])) for i in order[:k]]


def class_scores(image: RgbImage, model: ClassifierModel) -> np.ndarray:
    feats = featurize(image, model)
    logits = model.weights.astype(np.float64) @ feats + model.biases.astype(np.float64)
    return softmax(logits)


def classify(image: RgbImage, model: ClassifierModel, k: int = 3) -> list[Recognition]:
    return top_k(class_scores(image, model), model.labels, k)


def fit_classifier(images, targets, labels, bins: int = 4, input_side: int = DEFAULT_INPUT_SIDE,
                   epochs: int = 300, lr: float = 5.0, l2: float = 1e-4, seed: int = 0) -> ClassifierModel:
    """Full-batch gradient descent on softmax cross-entropy over histogram features."""
    labels = tuple(labels)
    proto = ClassifierModel(labels, np.zeros((len(labels), bins ** 3)), np.zeros(len(labels)),
                            bins, input_side)
    X = np.stack([featurize(img, proto) for img in images])
    y = np.asarray(targets)
    n, L = len(X), len(labels)
    rng = np.random.default_rng(seed)
    W = rng.normal(0, 0.01, (L, X.shape[1]))
    b = np.zeros(L)
    onehot = np.eye(L)[y]
    for _ in range(epochs):
        z = X @ W.T + b
        z -= z.max(axis=1, keepdims=True)
        p = np.exp(z)
        p /= p.sum(axis=1, keepdims=True)
        g = (p - onehot) / n
        W -= lr * (g.T @ X + l2 * W)
        b -= lr * g.sum(axis=0)
    return ClassifierModel(labels, W, b, bins, input_side)
