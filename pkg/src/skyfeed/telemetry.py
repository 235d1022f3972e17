"""Per-stage timing aggregation and the details report (resolutions, last elapsed, top stages)."""

from __future__ import annotations

import json
import threading
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field

from .frames import Resolution

DEFAULT_TOP_N = 10


@dataclass(frozen=True)
class StageSpan:
    stage: str
    duration_micros: int

    def __post_init__(self):
        if self.duration_micros < 0:
            raise ValueError(f"negative span for {self.stage!r}: {self.duration_micros}")


@dataclass(frozen=True)
class StageTotal:
    stage: str
    calls: int
    total_micros: int


class StageAggregator:
    """Thread-safe exact integer accumulation of stage durations."""

    def __init__(self):
        self._lock = threading.Lock()
        self._calls: dict[str, int] = {}
        self._totals: dict[str, int] = {}

    def record_span(self, stage: str, duration_micros: int) -> None:
        span = StageSpan(stage, int(duration_micros))
        with self._lock:
            self._calls[stage] = self._calls.get(stage, 0) + 1
            self._totals[stage] = self._totals.get(stage, 0) + span.duration_micros

    @contextmanager
    def span(self, stage: str, clock):
        start = clock.now_micros()
        try:
            yield
        finally:
            self.record_span(stage, clock.now_micros() - start)

    def snapshot(self) -> dict[str, StageTotal]:
        with self._lock:
            return {k: StageTotal(k, self._calls[k], self._totals[k]) for k in self._calls}


def top_stages(totals, n: int = DEFAULT_TOP_N) -> list[StageTotal]:
    """Largest ``n`` by total time; ties go to the lexicographically smaller name."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return sorted(totals, key=lambda t: (-t.total_micros, t.stage))[:n]


@dataclass
class DetailsReport:
    frame_resolution: Resolution | None
    inference_input_resolution: Resolution | None
    display_resolution: Resolution | None
    rotation_degrees: int
    last_elapsed_micros: int | None
    top_stages: list[StageTotal] = field(default_factory=list)
    counters: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "DetailsReport":
        def res(v):
            return None if v is None else Resolution(v["width"], v["height"])

        return cls(
            frame_resolution=res(d["frame_resolution"]),
            inference_input_resolution=res(d["inference_input_resolution"]),
            display_resolution=res(d["display_resolution"]),
            rotation_degrees=d["rotation_degrees"],
            last_elapsed_micros=d["last_elapsed_micros"],
            top_stages=[StageTotal(**t) for t in d["top_stages"]],
            counters=dict(d["counters"]),
        )


def build_report(aggregator: StageAggregator, stats, *, frame_resolution=None,
                 inference_input_resolution=None, display_resolution=None,
                 rotation: int = 0, n: int = DEFAULT_TOP_N) -> DetailsReport:
    """Assemble a report; ``stats`` is a PipelineStats snapshot."""
    return DetailsReport(
        frame_resolution=frame_resolution,
        inference_input_resolution=inference_input_resolution,
        display_resolution=display_resolution,
        rotation_degrees=int(rotation),
        last_elapsed_micros=stats.last_elapsed_micros,
        top_stages=top_stages(aggregator.snapshot().values(), n),
        counters=stats.counters(),
    )
