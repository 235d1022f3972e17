"""Frame dispatch with drop-if-busy backpressure.

Every decoded frame goes to the display sink. A frame is handed to the single
inference worker only if nothing is in flight; otherwise it is dropped on the
spot. There is no queue.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import logging
import queue
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .clock import VirtualClock, WallClock
from .codec import Decoder, EncodedFrame
from .colorspace import downscale, planar_to_semiplanar, yuv_to_argb
from .frames import Layout, Resolution, Rotation, YuvFrame
from .inference.calibration import Calibration, calibrate_box
from .ppm import write_ppm
from .telemetry import DEFAULT_TOP_N, StageAggregator, StageTotal, build_report

log = logging.getLogger(__name__)


class Admission(enum.Enum):
    DISPATCHED = "dispatched"
    DROPPED = "dropped"


@dataclass(frozen=True)
class PipelineStats:
    received: int = 0
    displayed: int = 0
    processed: int = 0
    dropped: int = 0
    failed: int = 0
    completed: int = 0
    in_flight: int = 0
    peak_in_flight: int = 0
    last_elapsed_micros: int | None = None
    per_stage: dict[str, StageTotal] = field(default_factory=dict)

    def counters(self) -> dict[str, int]:
        return {"received": self.received, "displayed": self.displayed,
                "processed": self.processed, "dropped": self.dropped,
                "failed": self.failed}


@dataclass
class InferenceResult:
    seq: int
    pts_micros: int
    mode: str
    started_micros: int
    finished_micros: int
    recognitions: list | None = None
    detections: list | None = None
    display_boxes: list | None = None
    failed: bool = False
    message: str | None = None

    @property
    def elapsed_micros(self) -> int:
        return self.finished_micros - self.started_micros

    def to_record(self) -> dict:
        rec = {"seq": self.seq, "pts_micros": self.pts_micros,
               "elapsed_micros": self.elapsed_micros, "mode": self.mode,
               "recognitions": None, "detections": None, "failed": self.failed}
        if self.failed:
            rec["message"] = self.message
        elif self.mode == "classify":
            rec["recognitions"] = [{"label": r.label, "score": r.score} for r in self.recognitions]
        else:
            rec["detections"] = [
                {"label": d.label, "score": d.score, "box": list(d.box), "display_box": list(b)}
                for d, b in zip(self.detections, self.display_boxes)
            ]
        return rec


class DisplaySink:
    """Lossless, non-blocking stand-in for the on-screen view: counts frames, optionally dumps PPMs."""

    def __init__(self, dump_dir=None):
        self.count = 0
        self.dump_dir = Path(dump_dir) if dump_dir else None
        if self.dump_dir:
            self.dump_dir.mkdir(parents=True, exist_ok=True)

    def show(self, frame: YuvFrame) -> None:
        self.count += 1
        if self.dump_dir:
            write_ppm(self.dump_dir / f"frame_{frame.seq}.ppm", yuv_to_argb(frame))


class InlineWorker:
    """Runs inference synchronously in the caller's context."""

    def submit(self, pipeline: "Pipeline", frame: YuvFrame, started: int) -> None:
        pipeline.process_image(frame, started_micros=started)

    def drain(self) -> None:
        pass


class ThreadWorker:
    """One background thread; the admission check guarantees the slot is free on submit."""

    def __init__(self):
        self._slot: queue.Queue = queue.Queue(maxsize=1)
        self._thread: threading.Thread | None = None
        self._pipeline: Pipeline | None = None

    def submit(self, pipeline: "Pipeline", frame: YuvFrame, started: int) -> None:
        if self._thread is None:
            self._pipeline = pipeline
            self._thread = threading.Thread(target=self._loop, name="inference", daemon=True)
            self._thread.start()
        self._slot.put_nowait((frame, started))

    def _loop(self) -> None:
        while True:
            item = self._slot.get()
            if item is None:
                return
            frame, started = item
            self._pipeline.process_image(frame, started_micros=started)

    def drain(self) -> None:
        """Finish the in-flight frame (if any) and stop the thread."""
        if self._thread is not None:
            self._slot.put(None)
            self._thread.join()
            self._thread = None


class Pipeline:
    def __init__(self, backend, *, clock=None, telemetry: StageAggregator | None = None,
                 display: DisplaySink | None = None, worker=None,
                 display_res: Resolution | None = None, rotation=Rotation.DEG_0,
                 stage_delays: dict[str, int] | None = None,
                 on_result: Callable[[InferenceResult], None] | None = None):
        self.backend = backend
        self.clock = clock or WallClock()
        self.telemetry = telemetry or StageAggregator()
        self.display = display or DisplaySink()
        self.worker = worker or InlineWorker()
        self.display_res = display_res
        self.rotation = Rotation(rotation)
        # injected latency per stage, slept on the active clock inside the stage span
        self.stage_delays = dict(stage_delays or {})
        self.on_result = on_result
        self.decoder = Decoder()
        self.frame_res: Resolution | None = None
        self.results: list[InferenceResult] = []
        self.keep_results = True
        self._lock = threading.Lock()
        self._received = self._displayed = self._processed = 0
        self._dropped = self._failed = self._completed = 0
        self._in_flight = self._peak = 0
        self._last_elapsed: int | None = None

    # -- receiver side -------------------------------------------------------

    def _stage(self, name: str, clock):
        delay = self.stage_delays.get(name, 0)
        span = self.telemetry.span(name, clock)
        if not delay:
            return span
        return _DelayedSpan(span, clock, delay)

    def on_encoded(self, enc: EncodedFrame) -> Admission:
        """Decode one wire frame on the receiver, then admit it."""
        started = self.clock.now_micros()
        with self._stage("decode", self.clock):
            frame = self.decoder.decode(enc)
        return self.on_frame_received(frame, started_micros=started)

    def on_frame_received(self, frame: YuvFrame, started_micros: int | None = None) -> Admission:
        if started_micros is None:
            started_micros = self.clock.now_micros()
        if self.frame_res is None:
            self.frame_res = frame.resolution
        with self._stage("display", self.clock):
            self.display.show(frame)
        with self._lock:
            self._received += 1
            self._displayed += 1
            if self._in_flight:
                self._dropped += 1
                log.debug("dropping frame %d", frame.seq)
                return Admission.DROPPED
            self._in_flight += 1
            self._peak = max(self._peak, self._in_flight)
            self._processed += 1
        self.worker.submit(self, frame, started_micros)
        return Admission.DISPATCHED

    # -- worker side ---------------------------------------------------------

    def calibration(self, frame_res: Resolution) -> Calibration:
        return Calibration(frame_res, self.display_res or frame_res, self.rotation)

    def infer(self, frame: YuvFrame, clock=None, started_micros: int | None = None) -> InferenceResult:
        """Convert and run the backend; never raises for backend or conversion faults."""
        clock = clock or self.clock
        if started_micros is None:
            started_micros = clock.now_micros()
        mode = self.backend.mode
        try:
            with self._stage("convert", clock):
                if frame.layout is Layout.PLANAR_420:
                    frame = planar_to_semiplanar(frame)
                image = yuv_to_argb(frame)
                image = downscale(image, self.backend.input_resolution(frame.resolution))
            with self._stage("inference", clock):
                output = self.backend.run(image)
        except Exception as exc:  # backend faults are data, not crashes
            log.warning("inference failed on frame %d: %s", frame.seq, exc)
            return InferenceResult(frame.seq, frame.pts_micros, mode, started_micros,
                                   clock.now_micros(), failed=True,
                                   message=f"{type(exc).__name__}: {exc}")
        result = InferenceResult(frame.seq, frame.pts_micros, mode, started_micros, clock.now_micros())
        if mode == "classify":
            result.recognitions = list(output)
        else:
            cal = self.calibration(frame.resolution)
            result.detections = list(output)
            result.display_boxes = [calibrate_box(d.box, cal) for d in output]
        return result

    def complete(self, result: InferenceResult) -> None:
        """Publish a finished result and free the worker."""
        try:
            if self.on_result is not None:
                self.on_result(result)
        finally:
            with self._lock:
                if self.keep_results:
                    self.results.append(result)
                self._completed += 1
                self._failed += result.failed
                self._last_elapsed = result.elapsed_micros
                self._in_flight -= 1

    def process_image(self, frame: YuvFrame, clock=None, started_micros: int | None = None) -> InferenceResult:
        result = None
        try:
            result = self.infer(frame, clock, started_micros)
        finally:
            if result is None:
                now = (clock or self.clock).now_micros()
                result = InferenceResult(frame.seq, frame.pts_micros, self.backend.mode,
                                         now if started_micros is None else started_micros,
                                         now, failed=True, message="worker aborted")
            self.complete(result)
        return result

    # -- observation ---------------------------------------------------------

    def stats_snapshot(self) -> PipelineStats:
        with self._lock:
            return PipelineStats(
                received=self._received, displayed=self._displayed,
                processed=self._processed, dropped=self._dropped,
                failed=self._failed, completed=self._completed,
                in_flight=self._in_flight, peak_in_flight=self._peak,
                last_elapsed_micros=self._last_elapsed,
                per_stage=self.telemetry.snapshot(),
            )

    def report(self, n: int = DEFAULT_TOP_N):
        frame_res = self.frame_res
        return build_report(
            self.telemetry, self.stats_snapshot(),
            frame_resolution=frame_res,
            inference_input_resolution=self.backend.input_resolution(frame_res) if frame_res else None,
            display_resolution=self.display_res or frame_res,
            rotation=int(self.rotation), n=n,
        )


class _DelayedSpan:
    def __init__(self, span, clock, delay):
        self._span, self._clock, self._delay = span, clock, delay

    def __enter__(self):
        self._span.__enter__()
        self._clock.sleep(self._delay)

    def __exit__(self, *exc):
        return self._span.__exit__(*exc)


# -- deterministic virtual-time driver ----------------------------------------

_COMPLETION, _ARRIVAL = 0, 1


@dataclass(frozen=True)
class ArrivalDecision:
    seq: int
    arrival_micros: int
    admission: Admission


class VirtualTimeline:
    """Discrete-event driver for a :class:`Pipeline` under a :class:`VirtualClock`.

    The worker runs each dispatched frame on its own clock forked at dispatch
    time; its completion is scheduled at the fork's end time. Completions
    sort ahead of arrivals at the same instant, so a worker that finishes
    exactly when a frame arrives accepts that frame.
    """

    def __init__(self, pipeline: Pipeline):
        if not isinstance(pipeline.clock, VirtualClock):
            raise TypeError("VirtualTimeline needs a pipeline driven by a VirtualClock")
        self.pipeline = pipeline
        self.clock: VirtualClock = pipeline.clock
        pipeline.worker = self
        self._events: list = []
        self._tiebreak = itertools.count()
        self.decisions: list[ArrivalDecision] = []

    def _push(self, at: int, kind: int, action) -> None:
        heapq.heappush(self._events, (at, kind, next(self._tiebreak), action))

    def submit(self, pipeline: Pipeline, frame: YuvFrame, started: int) -> None:
        fork = VirtualClock(self.clock.now_micros())
        result = pipeline.infer(frame, clock=fork, started_micros=started)
        self._push(fork.now_micros(), _COMPLETION, lambda: pipeline.complete(result))

    def drain(self) -> None:
        self.run()

    def schedule(self, at_micros: int, item) -> None:
        """Queue an arrival of a YuvFrame or EncodedFrame at ``at_micros``."""

        def arrive():
            if isinstance(item, EncodedFrame):
                admission = self.pipeline.on_encoded(item)
            else:
                admission = self.pipeline.on_frame_received(item)
            self.decisions.append(ArrivalDecision(item.seq, at_micros, admission))

        self._push(at_micros, _ARRIVAL, arrive)

    def run(self) -> list[ArrivalDecision]:
        while self._events:
            at, _, _, action = heapq.heappop(self._events)
            self.clock.advance_to(at)
            action()
        return self.decisions


def arrival_times(count: int, fps: int) -> list[int]:
    return [i * 1_000_000 // fps for i in range(count)]
