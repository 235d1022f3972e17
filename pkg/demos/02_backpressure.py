# Drop-if-busy backpressure under a virtual clock: 10 s of 30 fps video
# against workers of different speeds. Nothing ever queues; a frame that
# arrives while one is in flight is shown on the display path and dropped.

import numpy as np

from skyfeed.clock import VirtualClock
from skyfeed.frames import Layout, Resolution, YuvFrame
from skyfeed.pipeline import Admission, Pipeline, VirtualTimeline, arrival_times


class NullBackend:
    mode = "classify"

    def input_resolution(self, frame_res):
        return Resolution(2, 2)

    def run(self, image):
        return []


frame = YuvFrame.from_bytes(Resolution(4, 2), Layout.PLANAR_420, bytes(12))

print(f"{'worker ms':>9} {'processed':>9} {'dropped':>8}  first dispatched seqs")
for worker_ms in (20, 50, 100, 300, 851):
    pipe = Pipeline(NullBackend(), clock=VirtualClock(), stage_delays={"inference": worker_ms * 1000})
    timeline = VirtualTimeline(pipe)
    for seq, t in enumerate(arrival_times(300, 30)):
        timeline.schedule(t, YuvFrame(frame.resolution, frame.layout, frame.y, frame.chroma, seq=seq))
    decisions = timeline.run()
    s = pipe.stats_snapshot()
    seqs = [d.seq for d in decisions if d.admission is Admission.DISPATCHED][:6]
    print(f"{worker_ms:>9} {s.processed:>9} {s.dropped:>8}  {seqs}")
