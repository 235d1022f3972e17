import json
import threading

import pytest

from skyfeed.clock import VirtualClock
from skyfeed.frames import Resolution
from skyfeed.pipeline import PipelineStats
from skyfeed.telemetry import DetailsReport, StageAggregator, StageTotal, build_report, top_stages


def names(totals):
    return [t.stage for t in totals]


def test_additive_accumulation():
    agg = StageAggregator()
    agg.record_span("decode", 5)
    agg.record_span("decode", 5)
    assert agg.snapshot() == {"decode": StageTotal("decode", 2, 10)}


def test_unrecorded_stage_absent():
    agg = StageAggregator()
    agg.record_span("a", 1)
    rep = build_report(agg, PipelineStats())
    assert "b" not in names(rep.top_stages)


def test_exact_integer_accumulation():
    agg = StageAggregator()
    total = 0
    for _ in range(1000):
        agg.record_span("tick", 1)
        total += 1
    assert agg.snapshot()["tick"].total_micros == total == 1000


def test_negative_span_rejected():
    with pytest.raises(ValueError):
        StageAggregator().record_span("x", -1)


@pytest.mark.parametrize("spans,n,expected", [
    ({"a": 30, "b": 20, "c": 10}, 2, ["a", "b"]),
    ({"a": 10, "b": 10}, 1, ["a"]),
    ({"b": 10, "a": 10, "c": 11}, 3, ["c", "a", "b"]),
])
def test_top_ordering(spans, n, expected):
    agg = StageAggregator()
    for k, v in spans.items():
        agg.record_span(k, v)
    assert names(build_report(agg, PipelineStats(), n=n).top_stages) == expected


def test_top_ten_of_twelve_against_sort_oracle():
    totals = {f"stage{i:02d}": (i * 37) % 101 + 1 for i in range(12)}
    agg = StageAggregator()
    for k, v in totals.items():
        agg.record_span(k, v)
    oracle = sorted(totals, key=lambda k: totals[k], reverse=True)[:10]
    rep = build_report(agg, PipelineStats())
    assert names(rep.top_stages) == oracle
    assert sum(t.total_micros for t in rep.top_stages) <= sum(totals.values())


def test_report_does_not_mutate_and_serializes():
    agg = StageAggregator()
    agg.record_span("inference", 50000)
    stats = PipelineStats(received=3, displayed=3, processed=2, dropped=1, last_elapsed_micros=50000)
    kwargs = dict(frame_resolution=Resolution(640, 480), inference_input_resolution=Resolution(64, 64),
                  display_resolution=Resolution(1280, 800), rotation=90)
    a = build_report(agg, stats, **kwargs)
    b = build_report(agg, stats, **kwargs)
    assert a == b
    d = json.loads(a.to_json())
    assert d["frame_resolution"] == {"width": 640, "height": 480}
    assert d["rotation_degrees"] == 90
    assert d["top_stages"] == [{"stage": "inference", "calls": 1, "total_micros": 50000}]
    assert d["counters"]["dropped"] == 1
    assert DetailsReport.from_dict(d) == a


def test_span_with_virtual_clock():
    clock = VirtualClock()
    agg = StageAggregator()
    with agg.span("convert", clock):
        clock.sleep(3000)
    assert agg.snapshot()["convert"] == StageTotal("convert", 1, 3000)


def test_concurrent_recording():
    agg = StageAggregator()

    def work():
        for _ in range(2000):
            agg.record_span("s", 1)

    ts = [threading.Thread(target=work) for _ in range(4)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert agg.snapshot()["s"] == StageTotal("s", 8000, 8000)


def test_n_must_be_positive():
    with pytest.raises(ValueError):
        top_stages([], 0)
