import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import ndimage

from oracles import components_bfs
from skyfeed.frames import Resolution, RgbImage, Rotation
from skyfeed.inference.calibration import Calibration, calibrate_box, rotate_box
from skyfeed.inference.detect import (ColorClass, DetectorConfig, DetectorConfigError, box_blur3,
                                      detect)

RED = ColorClass("red", 340, 20, 0.5, 1.0, 0.5, 1.0, min_area=20, aspect_min=0.2, aspect_max=5.0)


def scene(rect, size=(100, 100), color=(255, 0, 0)):
    arr = np.zeros((size[1], size[0], 3), dtype=np.uint8)
    x, y, w, h = rect
    arr[y:y + h, x:x + w] = color
    return RgbImage.from_rgb(arr)


def test_black_image_has_no_detections():
    assert detect(RgbImage.solid(Resolution(50, 40), (0, 0, 0)), DetectorConfig((RED,))) == []


def test_single_red_rectangle():
    (d,) = detect(scene((30, 40, 20, 10)), DetectorConfig((RED,)))
    assert d.label == "red"
    assert all(abs(a - b) <= 1 for a, b in zip(d.box, (30, 40, 20, 10)))
    assert d.score >= 0.9


def test_aspect_filter_excludes_wide_rectangle():
    cfg = DetectorConfig((ColorClass("red", 340, 20, 0.5, 1, 0.5, 1, 20, 0.5, 1.0),))
    assert detect(scene((30, 40, 20, 10)), cfg) == []


def test_min_area_filter():
    cfg = DetectorConfig((ColorClass("red", 340, 20, 0.5, 1, 0.5, 1, 500, 0.2, 5),))
    assert detect(scene((30, 40, 20, 10)), cfg) == []


def test_hue_ranges_and_multiple_classes():
    arr = np.zeros((60, 60, 3), dtype=np.uint8)
    arr[5:15, 5:25] = (255, 0, 0)
    arr[30:50, 30:40] = (0, 0, 255)
    blue = ColorClass("blue", 200, 260, 0.5, 1, 0.5, 1, 20, 0.2, 5)
    dets = detect(RgbImage.from_rgb(arr), DetectorConfig((RED, blue)))
    assert {(d.label, d.box) for d in dets} >= {("blue", (30, 30, 10, 20))}
    assert {d.label for d in dets} == {"red", "blue"}


def test_hue_wrap_mask():
    hsv = np.array([[[350, 1, 1], [10, 1, 1], [180, 1, 1]]], dtype=float)
    assert RED.mask(hsv).tolist() == [[True, True, False]]


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 60), st.integers(2, 70))
def test_translation_equivariance(dx, dy):
    base = detect(scene((5, 5, 20, 10)), DetectorConfig((RED,)))
    moved = detect(scene((5 + dx, 5 + dy, 20, 10)), DetectorConfig((RED,)))
    assert len(base) == len(moved) == 1
    bx, by, bw, bh = base[0].box
    assert moved[0].box == (bx + dx, by + dy, bw, bh)
    assert moved[0].score == base[0].score


def test_connected_components_match_bfs_oracle(rng):
    for _ in range(20):
        mask = rng.random((15, 17)) < 0.45
        labels, n = ndimage.label(mask)
        got = []
        for i, sl in enumerate(ndimage.find_objects(labels), 1):
            got.append((int((labels == i).sum()), sl[1].start, sl[0].start,
                        sl[1].stop - sl[1].start, sl[0].stop - sl[0].start))
        assert sorted(got) == sorted(components_bfs(mask.tolist()))


def test_diagonal_pixels_are_separate_components():
    arr = np.zeros((4, 4, 3), dtype=np.uint8)
    cls = ColorClass("any", 0, 360, 0, 1, 0.01, 1, 1, 0.01, 100)
    mask = np.zeros((4, 4), bool)
    mask[0, 0] = mask[1, 1] = True
    assert len(components_bfs(mask.tolist())) == 2
    assert ndimage.label(mask)[1] == 2
    assert detect(RgbImage.from_rgb(arr), DetectorConfig((cls,))) == []


def test_blur_edges_replicate_and_round():
    arr = np.zeros((3, 3, 3), dtype=np.uint8)
    arr[1, 1] = 9 * 10 + 4  # 94
    out = box_blur3(arr)
    assert out[1, 1, 0] == 10  # 94/9 = 10.44
    solid = np.full((5, 4, 3), 77, dtype=np.uint8)
    np.testing.assert_array_equal(box_blur3(solid), solid)
    corner = np.zeros((3, 3, 1), dtype=np.uint8)
    corner[0, 0] = 90
    # replicated edges put the corner pixel into 4 of the 9 taps at (0, 0)
    assert box_blur3(corner)[0, 0, 0] == 40


def test_config_parsing(tmp_path):
    text = "# label h_lo h_hi s_lo s_hi v_lo v_hi area amin amax\nred 340 20 0.5 1 0.5 1 20 0.2 5\n\n"
    cfg = DetectorConfig.parse(text)
    assert cfg.classes == (RED,)
    p = tmp_path / "det.cfg"
    p.write_text(text, encoding="utf-8")
    assert DetectorConfig.read(p) == cfg


@pytest.mark.parametrize("text", [
    "red 340 20 0.5 1 0.5 1 20 0.2",
    "red 340 20 0.5 1 0.5 1 0 0.2 5",
    "red 340 20 0.5 1 0.5 1 20 3 2",
    "red 400 20 0.5 1 0.5 1 20 0.2 5",
    "red 340 20 0.9 0.1 0.5 1 20 0.2 5",
    "red 340 20 0.5 1 0.5 1 2.5 0.2 5",
    "",
])
def test_bad_configs(text):
    with pytest.raises(DetectorConfigError):
        DetectorConfig.parse(text)


# -- calibration --------------------------------------------------------------------


@pytest.mark.parametrize("frame,display,box,expected", [
    ((1280, 720), (1280, 720), (10, 20, 30, 40), (10, 20, 30, 40)),
    ((1280, 720), (640, 360), (10, 20, 30, 40), (5, 10, 15, 20)),
    ((100, 100), (200, 100), (0, 0, 100, 100), (50, 0, 100, 100)),
    ((100, 50), (100, 100), (0, 0, 100, 50), (0, 25, 100, 50)),
])
def test_calibration_examples(frame, display, box, expected):
    cal = Calibration(Resolution(*frame), Resolution(*display), Rotation.DEG_0)
    assert calibrate_box(box, cal) == expected


def test_rotate_box_quarter_turns():
    res = Resolution(100, 50)
    box = (10, 5, 20, 8)
    assert rotate_box(box, res, 90) == (50 - 13, 10, 8, 20)
    assert rotate_box(box, res, 180) == (70, 37, 20, 8)
    assert rotate_box(box, res, 270) == (5, 70, 8, 20)
    # four quarter turns is the identity
    b, r = box, res
    for _ in range(4):
        b = rotate_box(b, r, 90)
        r = Resolution(r.height, r.width)
    assert b == box


def test_rotation_90_fits_portrait_display():
    cal = Calibration(Resolution(160, 120), Resolution(120, 160), Rotation.DEG_90)
    assert cal.scale == 1.0 and cal.offset == (0.0, 0.0)
    assert calibrate_box((0, 0, 160, 120), cal) == (0, 0, 120, 160)


boxes = st.tuples(st.integers(0, 150), st.integers(0, 110), st.integers(1, 160), st.integers(1, 120))


@given(boxes)
def test_identity_and_double_half_turn(b):
    res = Resolution(160, 120)
    x, y, w, h = b
    w, h = min(w, 160 - x), min(h, 120 - y)
    if w < 1 or h < 1:
        return
    box = (x, y, w, h)
    assert calibrate_box(box, Calibration(res, res, Rotation.DEG_0)) == box
    half = Calibration(res, res, Rotation.DEG_180)
    assert calibrate_box(calibrate_box(box, half), half) == box


@given(boxes, st.sampled_from(list(Rotation)), st.integers(2, 2000), st.integers(2, 2000))
def test_calibrated_boxes_inside_display(b, rot, dw, dh):
    res = Resolution(160, 120)
    x, y, w, h = b
    w, h = max(1, min(w, 160 - x)), max(1, min(h, 120 - y))
    cal = Calibration(res, Resolution(dw, dh), rot)
    cx, cy, cw, ch = calibrate_box((x, y, w, h), cal)
    assert 0 <= cx and 0 <= cy and cw >= 0 and ch >= 0
    assert cx + cw <= dw and cy + ch <= dh
