import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import softmax_scalar
from skyfeed.frames import Resolution, RgbImage
from skyfeed.inference.model import (ClassifierModel, ModelFormatError, Recognition,
                                     TruncatedModelError, class_scores, classify, color_histogram,
                                     featurize, load_model, save_model, softmax, top_k)

TABLE_I = {"joystick": 0.1904, "laptop": 0.1168, "laptop monitor": 0.1476, "tractor": 0.1288,
           "sports car": 0.2874, "racer": 0.2716, "convertible": 0.1345, "cars in general": 0.2317,
           "cat": 0.2279, "seashore": 0.2444}


def model(L, B, S=64, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return ClassifierModel(tuple(f"label{i}" for i in range(L)),
                           rng.normal(0, scale, (L, B ** 3)), rng.normal(0, scale, L), B, S)


# -- file format ------------------------------------------------------------------


def test_minimal_model():
    m = load_model(save_model(ClassifierModel(("a", "b"), [[0.5], [-1.0]], [0, 0], 1, 4)))
    assert m.labels == ("a", "b") and m.feature_dim == 1 and m.input_side == 4


def test_header_layout():
    data = save_model(ClassifierModel(("ab",), [[1.0]], [2.0], 1, 300))
    assert data[:4] == b"SKYM" and data[4] == 1
    assert data[5:7] == (1).to_bytes(2, "little") and data[7] == 1
    assert data[8:10] == (300).to_bytes(2, "little")
    assert data[10:13] == b"\x02ab"
    assert np.frombuffer(data[13:], "<f4").tolist() == [1.0, 2.0]


def test_roundtrip_byte_exact():
    data = save_model(model(7, 3, S=32, seed=3))
    assert save_model(load_model(data)) == data
    assert load_model(data) == model(7, 3, S=32, seed=3)


def test_unicode_label_roundtrip():
    m = ClassifierModel(("kedi", "çay bahçesi"), np.zeros((2, 8)), [0, 0], 2, 8)
    assert load_model(save_model(m)).labels == m.labels


@pytest.mark.parametrize("cut", [12, 20, 100])
def test_truncated(cut):
    data = save_model(model(3, 3))
    with pytest.raises(TruncatedModelError):
        load_model(data[:cut])


def test_bad_magic():
    with pytest.raises(ModelFormatError, match="magic"):
        load_model(b"NOPE" + save_model(model(2, 1))[4:])


def test_nonfinite_weight():
    data = bytearray(save_model(model(2, 1)))
    data[-8:-4] = np.float32(np.nan).tobytes()
    with pytest.raises(ModelFormatError, match="non-finite"):
        load_model(bytes(data))


def test_label_weight_count_mismatch():
    data = save_model(model(2, 2))
    with pytest.raises(ModelFormatError):
        load_model(data + b"\0\0\0\0")
    with pytest.raises(ModelFormatError):
        ClassifierModel(("a", "b"), np.zeros((3, 8)), np.zeros(2), 2)
    with pytest.raises(ModelFormatError):
        ClassifierModel(tuple(map(str, range(1001))), np.zeros((1001, 1)), np.zeros(1001), 1)


# -- features --------------------------------------------------------------------


def test_solid_red_histogram():
    m = ClassifierModel(tuple("ab"), np.zeros((2, 8)), [0, 0], 2, 4)
    f = featurize(RgbImage.solid(Resolution(4, 4), (255, 0, 0)), m)
    expected = np.zeros(8)
    expected[(1 * 2 + 0) * 2 + 0] = 1.0
    np.testing.assert_array_equal(f, expected)


def test_half_red_half_blue():
    arr = np.array([[[255, 0, 0], [0, 0, 255]], [[255, 0, 0], [0, 0, 255]]], dtype=np.uint8)
    m = ClassifierModel(tuple("ab"), np.zeros((2, 8)), [0, 0], 2, 2)
    f = featurize(RgbImage.from_rgb(arr), m)
    assert f[4] == 0.5 and f[1] == 0.5 and f.sum() == 1.0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10000))
def test_features_sum_to_one(bins, seed):
    rgb = np.random.default_rng(seed).integers(0, 256, (10, 14, 3), dtype=np.uint8)
    assert abs(color_histogram(rgb, bins).sum() - 1) <= 1e-9


def test_empty_histogram_guard():
    h = color_histogram(np.zeros((0, 0, 3), np.uint8), 2)
    np.testing.assert_array_equal(h, np.full(8, 1 / 8))


# -- scoring ----------------------------------------------------------------------


def test_uniform_softmax_topk():
    m = ClassifierModel(tuple("abcd"), np.zeros((4, 1)), np.zeros(4), 1)
    out = classify(RgbImage.solid(Resolution(2, 2), (1, 2, 3)), m, 3)
    assert out == [Recognition(c, 0.25) for c in "abc"]


def test_logits_2_1_0():
    m = ClassifierModel(("x", "y", "z"), np.zeros((3, 1)), [2.0, 1.0, 0.0], 1)
    out = classify(RgbImage.solid(Resolution(2, 2), (9, 9, 9)), m, 3)
    expected = softmax_scalar([2, 1, 0])  # 0.66524, 0.24473, 0.09003
    assert [r.label for r in out] == ["x", "y", "z"]
    assert [r.score for r in out] == pytest.approx(expected, abs=1e-12)
    assert out[0].score == pytest.approx(0.6652, abs=5e-5)


def test_table_one_full_vector_top3():
    labels = list(TABLE_I)
    out = top_k([TABLE_I[k] for k in labels], labels, 3)
    assert [r.label for r in out] == ["sports car", "racer", "seashore"]


def test_table_one_sports_car_group():
    group = {"sports car": 0.2874, "racer": 0.2716, "convertible": 0.1345,
             "tractor": 0.1288, "laptop": 0.1168}
    out = top_k(list(group.values()), list(group), 3)
    assert [r.label for r in out] == ["sports car", "racer", "convertible"]
    assert [r.score for r in out] == [0.2874, 0.2716, 0.1345]


def test_topk_length_and_tiebreak():
    assert [r.label for r in top_k([0.5, 0.5], ["b", "a"], 5)] == ["a", "b"]


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 1000), st.integers(1, 4), st.integers(0, 10000))
def test_softmax_normalization_random_models(L, B, seed):
    m = model(L, B, S=8, seed=seed)
    img = RgbImage.from_rgb(np.random.default_rng(seed).integers(0, 256, (8, 8, 3), dtype=np.uint8))
    s = class_scores(img, m)
    assert abs(s.sum() - 1) <= 1e-6
    assert ((s > 0) & (s < 1)).all() or L == 1


@given(st.lists(st.integers(-400, 400), min_size=1, max_size=30), st.integers(-8000, 8000))
def test_argmax_invariance_under_shift(eighths, shift):
    # multiples of 1/8 keep the shifted logits exact in float64
    logits = np.array(eighths) / 8
    labels = [f"l{i:02d}" for i in range(len(logits))]
    a = top_k(softmax(logits), labels, 5)
    b = top_k(softmax(logits + shift / 8), labels, 5)
    assert [r.label for r in a] == [r.label for r in b]


def test_recognition_score_bounds():
    with pytest.raises(ValueError):
        Recognition("x", 1.5)
