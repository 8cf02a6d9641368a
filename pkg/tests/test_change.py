import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vidtext.change import (
    detect_change,
    evaluate_pair,
    gray_histogram,
    histogram_difference,
)
from vidtext.errors import DimensionMismatchError
from vidtext.frames import Frame


def brute_force_histogram(pixels):
    """Independent oracle: plain per-level recount."""
    counts = [0] * 256
    for v in pixels.ravel().tolist():
        counts[v] += 1
    return counts


def brute_force_difference(a, b):
    ha, hb = brute_force_histogram(a), brute_force_histogram(b)
    return sum(abs(x - y) for x, y in zip(ha, hb)) / a.size


def frame_of(values, index=0):
    return Frame(index, np.asarray(values, dtype=np.uint8))


small_frames = arrays(
    np.uint8,
    st.tuples(st.integers(2, 12), st.integers(2, 12)),
    elements=st.integers(0, 255),
)


def test_histogram_uniform_frame():
    hist = gray_histogram(frame_of([[0, 0], [0, 0]]))
    assert hist[0] == 4
    assert hist.sum() == 4


def test_histogram_counts_match_oracle():
    frame = frame_of([[0, 0], [0, 255]])
    assert gray_histogram(frame).tolist() == brute_force_histogram(frame.pixels)


def test_histogram_mass_at_paper_frame_size():
    frame = Frame(0, np.zeros((288, 352), dtype=np.uint8))
    assert int(gray_histogram(frame).sum()) == 101376


def test_difference_identical_frames():
    f = frame_of([[3, 7], [9, 200]])
    assert histogram_difference(f, f) == 0.0


def test_difference_extremes():
    a = frame_of([[0, 0], [0, 0]])
    b = frame_of([[255, 255], [255, 255]])
    assert histogram_difference(a, b) == 2.0


def test_difference_half_changed():
    # (|3-2| + |1-2|) / 4 = 0.5, also checked against the recount oracle
    a = frame_of([[0, 0], [0, 255]])
    b = frame_of([[0, 0], [255, 255]])
    assert histogram_difference(a, b) == 0.5
    assert histogram_difference(a, b) == brute_force_difference(a.pixels, b.pixels)


def test_difference_dimension_mismatch():
    a = Frame(0, np.zeros((4, 4), dtype=np.uint8))
    b = Frame(1, np.zeros((4, 5), dtype=np.uint8))
    with pytest.raises(DimensionMismatchError):
        histogram_difference(a, b)


@given(small_frames, small_frames)
def test_difference_properties(pa, pb):
    if pa.shape != pb.shape:
        pb = np.resize(pb, pa.shape)
    a, b = Frame(0, pa), Frame(1, np.ascontiguousarray(pb))
    d = histogram_difference(a, b)
    assert 0.0 <= d <= 2.0
    assert d == histogram_difference(b, a)
    assert histogram_difference(a, a) == 0.0


@given(small_frames, st.randoms(use_true_random=False))
def test_difference_is_position_blind(pixels, rnd):
    flat = pixels.ravel().tolist()
    rnd.shuffle(flat)
    shuffled = np.asarray(flat, dtype=np.uint8).reshape(pixels.shape)
    a, b = Frame(0, pixels), Frame(0, shuffled)
    base = Frame(1, np.zeros(pixels.shape, dtype=np.uint8))
    assert histogram_difference(a, base) == histogram_difference(b, base)


def test_detect_change_strictness():
    assert detect_change(0.5, 0.1) is True
    assert detect_change(0.0, 0.0) is False
    assert detect_change(2.0, 0.1) is True
    with pytest.raises(ValueError):
        detect_change(0.5, -0.1)


def test_evaluate_pair_carries_index():
    a = frame_of([[0, 0], [0, 0]], index=7)
    b = frame_of([[255, 255], [255, 255]], index=8)
    decision = evaluate_pair(a, b, theta=0.5)
    assert decision.pair_index == 7
    assert decision.d_h == 2.0
    assert decision.triggered
