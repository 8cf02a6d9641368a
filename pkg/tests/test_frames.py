import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from PIL import Image

from vidtext.errors import ConfigError, DecodeError, DimensionMismatchError, NoFramesError
from vidtext.frames import (
    ArraySequence,
    Frame,
    decode_image,
    open_sequence,
    to_grayscale,
    write_pgm,
)


def _write_frames(directory, names, size=(16, 12), value=100):
    for name in names:
        arr = np.full((size[1], size[0]), value, dtype=np.uint8)
        Image.fromarray(arr).save(directory / name)


def test_to_grayscale_extremes():
    rgb = np.array([[[255, 255, 255], [0, 0, 0], [255, 0, 0]]], dtype=np.uint8)
    gray = to_grayscale(rgb)
    assert gray.tolist() == [[255, 0, 76]]


def test_to_grayscale_rejects_wrong_shape():
    with pytest.raises(ValueError):
        to_grayscale(np.zeros((4, 4), dtype=np.uint8))


@given(st.integers(min_value=0, max_value=255))
def test_grayscale_idempotent_on_gray_pixels(v):
    rgb = np.full((2, 2, 3), v, dtype=np.uint8)
    assert np.array_equal(to_grayscale(rgb), np.full((2, 2), v, dtype=np.uint8))


def test_frame_validates_shape_and_dtype():
    with pytest.raises(ValueError):
        Frame(0, np.zeros((4, 4), dtype=np.float64))
    with pytest.raises(ValueError):
        Frame(0, np.zeros((0, 4), dtype=np.uint8))
    f = Frame(3, np.zeros((5, 7), dtype=np.uint8))
    assert (f.width, f.height, f.index) == (7, 5, 3)


def test_open_sequence_numeric_order(tmp_path):
    # Unpadded numbers must sort numerically, not lexically.
    _write_frames(tmp_path, ["frame_10.png", "frame_2.png", "frame_1.png"])
    seq = open_sequence(tmp_path)
    assert [seq.path(i).name for i in range(3)] == ["frame_1.png", "frame_2.png", "frame_10.png"]
    assert (seq.width, seq.height) == (16, 12)
    assert seq.frame_rate == 25.0


def test_open_sequence_spec_shape(tmp_path):
    _write_frames(tmp_path, [f"frame_{i:04d}.png" for i in range(50)], size=(352, 288))
    seq = open_sequence(tmp_path)
    assert len(seq) == 50
    assert (seq.width, seq.height) == (352, 288)


def test_open_sequence_single_file_is_no_frames(tmp_path):
    _write_frames(tmp_path, ["frame_0.png"])
    with pytest.raises(NoFramesError):
        open_sequence(tmp_path)


def test_open_sequence_mixed_dimensions(tmp_path):
    _write_frames(tmp_path, ["a_0.png"], size=(352, 288))
    _write_frames(tmp_path, ["a_1.png"], size=(320, 240))
    with pytest.raises(DimensionMismatchError):
        open_sequence(tmp_path)


def test_open_sequence_undecodable_file(tmp_path):
    _write_frames(tmp_path, ["f_0.png"])
    (tmp_path / "f_1.png").write_bytes(b"this is not a png")
    with pytest.raises(DecodeError):
        open_sequence(tmp_path)


def test_open_sequence_glob(tmp_path):
    _write_frames(tmp_path, ["x_0.png", "x_1.png", "skip.txt.png"])
    (tmp_path / "other.txt").write_text("noise")
    seq = open_sequence(str(tmp_path / "x_*.png"))
    assert len(seq) == 2


def test_open_sequence_manifest(tmp_path):
    _write_frames(tmp_path, ["a.png", "b.png", "c.png"])
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps(["c.png", "a.png"]))
    seq = open_sequence(tmp_path)
    assert [seq.path(i).name for i in range(2)] == ["c.png", "a.png"]
    # Explicit manifest path works too.
    seq = open_sequence(manifest)
    assert len(seq) == 2


def test_open_sequence_bad_manifest(tmp_path):
    (tmp_path / "manifest.json").write_text('{"not": "a list"}')
    with pytest.raises(ConfigError):
        open_sequence(tmp_path)


def test_rereading_is_bit_identical(tmp_path):
    rng = np.random.default_rng(5)
    for i in range(3):
        arr = rng.integers(0, 256, size=(20, 30), dtype=np.uint8)
        Image.fromarray(arr).save(tmp_path / f"n{i}.png")
    seq = open_sequence(tmp_path)
    first = [seq.frame(i).pixels.copy() for i in range(3)]
    again = [seq.frame(i).pixels for i in range(3)]
    for a, b in zip(first, again):
        assert np.array_equal(a, b)


def test_pgm_roundtrip(tmp_path):
    arr = np.arange(48, dtype=np.uint8).reshape(6, 8)
    path = tmp_path / "map.pgm"
    write_pgm(path, arr)
    assert np.array_equal(decode_image(path), arr)


def test_rgb_png_decodes_through_luma(tmp_path):
    rgb = np.zeros((4, 4, 3), dtype=np.uint8)
    rgb[..., 0] = 255
    Image.fromarray(rgb).save(tmp_path / "red.png")
    assert decode_image(tmp_path / "red.png").tolist()[0][0] == 76


def test_concurrent_reads_are_consistent(tmp_path):
    from concurrent.futures import ThreadPoolExecutor

    rng = np.random.default_rng(11)
    arrays_on_disk = [rng.integers(0, 256, size=(24, 24), dtype=np.uint8) for _ in range(6)]
    for i, arr in enumerate(arrays_on_disk):
        Image.fromarray(arr).save(tmp_path / f"f{i}.png")
    seq = open_sequence(tmp_path)
    indices = [i % 6 for i in range(60)]
    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda i: seq.frame(i).pixels, indices))
    for i, pixels in zip(indices, results):
        assert np.array_equal(pixels, arrays_on_disk[i])


def test_array_sequence_checks_dimensions():
    with pytest.raises(DimensionMismatchError):
        ArraySequence([np.zeros((4, 4), dtype=np.uint8), np.zeros((4, 5), dtype=np.uint8)])
    seq = ArraySequence([np.zeros((4, 4), dtype=np.uint8)] * 3, frame_rate=30.0)
    assert len(seq) == 3
    assert seq.frame_rate == 30.0
    assert [f.index for f in seq] == [0, 1, 2]
