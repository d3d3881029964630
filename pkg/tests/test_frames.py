import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from neptune.frames import (FrameError, FrameWindow, GrayImage, crop, load_frame_sequence,
                            partition_windows, read_pgm, read_png, stack, to_gray,
                            write_frame_sequence, write_pgm)


def test_gray_image_rejects_empty_and_out_of_range():
    with pytest.raises(FrameError):
        GrayImage(np.zeros((0, 3)))
    with pytest.raises(FrameError):
        GrayImage(np.array([[256]]))
    img = GrayImage(np.array([[1, 2, 3], [4, 5, 6]]))
    assert (img.width, img.height) == (3, 2)
    assert img.at(3, 2) == 6 and img.at(1, 2) == 4


def test_luma_white_and_mixed_pixel():
    assert to_gray(np.array([[[255, 255, 255]]]))[0, 0] == 255
    # 0.299 * 100 + 0.587 * 200 + 0.114 * 50 = 29.9 + 117.4 + 5.7 = 153.0
    assert to_gray(np.array([[[100, 200, 50]]]))[0, 0] == 153


def test_luma_rounds_half_up():
    # 0.299 * 0 + 0.587 * 0 + 0.114 * 5 = 0.57 -> 1; 0.114 * 4 = 0.456 -> 0
    assert to_gray(np.array([[[0, 0, 5], [0, 0, 4]]])).tolist() == [[1, 0]]


def test_pgm_round_trip_and_identical_directory(tmp_path):
    rng = np.random.default_rng(0)
    frame = rng.integers(0, 256, (281, 447), dtype=np.uint8)
    write_frame_sequence(tmp_path, [frame] * 125)
    frames = load_frame_sequence(tmp_path)
    assert len(frames) == 125
    assert all(f == frames[0] for f in frames)
    assert (frames[0].width, frames[0].height) == (447, 281)
    assert np.array_equal(frames[0].values, frame)


def test_pgm_header_with_comment(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# made by hand\n2 1\n255\n\x07\x09")
    assert read_pgm(p).values.tolist() == [[7, 9]]


def test_png_rgb_and_gray(tmp_path):
    Image.fromarray(np.array([[[100, 200, 50], [255, 255, 255]]], dtype=np.uint8)).save(tmp_path / "a.png")
    Image.fromarray(np.array([[10, 20]], dtype=np.uint8)).save(tmp_path / "b.png")
    assert read_png(tmp_path / "a.png").values.tolist() == [[153, 255]]
    frames = load_frame_sequence(tmp_path, "png_dir")
    assert [f.values.tolist() for f in frames] == [[[153, 255]], [[10, 20]]]


def test_raw_y8(tmp_path):
    data = bytes(range(12))
    (tmp_path / "s.raw").write_bytes(data)
    frames = load_frame_sequence(tmp_path / "s.raw", "raw_y8", width=3, height=2)
    assert len(frames) == 2
    assert frames[1].values.tolist() == [[6, 7, 8], [9, 10, 11]]
    with pytest.raises(FrameError):
        load_frame_sequence(tmp_path / "s.raw", "raw_y8", width=5, height=1)


def test_missing_and_inconsistent_inputs(tmp_path):
    with pytest.raises(FrameError):
        load_frame_sequence(tmp_path / "nope")
    with pytest.raises(FrameError):
        load_frame_sequence(tmp_path)  # empty directory
    write_pgm(tmp_path / "a.pgm", np.zeros((2, 2), np.uint8))
    write_pgm(tmp_path / "b.pgm", np.zeros((3, 2), np.uint8))
    with pytest.raises(FrameError):
        load_frame_sequence(tmp_path)


def test_crop_identity_bounds_and_pool_crop_size():
    img = GrayImage(np.arange(300 * 500).reshape(300, 500) % 256)
    assert crop(img, 1, 1, img.width, img.height) == img
    c = crop(img, 10, 5, 447, 281)
    assert (c.width, c.height) == (447, 281)
    assert c.at(1, 1) == img.at(10, 5)
    with pytest.raises(FrameError):
        crop(img, 60, 1, 447, 281)


def test_partition_windows_examples():
    frames = np.zeros((250, 2, 2), np.uint8)
    assert len(partition_windows(frames, 25, 5, stride_s=5)) == 2
    wins = partition_windows(frames[:125], 25, 4, stride_s=1)
    assert [w.start_frame for w in wins] == [1, 26]
    assert [w.end_frame for w in wins] == [100, 125]
    with pytest.raises(FrameError):
        partition_windows(frames[:100], 25, 5)


def test_window_checks_frame_count():
    with pytest.raises(FrameError):
        FrameWindow(np.zeros((24, 2, 2), np.uint8), 25, 1)
    assert FrameWindow(np.zeros((125, 2, 3), np.uint8), 25, 5).shape == (2, 3)


def test_stack_rejects_mixed_sizes():
    with pytest.raises(FrameError):
        stack([GrayImage(np.zeros((2, 2))), GrayImage(np.zeros((2, 3)))])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_crop_matches_slicing(w, h, data):
    rng = np.random.default_rng(w * 7 + h)
    img = GrayImage(rng.integers(0, 256, (h, w), dtype=np.uint8))
    x0 = data.draw(st.integers(1, w))
    y0 = data.draw(st.integers(1, h))
    cw = data.draw(st.integers(1, w - x0 + 1))
    ch = data.draw(st.integers(1, h - y0 + 1))
    c = crop(img, x0, y0, cw, ch)
    for x in range(1, cw + 1):
        for y in range(1, ch + 1):
            assert c.at(x, y) == img.at(x0 + x - 1, y0 + y - 1)
