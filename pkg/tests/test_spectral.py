import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from neptune.frames import FrameWindow, read_pgm
from neptune.spectral import (dump_csv, dump_pgm, flat_index, flatten, max_abs_fft,
                              merge_window, normalize, raw_spectral_max, unflatten)

from oracles import naive_dft_max


def test_constant_series():
    assert max_abs_fft([5, 5, 5, 5], "exclude_dc") == 0
    assert max_abs_fft([5, 5, 5, 5], "include_dc") == 20


def test_nyquist_bin():
    assert max_abs_fft([1, 0, 1, 0], "exclude_dc") == pytest.approx(2, rel=1e-12)


def test_bad_policy_and_short_series():
    with pytest.raises(ValueError):
        max_abs_fft([1, 2, 3], "dc_maybe")
    with pytest.raises(ValueError):
        max_abs_fft([1])


@pytest.mark.parametrize("length", [2, 3, 7, 25, 26])
def test_matches_naive_dft(length):
    rng = np.random.default_rng(length)
    for _ in range(10):
        x = rng.integers(0, 256, length).astype(float)
        for policy, dc in (("exclude_dc", False), ("include_dc", True)):
            assert max_abs_fft(x, policy) == pytest.approx(naive_dft_max(x, dc), rel=1e-9, abs=1e-9)


def test_stack_kernel_agrees_with_series_kernel():
    rng = np.random.default_rng(4)
    frames = rng.integers(0, 256, (25, 5, 70), dtype=np.uint8)
    raw = raw_spectral_max(frames, "exclude_dc", rows_per_chunk=2)
    for y in range(5):
        for x in range(70):
            assert raw[y, x] == pytest.approx(max_abs_fft(frames[:, y, x]), rel=1e-12)


def test_identical_frames_give_no_signal():
    frames = np.full((25, 4, 6), 77, np.uint8)
    m = merge_window(FrameWindow(frames, 25, 1))
    assert m.no_signal
    assert not m.values.any()


def test_single_alternating_pixel():
    frames = np.full((50, 3, 4), 9, np.uint8)
    frames[::2, 1, 2] = 0
    frames[1::2, 1, 2] = 255
    m = merge_window(FrameWindow(frames, 25, 2))
    expected = np.zeros((3, 4))
    expected[1, 2] = 1.0
    assert np.array_equal(m.values, expected)
    assert m.raw_max == pytest.approx(naive_dft_max(frames[:, 1, 2].astype(float), False), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(2, 30), st.integers(1, 4), st.integers(1, 4))),
       st.sampled_from(["exclude_dc", "include_dc"]))
def test_normalized_range(frames, policy):
    m = normalize(raw_spectral_max(frames, policy), policy)
    assert m.values.shape == frames.shape[1:]
    assert m.values.min() >= 0 and m.values.max() <= 1
    if not m.no_signal:
        assert m.values.min() == 0 and m.values.max() == 1


def test_flat_index_examples():
    assert flat_index(1, 1, 447) == 1
    assert flat_index(447, 1, 447) == 447
    assert flat_index(1, 2, 447) == 448
    assert flat_index(2, 2, 447) == 449
    assert flat_index(447, 2, 447) == 894


def test_flatten_small_and_round_trip():
    f = flatten(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert f.values.tolist() == [1.0, 2.0, 3.0, 4.0]
    rng = np.random.default_rng(0)
    m = rng.random((7, 5))
    flat = flatten(m)
    assert np.array_equal(unflatten(flat), m)
    assert flat.values[flat_index(4, 6, 5) - 1] == m[5, 3]


def test_dumps(tmp_path):
    m = normalize(np.array([[0.0, 1.0], [2.0, 4.0]]))
    dump_pgm(m, tmp_path / "m.pgm")
    assert read_pgm(tmp_path / "m.pgm").values.tolist() == [[0, 64], [128, 255]]
    dump_csv(m, tmp_path / "m.csv")
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "x,y,value"
    assert lines[2] == "2,1,0.25"
