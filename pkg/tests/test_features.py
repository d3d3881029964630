import math

import numpy as np
import pytest

from neptune.features import (OWN, PARTNER, RATIOS, VARIABLES, FeatureVector, LabelRow,
                              PairingError, five_point_std, five_points, label_positive,
                              nearest_indices, nearest_sb, read_labels, table1_features,
                              table2_features, table3_features, window_features, window_truth,
                              write_features_csv, write_labels)
from neptune.segmentation import Segment, segment_matrix
from neptune.spectral import MergedMatrix, normalize


def seg(sid, pixels, cluster=1):
    xs = np.array([p[0] for p in pixels])
    ys = np.array([p[1] for p in pixels])
    return Segment(sid, cluster, xs, ys)


def test_vocabulary():
    assert len(VARIABLES) == 18
    assert VARIABLES[:6] == OWN and VARIABLES[6:12] == PARTNER and VARIABLES[12:] == RATIOS


def test_five_points_examples():
    assert five_points(seg(0, [(7, 9)])) == [(7, 9)] * 5
    square = seg(0, [(1, 1), (3, 1), (1, 3), (3, 3)])
    assert sorted(five_points(square)[:4]) == [(1, 1), (1, 3), (3, 1), (3, 3)]
    assert five_points(square)[4] == (2, 2)
    assert five_points(seg(0, [(1, 1), (2, 1), (1, 2)]))[4] == (1, 1)


def test_centre_rounds_half_up():
    # centroid (1.5, 1.5) -> (2, 2)
    assert five_points(seg(0, [(1, 1), (2, 2)]))[4] == (2, 2)


def test_five_point_std_examples():
    m = np.zeros((3, 3))
    m[2, 2] = 1.0  # (3, 3)
    assert five_point_std(seg(0, [(1, 1), (2, 1), (1, 2)]), m) == 0.0
    square = seg(0, [(1, 1), (3, 1), (1, 3), (3, 3)])
    assert five_point_std(square, m) == pytest.approx(0.4, abs=1e-15)
    assert five_point_std(square, np.ones((3, 3))) == 0.0
    assert five_point_std(square, m, "sample") == pytest.approx(math.sqrt(0.2), abs=1e-15)
    line = seg(0, [(1, 2), (2, 2), (3, 2)])
    assert five_point_std(line, np.full((3, 3), 0.7)) == 0.0


def test_table1_examples():
    m = np.zeros((10, 10))
    single = table1_features([seg(0, [(1, 1)])], m)
    assert single[0, 3:].tolist() == [1.0, 1.0, 1.0]
    two = table1_features([seg(0, [(1, i) for i in range(1, 11)]),
                           seg(1, [(x, y) for x in range(2, 5) for y in range(1, 11)])], m)
    assert two[:, 1].tolist() == [10, 30]
    assert two[:, 4].tolist() == [0.25, 0.75]


def test_v2_is_spread_over_size():
    m = np.zeros((4, 4))
    m[0, 0] = 1.0
    m[3, 3] = 1.0
    s = seg(0, [(1, 1), (2, 1), (3, 1), (4, 1), (4, 4)])
    row = table1_features([s], m)[0]
    assert row[0] == row[2] / row[1]


def test_nearest_examples_and_tie():
    a = seg(0, [(5, 5)])
    same = seg(3, [(5, 5)])
    near = seg(1, [(6, 5)])
    far = seg(2, [(7, 5)])
    assert nearest_sb(a, [near, far, same]) is same
    assert nearest_sb(a, [near, far]) is near
    left, right = seg(0, [(4, 5)]), seg(1, [(6, 5)])
    assert nearest_sb(a, [left, right]) is left
    with pytest.raises(PairingError):
        nearest_sb(a, [])


def test_nearest_indices_tie_goes_to_lowest(backend):
    cen_b = np.array([[3.0, 3.0], [1.0, 1.0], [1.0, 1.0], [5.0, 1.0]])
    got = nearest_indices(np.array([[1.0, 1.0], [3.0, 1.0], [2.0, 2.0]]), cen_b)
    # (3,1): distance 4 to idx 0, 1, 2 and 3 -> idx 0; (2,2): distance 2 to 0, 1, 2 -> idx 0
    assert got.tolist() == [1, 0, 0]


def test_table2_examples():
    m = np.zeros((10, 10))
    only = seg(0, [(2, 2), (2, 3)])
    row = table2_features(seg(0, [(2, 2)]), [only], m)
    assert row[3:].tolist() == [1.0, 1.0, 1.0]
    assert row[1] == 2


def test_table3_examples():
    same = np.array([0.3, 5, 0.2, 0.1, 0.4, 0.5])
    assert table3_features(same, same).tolist() == [1.0] * 6
    assert table3_features([0, 10, 0, 0, 0, 0], [1, 4, 2, 1, 1, 1])[1] == 2.5
    assert table3_features([0, 10, 0, 0, 0, 0], [1, 4, 2, 1, 1, 1])[2] == 0.0
    assert table3_features([1, 1, 1, 1, 1, 1], [0, 1, 0, 1, 1, 1])[0] == math.inf


def _window():
    rng = np.random.default_rng(9)
    raw = rng.random((24, 32)) ** 2
    raw[5:11, 8:16] += 1.5
    m = normalize(raw)
    s = segment_matrix(m)
    return m, s.sa, s.sb


def test_window_algebra():
    m, sa, sb = _window()
    fvs = window_features(sa, sb, m)
    assert len(fvs) == len(sa)
    rows = np.array([fv.values() for fv in fvs])
    v = dict(zip(VARIABLES, rows.T))
    assert np.all(np.abs(v["V2"] * v["V3"] - v["V4"]) <= 1e-12)
    for name in ("V5", "V6", "V7"):
        assert v[name].sum() == pytest.approx(1, abs=1e-9)
        assert np.all((v[name] >= 0) & (v[name] <= 1))
    assert np.all(v["V3"] >= 1) and np.all(v["V3"] == np.round(v["V3"]))
    assert np.all(v["V9"] >= 1) and np.all(v["V4"] >= 0) and np.all(v["V10"] >= 0)
    t2 = table1_features(sb, m)
    assert t2[:, 3:].sum(axis=0) == pytest.approx([1, 1, 1], abs=1e-9)
    for own, partner, ratio in zip(OWN, PARTNER, RATIOS):
        expect = np.where(v[partner] == 0, math.inf, v[own] / np.where(v[partner] == 0, 1, v[partner]))
        assert np.array_equal(v[ratio], expect)


def test_window_agrees_with_per_segment_path():
    m, sa, sb = _window()
    fvs = window_features(sa, sb, m)
    t1 = table1_features(sa, m)
    for i, fv in enumerate(fvs[:20]):
        partner_row = table2_features(sa[i], sb, m)
        assert np.array_equal(fv.values()[:6], t1[i])
        assert np.array_equal(fv.values()[6:12], partner_row)
        assert fv.nearest_sb_id == nearest_sb(sa[i], sb).id
        assert fv.get("V3") == sa[i].size
        assert fv.v4 == five_point_std(sa[i], m)


@pytest.mark.parametrize("c", [0.5, 2.0, 4.0])
def test_scaling_by_power_of_two_is_exact(c):
    m, sa, sb = _window()
    base = window_features(sa, sb, m)
    scaled = window_features(sa, sb, m.scaled(c))
    for a, b in zip(base, scaled):
        assert b.v4 == c * a.v4 and b.v10 == c * a.v10
        for name in ("V3", "V9", "V5", "V6", "V7", "V11", "V12", "V13",
                     "V3_9", "V5_11", "V6_12", "V7_13", "V4_10", "V2_8"):
            assert b.get(name) == a.get(name), name


@pytest.mark.parametrize("c", [0.3, 3.7, 1e3])
def test_scaling_by_general_constant(c):
    m, sa, sb = _window()
    base = window_features(sa, sb, m)
    scaled = window_features(sa, sb, m.scaled(c))
    for a, b in zip(base, scaled):
        assert b.v4 == pytest.approx(c * a.v4, rel=1e-12, abs=1e-300)
        for name in ("V3", "V9", "V6", "V12", "V3_9", "V6_12"):
            assert b.get(name) == a.get(name)
        for name in ("V5", "V7", "V11", "V13", "V2_8", "V4_10", "V5_11", "V7_13"):
            assert b.get(name) == pytest.approx(a.get(name), rel=1e-12)


def test_input_order_does_not_matter():
    m, sa, sb = _window()
    rng = np.random.default_rng(0)
    base = window_features(sa, sb, m)
    shuffled = window_features([sa[i] for i in rng.permutation(len(sa))],
                               [sb[i] for i in rng.permutation(len(sb))], m)
    assert [fv.segment_id for fv in shuffled] == [fv.segment_id for fv in base]
    for a, b in zip(base, shuffled):
        assert np.array_equal(a.values(), b.values()) and a.nearest_sb_id == b.nearest_sb_id


def test_window_edge_cases():
    m = MergedMatrix(np.zeros((3, 3)))
    assert window_features([], [seg(0, [(1, 1)])], m) == []
    with pytest.raises(PairingError):
        window_features([seg(0, [(1, 1)])], [], m)


def test_label_positive_examples():
    a = seg(0, [(1, 1), (2, 1)])
    b = seg(1, [(5, 5), (6, 5), (5, 6)])
    assert label_positive([a, b], None) == [0, 0]
    assert label_positive([a, b], (4, 4, 7, 7)) == [0, 1]
    # box centre (10, 10); centroids at distance 5 and 9
    near = seg(0, [(10, 5)])
    far = seg(1, [(10, 19)])
    assert label_positive([far, near], (9, 9, 11, 11)) == [0, 1]
    assert sum(label_positive([a, b, near, far], (1, 1, 20, 20))) == 1


def test_labels_io_and_window_truth(tmp_path):
    rows = [LabelRow(10, 60, 1, 2, 3, 4), LabelRow(61, 90, 5, 6, 7, 8)]
    write_labels(tmp_path / "l.csv", rows)
    assert read_labels(tmp_path / "l.csv") == rows
    assert window_truth(rows, 1, 9) is None
    assert window_truth(rows, 1, 25) == (1, 2, 3, 4)
    assert window_truth(rows, 51, 75) == (5, 6, 7, 8)   # centre frame 63
    assert window_truth(rows, 41, 65) == (1, 2, 3, 4)   # centre frame 53
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_labels(tmp_path / "bad.csv")


def test_features_csv(tmp_path):
    m, sa, sb = _window()
    fvs = window_features(sa, sb, m)
    write_features_csv(tmp_path / "f.csv", fvs)
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0].split(",")[2:-1] == list(VARIABLES)
    assert len(lines) == len(fvs) + 1


def test_feature_vector_accessors():
    fv = FeatureVector(0, 1, *range(18))
    assert fv.get("V7_13") == 17 and fv.as_dict()["V8"] == 6
    assert fv.values().tolist() == list(range(18))
