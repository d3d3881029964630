"""Percentile cut-offs and 4-level binning of segment variables."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .features import RATIOS, VARIABLES, FeatureVector, feature_matrix

PERCENTILE_METHOD = "linear_closest_ranks"

# (p25, p50, p75) per variable, per window length in seconds.
_A1 = {
    5: """
V2 0.025537 0.089672 0.136088
V3 4 14.5 232.5
V4 0.616663 1.83083 5.959598
V5 0.033195 0.079342 0.160908
V6 0.002247 0.012159 0.144687
V7 0.017574 0.054455 0.176347
V8 0.03157 0.095445 0.197203
V9 5 23 187.75
V10 0.817409 2.087051 6.102764
V11 0.001802 0.005235 0.012307
V12 0.000165 0.000753 0.006355
V13 0.002531 0.005998 0.015984
V2_8 0.543143 0.808972 1.39471
V3_9 0.38125 1.294801 2.176598
V4_10 0.475384 1.027277 1.501146
V5_11 7.80108 14.34464 29.0312
V6_12 5.501654 15.77497 50.7646
V7_13 4.08387 9.045111 18.00813
""",
    4: """
V2 0.028521 0.096291 0.181219
V3 4 13 175.5
V4 0.552183 1.605571 5.200332
V5 0.036251 0.094939 0.158282
V6 0.002502 0.011834 0.130142
V7 0.017525 0.055982 0.15279
V8 0.028882 0.092357 0.197203
V9 4 14 258.5
V10 0.555836 1.951793 6.336658
V11 0.001904 0.006055 0.013018
V12 0.000128 0.000523 0.008301
V13 0.001747 0.00508 0.017826
V2_8 0.645632 0.89624 1.350195
V3_9 0.5 1.12129 2.333333
V4_10 0.560464 1.005624 1.50856
V5_11 6.285207 12.07338 27.94023
V6_12 7.657875 15.97658 56.00498
V7_13 5.056071 9.226469 21.33621
""",
    3: """
V2 0.03194 0.096123 0.150733
V3 4 13 159
V4 0.555836 1.566484 5.153229
V5 0.030702 0.082569 0.143622
V6 0.002227 0.01207 0.106299
V7 0.018207 0.047486 0.136789
V8 0.027022 0.096123 0.197203
V9 3 11 212
V10 0.394405 1.457435 6.193818
V11 0.001662 0.005614 0.011111
V12 0.000108 0.000351 0.007508
V13 0.001214 0.003857 0.015949
V2_8 0.588914 0.856317 1.418486
V3_9 0.5 1.402542 2.5
V4_10 0.706932 1.084431 1.927521
V5_11 6.548546 13.00316 29.72699
V6_12 8.128327 19 64.53311
V7_13 5.06461 10.99971 23.4315
""",
    2: """
V2 0.027442 0.096123 0.181219
V3 4 11 185
V4 0.544352 1.31045 5.561496
V5 0.032004 0.081686 0.140064
V6 0.001807 0.006944 0.110295
V7 0.015953 0.039461 0.137062
V8 0.028312 0.096123 0.197203
V9 4 15 232
V10 0.555836 1.972027 6.934729
V11 0.001601 0.004623 0.010108
V12 0.000116 0.000536 0.007775
V13 0.00136 0.004605 0.016561
V2_8 0.653128 0.897169 1.275932
V3_9 0.5 1.25969 2.084053
V4_10 0.502151 1.019212 1.580454
V5_11 8.305886 13.30195 28.31558
V6_12 6.32996 16.15734 48.24208
V7_13 4.833126 10.26422 23.45575
""",
    # published verbatim; the ratio rows repeat V2..V7
    1: """
V2 0.043662 0.102924 0.197203
V3 3 8 109.75
V4 0.394405 1.099948 4.615003
V5 0.032882 0.074918 0.12968
V6 0.001575 0.006651 0.073862
V7 0.01319 0.034193 0.119747
V8 0.039327 0.111167 0.197203
V9 3 10 123
V10 0.547526 1.344413 5.361706
V11 0.001796 0.005085 0.008561
V12 0.000106 0.000323 0.004121
V13 0.001244 0.003122 0.012171
V2_8 0.043662 0.102924 0.197203
V3_9 3 8 109.75
V4_10 0.394405 1.099948 4.615003
V5_11 0.032882 0.074918 0.12968
V6_12 0.001575 0.006651 0.073862
V7_13 0.01319 0.034193 0.119747
""",
}


def _parse(block):
    out = {}
    for line in block.strip().splitlines():
        name, *vals = line.split()
        out[name] = tuple(float(v) for v in vals)
    return out


BUILTIN = {m: _parse(b) for m, b in _A1.items()}


@dataclass(frozen=True)
class PercentileTable:
    window_s: int
    cutoffs: dict[str, tuple[float, float, float]] = field(repr=False)

    def __post_init__(self):
        if set(self.cutoffs) != set(VARIABLES):
            raise ValueError("percentile table must cover exactly the 18 variables")
        for name, (a, b, c) in self.cutoffs.items():
            if not a <= b <= c:
                raise ValueError(f"{name}: cut-offs not ordered ({a}, {b}, {c})")

    def __getitem__(self, name):
        return self.cutoffs[name]

    def matrix(self) -> np.ndarray:
        """(18, 3) cut-offs in ``VARIABLES`` order."""
        return np.array([self.cutoffs[v] for v in VARIABLES], dtype=np.float64)

    def to_json(self) -> dict:
        return {"window_s": self.window_s,
                "variables": {v: list(self.cutoffs[v]) for v in VARIABLES}}

    @classmethod
    def from_json(cls, d) -> "PercentileTable":
        return cls(int(d["window_s"]),
                   {k: tuple(float(x) for x in v) for k, v in d["variables"].items()})


@dataclass
class QuantizedVector:
    bins: dict[str, int]
    v1: int | None = None

    def __post_init__(self):
        bad = {k: b for k, b in self.bins.items() if b not in (1, 2, 3, 4)}
        if bad:
            raise ValueError(f"bins outside 1..4: {bad}")

    def as_array(self) -> np.ndarray:
        return np.array([self.bins[v] for v in VARIABLES], dtype=np.uint8)


def percentile(values, p: float) -> float:
    """Linear interpolation between closest ranks.

    Rank ``h = (n - 1) p / 100 + 1`` (1-based); the value is
    ``x[floor h] + (h - floor h) (x[ceil h] - x[floor h])``.
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    if x.size == 0:
        raise ValueError("no values")
    h = (x.size - 1) * p / 100.0 + 1
    lo = math.floor(h)
    hi = math.ceil(h)
    a, b = x[lo - 1], x[hi - 1]
    if a == b:
        return float(a)
    return float(a + (h - lo) * (b - a))


def compute_percentiles(features, window_s: int) -> PercentileTable:
    """25th/50th/75th cut-offs per variable over a corpus of feature vectors.

    ``features`` is a list of FeatureVector or an ``(n, 18)`` array.
    """
    rows = features if isinstance(features, np.ndarray) else feature_matrix(features)
    if rows.shape[0] < 4:
        raise ValueError(f"need at least 4 feature vectors, got {rows.shape[0]}")
    cut = {}
    for j, name in enumerate(VARIABLES):
        cut[name] = tuple(percentile(rows[:, j], p) for p in (25, 50, 75))
    return PercentileTable(window_s, cut)


def bin_values(values: np.ndarray, cutoffs: np.ndarray) -> np.ndarray:
    """Bins 1..4 for an ``(n, 18)`` value array against ``(18, 3)`` cut-offs.

    A value equal to a cut-off falls in the lower bin. The zero-denominator
    sentinel (+inf) is always bin 4, even when a cut-off is itself infinite.
    """
    values = np.asarray(values, dtype=np.float64)
    bins = (1 + (values > cutoffs[:, 0]) + (values > cutoffs[:, 1])
            + (values > cutoffs[:, 2])).astype(np.uint8)
    bins[np.isposinf(values)] = 4
    return bins


def quantize(fv: FeatureVector, table: PercentileTable) -> QuantizedVector:
    b = bin_values(fv.values()[None, :], table.matrix())[0]
    return QuantizedVector(dict(zip(VARIABLES, map(int, b))), fv.v1)


def builtin_table(window_s: int) -> PercentileTable:
    if window_s not in BUILTIN:
        raise ValueError(f"no built-in cut-offs for a {window_s} s window")
    return PercentileTable(window_s, dict(BUILTIN[window_s]))


def repaired_table(window_s: int, computed: PercentileTable) -> PercentileTable:
    """Built-in cut-offs, with the 1 s ratio rows taken from ``computed``."""
    base = dict(BUILTIN[window_s])
    if window_s == 1:
        for name in RATIOS:
            base[name] = computed[name]
    return PercentileTable(window_s, base)
