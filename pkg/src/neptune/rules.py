"""Confidence-1 association rules over binned segment variables.

A rule is a set of ``variable = bin`` items; it fires on a segment whose bins
agree on every item. Mined rules match at least one positive training row and
no negative one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .features import VARIABLES
from .quantization import QuantizedVector

MIN_VARIABLES = 3
MAX_VARIABLES = len(VARIABLES) + 1  # the label counts as one variable


@dataclass(frozen=True, order=True)
class Item:
    variable: str
    bin: int

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValueError(f"unknown variable {self.variable!r}")
        if self.bin not in (1, 2, 3, 4):
            raise ValueError(f"bin {self.bin} outside 1..4")


@dataclass(frozen=True)
class Rule:
    antecedent: tuple[Item, ...]
    positives_covered: int
    negatives_covered: int = 0

    def __post_init__(self):
        if self.negatives_covered != 0:
            raise ValueError("rules must have confidence 1 (no negatives covered)")
        if self.positives_covered < 1:
            raise ValueError("rules must cover at least one positive")
        names = [it.variable for it in self.antecedent]
        if len(set(names)) != len(names):
            raise ValueError("at most one item per variable")


def _row_to_items(row, names=VARIABLES):
    return tuple(Item(names[j], int(row[j])) for j in np.flatnonzero(row))


@dataclass
class LabeledDataset:
    """Binned rows (``(n, n_vars)`` in 1..4) with 0/1 labels."""

    window_s: int
    bins: np.ndarray
    labels: np.ndarray
    variables: tuple[str, ...] = VARIABLES

    def __post_init__(self):
        self.bins = np.asarray(self.bins, dtype=np.uint8).reshape(-1, len(self.variables))
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape[0] != self.bins.shape[0]:
            raise ValueError("one label per row")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if self.bins.size and (self.bins.min() < 1 or self.bins.max() > 4):
            raise ValueError("bins must lie in 1..4")

    @classmethod
    def from_quantized(cls, window_s, qvs) -> "LabeledDataset":
        bins = np.array([q.as_array() for q in qvs], dtype=np.uint8).reshape(-1, len(VARIABLES))
        return cls(window_s, bins, [q.v1 for q in qvs])

    @property
    def positives(self) -> int:
        return int(self.labels.sum())

    @property
    def negatives(self) -> int:
        return int(self.labels.size - self.labels.sum())


@dataclass
class RuleSet:
    """Rules mined with ``num_variables - 1`` antecedent items, in canonical order.

    Antecedents are held compactly: row ``i`` of ``antecedents`` has the bin of
    each used variable and 0 elsewhere.
    """

    window_s: int
    num_variables: int
    antecedents: np.ndarray = field(repr=False)
    covered: np.ndarray = field(repr=False)
    total_positives_covered: int = 0
    variables: tuple[str, ...] = VARIABLES

    def __len__(self):
        return int(self.antecedents.shape[0])

    @property
    def rules(self) -> list[Rule]:
        return [Rule(_row_to_items(r, self.variables), int(c))
                for r, c in zip(self.antecedents, self.covered)]

    @property
    def multi_positive_share(self) -> float:
        """Fraction of rules that each match two or more positives."""
        if len(self) == 0:
            return 0.0
        return float(np.count_nonzero(self.covered >= 2)) / len(self)

    def fires(self, bins: np.ndarray) -> np.ndarray:
        """Per-row flag: some rule matches. ``bins`` is ``(n, n_vars)``."""
        bins = np.atleast_2d(np.asarray(bins, dtype=np.int8))
        if len(self) == 0 or bins.shape[0] == 0:
            return np.zeros(bins.shape[0], dtype=bool)
        rows, back = np.unique(bins, axis=0, return_inverse=True)
        n_vars = bins.shape[1]
        nbins = max(int(rows.max()), int(self.antecedents.max()), 1)
        # masks[v, b] = packed rows with bins[:, v] == b; b == 0 (unused) is all ones
        masks = np.empty((n_vars, nbins + 1, (rows.shape[0] + 7) // 8), dtype=np.uint8)
        masks[:, 0] = 0xFF
        for b in range(1, nbins + 1):
            masks[:, b] = np.packbits(rows.T == b, axis=1)
        hit = np.zeros(masks.shape[2], dtype=np.uint8)
        chunk = max(1, 8_000_000 // masks.shape[2])
        for s in range(0, len(self), chunk):
            a = self.antecedents[s:s + chunk]
            acc = masks[0, a[:, 0]]
            for v in range(1, n_vars):
                acc &= masks[v, a[:, v]]
            hit |= np.bitwise_or.reduce(acc, axis=0)
        return np.unpackbits(hit, count=rows.shape[0]).astype(bool)[back.ravel()]

    def to_json(self) -> dict:
        return {"num_variables": self.num_variables,
                "total_positives_covered": self.total_positives_covered,
                "rules": [[{"var": self.variables[j], "bin": int(r[j])} for j in np.flatnonzero(r)]
                          for r in self.antecedents],
                "positives_covered": [int(c) for c in self.covered]}

    @classmethod
    def from_json(cls, window_s, d, variables=VARIABLES) -> "RuleSet":
        index = {v: j for j, v in enumerate(variables)}
        ants = np.zeros((len(d["rules"]), len(variables)), dtype=np.int8)
        for i, rule in enumerate(d["rules"]):
            for it in rule:
                ants[i, index[it["var"]]] = it["bin"]
        cov = np.array(d.get("positives_covered", [1] * len(d["rules"])), dtype=np.int64)
        return cls(int(window_s), int(d["num_variables"]), ants, cov,
                   int(d.get("total_positives_covered", 0)), tuple(variables))


def _check(data, size):
    if data.positives == 0:
        raise ValueError("dataset has no positive rows")
    n_vars = data.bins.shape[1]
    if not 1 <= size <= n_vars:
        raise ValueError(f"antecedent size must be in 1..{n_vars}, got {size}")


def mine_rules(data: LabeledDataset, antecedent_size: int) -> list[Rule]:
    """Every negative-free antecedent of exactly ``antecedent_size`` items."""
    _check(data, antecedent_size)
    ants, cov, _ = _kernels.mine_rules(data.bins, data.labels == 1,
                                       antecedent_size, antecedent_size)
    return [Rule(_row_to_items(r, data.variables), int(c)) for r, c in zip(ants, cov)]


def sweep_rulesets(data: LabeledDataset, min_variables: int = MIN_VARIABLES,
                   max_variables: int | None = None) -> list[RuleSet]:
    """One rule set per variable count (antecedent size + 1 for the label)."""
    n_vars = data.bins.shape[1]
    if max_variables is None:
        max_variables = n_vars + 1
    _check(data, min_variables - 1)
    _check(data, max_variables - 1)
    lo, hi = min_variables - 1, max_variables - 1
    ants, cov, covered = _kernels.mine_rules(data.bins, data.labels == 1, lo, hi)
    sizes = np.count_nonzero(ants, axis=1)
    out = []
    for size in range(lo, hi + 1):
        sel = sizes == size
        out.append(RuleSet(data.window_s, size + 1, ants[sel], cov[sel],
                           int(np.count_nonzero(covered[size])), data.variables))
    return out


def select_final(sweep: list[RuleSet]) -> RuleSet:
    """Widest coverage, then most multi-positive rules, then fewest variables."""
    live = [rs for rs in sweep if len(rs)]
    if not live:
        raise ValueError("no rule set in the sweep has any rules")
    best = max(rs.total_positives_covered for rs in live)
    live = [rs for rs in live if rs.total_positives_covered == best]
    return min(live, key=lambda rs: (-rs.multi_positive_share, rs.num_variables))


def apply_rules(rules: RuleSet, qv) -> bool:
    bins = qv.as_array() if isinstance(qv, QuantizedVector) else np.asarray(qv)
    return bool(rules.fires(bins[None, :])[0])


def coverage_report(sweep: list[RuleSet]) -> list[dict]:
    """Per sweep entry: rule count, positives reached and multi-positive share."""
    return [{"num_variables": rs.num_variables, "rules": len(rs),
             "positives_covered": rs.total_positives_covered,
             "multi_positive_share": rs.multi_positive_share} for rs in sweep]
