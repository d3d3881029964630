"""Slow, obviously-correct reference implementations used by the tests.

None of these import the package under test.
"""
from __future__ import annotations

import cmath
import itertools
import math
from collections import deque


def naive_dft_max(series, include_dc: bool) -> float:
    """max_k |sum_t x_t exp(-2 pi i k t / L)| over k = 0 (or 1) .. floor(L / 2)."""
    n = len(series)
    best = 0.0
    for k in range(0 if include_dc else 1, n // 2 + 1):
        acc = 0j
        for t, x in enumerate(series):
            acc += x * cmath.exp(-2j * math.pi * k * t / n)
        best = max(best, abs(acc))
    return best


def brute_kmeans_sse(values, k: int) -> float:
    """Minimum within-cluster SSE over every split of the sorted distinct values into k runs."""
    xs = sorted(values)
    uniq = sorted(set(xs))
    counts = {u: xs.count(u) for u in uniq}
    n = len(uniq)
    # two-pass SSE of every run uniq[a:b], then try every set of cut points
    cost = {}
    for a in range(n):
        for b in range(a + 1, n + 1):
            group = [u for u in uniq[a:b] for _ in range(counts[u])]
            mean = sum(group) / len(group)
            cost[a, b] = sum((g - mean) ** 2 for g in group)
    best = math.inf
    for cuts in itertools.combinations(range(1, n), k - 1):
        bounds = (0, *cuts, n)
        best = min(best, sum(cost[a, b] for a, b in zip(bounds, bounds[1:])))
    return best


def flood_fill(grid, retained, eight: bool):
    """Components as a set of frozensets of (row, col)."""
    h, w = len(grid), len(grid[0])
    steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    if eight:
        steps += [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    seen = set()
    comps = set()
    for r in range(h):
        for c in range(w):
            if (r, c) in seen or grid[r][c] not in retained:
                continue
            lab = grid[r][c]
            comp = {(r, c)}
            seen.add((r, c))
            queue = deque([(r, c)])
            while queue:
                y, x = queue.popleft()
                for dy, dx in steps:
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx < w and (ny, nx) not in seen and grid[ny][nx] == lab:
                        seen.add((ny, nx))
                        comp.add((ny, nx))
                        queue.append((ny, nx))
            comps.add(frozenset(comp))
    return comps


def enumerate_rules(rows, labels, size: int, nbins: int = 4):
    """Every (variables, bins) antecedent of ``size`` items that matches a positive and no negative.

    Returns {tuple((var_index, bin), ...): positives_covered}.
    """
    n_vars = len(rows[0])
    out = {}
    for combo in itertools.combinations(range(n_vars), size):
        for bins in itertools.product(range(1, nbins + 1), repeat=size):
            pos = neg = 0
            for row, lab in zip(rows, labels):
                if all(row[v] == b for v, b in zip(combo, bins)):
                    if lab:
                        pos += 1
                    else:
                        neg += 1
            if pos and not neg:
                out[tuple(zip(combo, bins))] = pos
    return out


def closest_ranks_percentile(values, p: float) -> float:
    """Linear interpolation between closest ranks, rank h = (n - 1) p / 100 + 1 (1-based)."""
    xs = sorted(values)
    h = (len(xs) - 1) * p / 100 + 1
    lo = math.floor(h)
    if lo >= len(xs) or xs[lo - 1] == xs[lo]:
        return float(xs[lo - 1])
    return xs[lo - 1] + (h - lo) * (xs[lo] - xs[lo - 1])


def pearson(xs, ys) -> float:
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    return sxy / math.sqrt(sxx * syy)
