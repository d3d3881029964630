"""Time the compiled kernels against the pure Python fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--quick]

Inputs are sized like one 447x281 window: about 125k pixels to label, tens of
thousands of segment centroids to pair, and a training-sized rule search.
Each row reports the best of ``--repeat`` runs and checks that both backends
return identical results.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from neptune import _kernels


def workloads(quick: bool):
    rng = np.random.default_rng(0)
    h, w = (120, 160) if quick else (281, 447)

    uniq = np.unique(rng.random(h * w // 4) ** 3)
    weights = rng.integers(1, 20, uniq.size).astype(float)
    yield "kmeans_dp k=4", "kmeans_dp", (uniq, weights, 4)

    labels = rng.integers(0, 3, (h, w)).astype(np.int32)
    labels[labels == 0] = -1
    yield f"label_components {h}x{w}", "label_components", (labels, False)

    n_a, n_b = (h * w // 8, h * w // 5)
    a = rng.random((n_a, 2)) * [w, h]
    b = rng.random((n_b, 2)) * [w, h]
    yield f"nearest_points {n_a}x{n_b}", "nearest_points", (a, b)

    rows = 400 if quick else 1500
    bins = rng.integers(1, 5, (rows, 18)).astype(np.uint8)
    positive = rng.random(rows) < 0.02
    positive[:2] = True
    bins[1] = bins[0]
    hi = 5 if quick else 8
    yield f"mine_rules {rows} rows sizes 2..{hi}", "mine_rules", (bins, positive, 2, hi)


def same(x, y) -> bool:
    if isinstance(x, tuple):
        return all(same(p, q) for p, q in zip(x, y))
    return np.array_equal(x, y)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--quick", action="store_true", help="smaller inputs")
    args = p.parse_args(argv)

    mods = _kernels.available()
    names = sorted(mods, reverse=True)   # python first
    print(f"{'kernel':42s}" + "".join(f"{n:>12s}" for n in names) + f"{'speedup':>10s}")
    for title, fn, call_args in workloads(args.quick):
        times, outs = {}, {}
        for n in names:
            func = getattr(mods[n], fn)
            outs[n] = func(*call_args)
            times[n] = min(timeit.repeat(lambda: func(*call_args), number=1, repeat=args.repeat))
        if len(names) > 1:
            assert same(outs[names[0]], outs[names[1]]), f"{fn}: backends disagree"
            speed = f"{times['python'] / times['cython']:9.1f}x"
        else:
            speed = f"{'n/a':>10s}"
        print(f"{title:42s}" + "".join(f"{times[n]:11.4f}s" for n in names) + speed)
    if "cython" not in mods:
        print("compiled kernels are not built; only the fallback was timed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
