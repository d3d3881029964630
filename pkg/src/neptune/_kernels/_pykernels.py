"""Pure Python / numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` exactly (same outputs, same ordering) and are
used when the compiled module is unavailable or ``NEPTUNE_PURE_PYTHON=1``.
"""
from __future__ import annotations

import numpy as np

NAME = "python"


# ---------------------------------------------------------------------------
# exact 1-D k-means (dynamic programming over sorted distinct values)
# ---------------------------------------------------------------------------

def _prefix_sums(xs, ws):
    shift = float(np.average(xs, weights=ws))
    d = xs - shift
    W = np.concatenate(([0.0], np.cumsum(ws)))
    S1 = np.concatenate(([0.0], np.cumsum(ws * d)))
    S2 = np.concatenate(([0.0], np.cumsum(ws * d * d)))
    return W, S1, S2


def _cost(W, S1, S2, i, j):
    # SSE of distinct values i..j (inclusive), vectorised over i and j
    w = W[j + 1] - W[i]
    s = S1[j + 1] - S1[i]
    c = (S2[j + 1] - S2[i]) - s * s / w
    return np.maximum(c, 0.0)


def _segment_argmin(vals, starts, lengths):
    """First index of the minimum within each contiguous segment."""
    mins = np.minimum.reduceat(vals, starts)
    hit = vals == np.repeat(mins, lengths)
    pos = np.arange(vals.size)
    pos = np.where(hit, pos, vals.size)
    first = np.minimum.reduceat(pos, starts)
    return mins, first - starts


def kmeans_dp(xs, ws, k):
    """Optimal contiguous k-partition of sorted distinct ``xs`` with weights ``ws``.

    Returns the start index of each cluster (length ``k``, first entry 0).
    """
    xs = np.asarray(xs, dtype=np.float64)
    ws = np.asarray(ws, dtype=np.float64)
    u = xs.size
    if u < k:
        raise ValueError("fewer distinct values than clusters")
    W, S1, S2 = _prefix_sums(xs, ws)
    idx = np.arange(u)
    prev = _cost(W, S1, S2, np.zeros(u, dtype=np.int64), idx)
    back = np.zeros((k, u), dtype=np.int64)
    for c in range(1, k):
        cur = np.full(u, np.inf)
        # level-synchronous divide and conquer on the monotone argmin
        tasks = np.array([[c, u - 1, c, u - 1]], dtype=np.int64)
        while tasks.size:
            jlo, jhi, ilo, ihi = tasks.T
            mid = (jlo + jhi) // 2
            top = np.minimum(ihi, mid)
            lengths = top - ilo + 1
            starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
            flat_i = np.repeat(ilo - starts, lengths) + np.arange(lengths.sum())
            flat_j = np.repeat(mid, lengths)
            vals = prev[flat_i - 1] + _cost(W, S1, S2, flat_i, flat_j)
            best, off = _segment_argmin(vals, starts, lengths)
            opt = ilo + off
            cur[mid] = best
            back[c, mid] = opt
            left = np.stack([jlo, mid - 1, ilo, opt], axis=1)
            right = np.stack([mid + 1, jhi, opt, ihi], axis=1)
            nxt = np.concatenate((left, right))
            tasks = nxt[nxt[:, 0] <= nxt[:, 1]]
        prev = cur
    starts = np.zeros(k, dtype=np.int64)
    j = u - 1
    for c in range(k - 1, 0, -1):
        starts[c] = back[c, j]
        j = starts[c] - 1
    return starts


# ---------------------------------------------------------------------------
# connected components
# ---------------------------------------------------------------------------

def _find(parent, a):
    root = a
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        parent[a], a = root, parent[a]
    return root


def label_components(labels, eight=False):
    """Label connected runs of equal, non-negative ``labels``.

    Pixels with label < 0 are background. Components are numbered 0.. in
    raster order of their first pixel; background gets -1.
    """
    labels = np.ascontiguousarray(labels, dtype=np.int32)
    h, w = labels.shape
    flat = labels.ravel().tolist()
    n = h * w
    parent = list(range(n))
    if eight:
        offsets = ((-1, -1), (-1, 0), (-1, 1), (0, -1))
    else:
        offsets = ((-1, 0), (0, -1))
    for y in range(h):
        row = y * w
        for x in range(w):
            p = row + x
            lab = flat[p]
            if lab < 0:
                continue
            for dy, dx in offsets:
                yy, xx = y + dy, x + dx
                if yy < 0 or xx < 0 or xx >= w:
                    continue
                q = yy * w + xx
                if flat[q] != lab:
                    continue
                ra, rb = _find(parent, p), _find(parent, q)
                if ra != rb:
                    if ra < rb:
                        parent[rb] = ra
                    else:
                        parent[ra] = rb
    out = [-1] * n
    ids = {}
    for p in range(n):
        if flat[p] < 0:
            continue
        r = _find(parent, p)
        cid = ids.get(r)
        if cid is None:
            cid = ids[r] = len(ids)
        out[p] = cid
    return np.array(out, dtype=np.int32).reshape(h, w), len(ids)


# ---------------------------------------------------------------------------
# confidence-1 rule mining
# ---------------------------------------------------------------------------

def mine_rules(bins, positive, min_size, max_size, nbins=4):
    """Depth-first enumeration of negative-free antecedents.

    Returns ``(antecedents, covered, union)``: ``antecedents`` is an int8
    matrix (rule x variable, 0 = variable unused, else the bin), ``covered``
    the number of positive rows each rule matches and ``union[s, r]`` whether
    row ``r`` is matched by some rule of size ``s``. Rules come out in
    pre-order of the search (variables ascending, bins ascending).
    """
    bins = np.asarray(bins, dtype=np.uint8)
    positive = np.asarray(positive, dtype=bool)
    n_rows, n_vars = bins.shape
    pos_rows = np.flatnonzero(positive)
    neg_rows = np.flatnonzero(~positive)
    pmask = [[0] * (nbins + 1) for _ in range(n_vars)]
    nmask = [[0] * (nbins + 1) for _ in range(n_vars)]
    for v in range(n_vars):
        col = bins[:, v]
        for b in range(1, nbins + 1):
            pmask[v][b] = _bitmask(col[pos_rows] == b)
            nmask[v][b] = _bitmask(col[neg_rows] == b)

    out_rows = []
    out_cov = []
    union = [0] * (max_size + 1)
    chosen = [0] * n_vars

    def visit(start, depth, pm, nm):
        for v in range(start, n_vars - (min_size - depth - 1 if min_size > depth + 1 else 0)):
            pv, nv = pmask[v], nmask[v]
            for b in range(1, nbins + 1):
                p2 = pm & pv[b]
                if not p2:
                    continue
                n2 = nm & nv[b]
                chosen[v] = b
                d = depth + 1
                if d >= min_size and not n2:
                    out_rows.append(tuple(chosen))
                    out_cov.append(p2.bit_count())
                    union[d] |= p2
                if d < max_size:
                    visit(v + 1, d, p2, n2)
            chosen[v] = 0

    all_pos = (1 << len(pos_rows)) - 1
    all_neg = (1 << len(neg_rows)) - 1
    if len(pos_rows):
        visit(0, 0, all_pos, all_neg)
    ants = np.array(out_rows, dtype=np.int8).reshape(len(out_rows), n_vars)
    covered = np.zeros((max_size + 1, n_rows), dtype=bool)
    for d, m in enumerate(union):
        for i, r in enumerate(pos_rows):
            if m >> i & 1:
                covered[d, r] = True
    return ants, np.array(out_cov, dtype=np.int64), covered


def _bitmask(flags):
    idx = np.flatnonzero(flags)
    if idx.size == 0:
        return 0
    buf = np.zeros(int(idx[-1]) // 8 + 1, dtype=np.uint8)
    np.bitwise_or.at(buf, idx // 8, (1 << (idx % 8)).astype(np.uint8))
    return int.from_bytes(buf.tobytes(), "little")


def _nearest_brute(a, b, chunk=1024):
    out = np.empty(len(a), dtype=np.int64)
    for s in range(0, len(a), chunk):
        blk = a[s:s + chunk]
        d2 = ((blk[:, None, 0] - b[None, :, 0]) ** 2
              + (blk[:, None, 1] - b[None, :, 1]) ** 2)
        out[s:s + chunk] = np.argmin(d2, axis=1)
    return out


def nearest_points(a, b):
    """Index into ``b`` of the closest point (squared distance) for each row of ``a``.

    Ties go to the lowest index. Points of ``b`` are bucketed on a grid of
    about two per cell and each query scans its 3x3 cell block; an answer
    closer than the block's inner radius is final, the rest use brute force.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    if len(a) * len(b) <= 1 << 16:
        return _nearest_brute(a, b)
    lo = np.minimum(a.min(axis=0), b.min(axis=0))
    hi = np.maximum(a.max(axis=0), b.max(axis=0))
    extent = float(max(hi[0] - lo[0], hi[1] - lo[1], 1.0))
    cells = max(1, int(np.sqrt(len(b) / 2)))
    size = extent / cells
    ncol = cells + 1

    def cell_of(p):
        return np.minimum((p - lo) // size, cells).astype(np.int64)

    cb = cell_of(b)
    key = cb[:, 1] * ncol + cb[:, 0]
    order = np.argsort(key, kind="stable")   # ascending index inside each cell
    starts = np.searchsorted(key[order], np.arange(ncol * ncol + 1))

    ca = cell_of(a)
    q_ids, cand = [], []
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            cx, cy = ca[:, 0] + dx, ca[:, 1] + dy
            ok = (cx >= 0) & (cx < ncol) & (cy >= 0) & (cy < ncol)
            cid = cy[ok] * ncol + cx[ok]
            s0, s1 = starts[cid], starts[cid + 1]
            n = s1 - s0
            q = np.repeat(np.flatnonzero(ok), n)
            offs = np.arange(n.sum()) - np.repeat(np.cumsum(n) - n, n)
            q_ids.append(q)
            cand.append(order[np.repeat(s0, n) + offs])
    q = np.concatenate(q_ids)
    c = np.concatenate(cand)
    d2 = (a[q, 0] - b[c, 0]) ** 2 + (a[q, 1] - b[c, 1]) ** 2
    srt = np.lexsort((c, d2, q))
    q, c, d2 = q[srt], c[srt], d2[srt]
    first = np.ones(q.size, dtype=bool)
    first[1:] = q[1:] != q[:-1]
    out = np.full(len(a), -1, dtype=np.int64)
    best = np.full(len(a), np.inf)
    out[q[first]] = c[first]
    best[q[first]] = d2[first]
    # anything outside the block is at least one cell width away from the query
    inner = size * (1 - 1e-9)
    todo = np.flatnonzero(~(best < inner * inner))
    if todo.size:
        out[todo] = _nearest_brute(a[todo], b)
    return out
