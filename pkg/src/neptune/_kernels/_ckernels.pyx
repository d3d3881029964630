# cython: language_level=3
"""Compiled kernels. Behaviour is identical to ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

NAME = "cython"


# ---------------------------------------------------------------------------
# exact 1-D k-means
# ---------------------------------------------------------------------------

cdef inline double _cost(const double[::1] W, const double[::1] S1,
                         const double[::1] S2, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef double w = W[j + 1] - W[i]
    cdef double s = S1[j + 1] - S1[i]
    cdef double c = (S2[j + 1] - S2[i]) - s * s / w
    return c if c > 0.0 else 0.0


cdef void _solve(Py_ssize_t jlo, Py_ssize_t jhi, Py_ssize_t ilo, Py_ssize_t ihi,
                 const double[::1] prev, double[::1] cur, long long[::1] back,
                 const double[::1] W, const double[::1] S1, const double[::1] S2) noexcept nogil:
    cdef Py_ssize_t mid, i, top, opt
    cdef double best, val
    while jlo <= jhi:
        mid = (jlo + jhi) // 2
        top = ihi if ihi < mid else mid
        best = INFINITY
        opt = ilo
        for i in range(ilo, top + 1):
            val = prev[i - 1] + _cost(W, S1, S2, i, mid)
            if val < best:
                best = val
                opt = i
        cur[mid] = best
        back[mid] = opt
        # recurse on the left half, loop on the right
        _solve(jlo, mid - 1, ilo, opt, prev, cur, back, W, S1, S2)
        jlo = mid + 1
        ilo = opt


def kmeans_dp(xs, ws, Py_ssize_t k):
    cdef cnp.ndarray[double, ndim=1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] wv = np.ascontiguousarray(ws, dtype=np.float64)
    cdef Py_ssize_t u = x.shape[0]
    if u < k:
        raise ValueError("fewer distinct values than clusters")
    shift = float(np.average(x, weights=wv))
    d = x - shift
    cdef double[::1] W = np.concatenate(([0.0], np.cumsum(wv)))
    cdef double[::1] S1 = np.concatenate(([0.0], np.cumsum(wv * d)))
    cdef double[::1] S2 = np.concatenate(([0.0], np.cumsum(wv * d * d)))
    cdef double[::1] prev = np.empty(u)
    cdef double[::1] cur
    cdef long long[:, ::1] back = np.zeros((k, u), dtype=np.int64)
    cdef Py_ssize_t j, c
    for j in range(u):
        prev[j] = _cost(W, S1, S2, 0, j)
    for c in range(1, k):
        cur = np.full(u, np.inf)
        with nogil:
            _solve(c, u - 1, c, u - 1, prev, cur, back[c], W, S1, S2)
        prev = cur
    starts = np.zeros(k, dtype=np.int64)
    j = u - 1
    for c in range(k - 1, 0, -1):
        starts[c] = back[c, j]
        j = starts[c] - 1
    return starts


# ---------------------------------------------------------------------------
# nearest point (uniform grid, exact)
# ---------------------------------------------------------------------------

from libc.math cimport floor, sqrt, ceil


def nearest_points(a, b):
    a_arr = np.ascontiguousarray(a, dtype=np.float64).reshape(-1, 2)
    b_arr = np.ascontiguousarray(b, dtype=np.float64).reshape(-1, 2)
    cdef Py_ssize_t na = a_arr.shape[0], nb = b_arr.shape[0]
    out = np.zeros(na, dtype=np.int64)
    if na == 0:
        return out
    if nb == 0:
        raise ValueError("no points to search")
    cdef const double[:, ::1] A = a_arr
    cdef const double[:, ::1] B = b_arr
    cdef long long[::1] res = out
    cdef double minx = b_arr[:, 0].min(), maxx = b_arr[:, 0].max()
    cdef double miny = b_arr[:, 1].min(), maxy = b_arr[:, 1].max()
    # about two points per cell
    cdef double cell = max(sqrt((maxx - minx + 1.0) * (maxy - miny + 1.0) / (nb / 2.0 + 1.0)), 1e-9)
    cdef Py_ssize_t gw = <Py_ssize_t>floor((maxx - minx) / cell) + 1
    cdef Py_ssize_t gh = <Py_ssize_t>floor((maxy - miny) / cell) + 1
    cx_arr = np.minimum(np.floor((b_arr[:, 0] - minx) / cell).astype(np.int64), gw - 1)
    cy_arr = np.minimum(np.floor((b_arr[:, 1] - miny) / cell).astype(np.int64), gh - 1)
    key = cy_arr * gw + cx_arr
    order_arr = np.argsort(key, kind="stable").astype(np.int64)
    start_arr = np.searchsorted(key[order_arr], np.arange(gw * gh + 1)).astype(np.int64)
    cdef const long long[::1] order = order_arr
    cdef const long long[::1] start = start_arr
    cdef Py_ssize_t i, j, p, r, gx, gy, cx, cy, x_lo, x_hi, y_lo, y_hi, c, rmax
    cdef double ax, ay, dx, dy, d2, best, bound
    cdef long long bj
    rmax = gw if gw > gh else gh
    with nogil:
        for i in range(na):
            ax = A[i, 0]
            ay = A[i, 1]
            dx = floor((ax - minx) / cell)
            dy = floor((ay - miny) / cell)
            cx = 0 if dx < 0 else (gw - 1 if dx > gw - 1 else <Py_ssize_t>dx)
            cy = 0 if dy < 0 else (gh - 1 if dy > gh - 1 else <Py_ssize_t>dy)
            best = INFINITY
            bj = -1
            r = 0
            while r <= rmax:
                # unvisited points lie more than (r - 1) cells away; one more
                # cell of slack absorbs rounding in the cell assignment
                bound = (r - 2) * cell
                if bound > 0 and bound * bound > best:
                    break
                y_lo = cy - r
                y_hi = cy + r
                x_lo = cx - r
                x_hi = cx + r
                for gy in range(y_lo if y_lo > 0 else 0, (y_hi if y_hi < gh - 1 else gh - 1) + 1):
                    for gx in range(x_lo if x_lo > 0 else 0, (x_hi if x_hi < gw - 1 else gw - 1) + 1):
                        if gy != y_lo and gy != y_hi and gx != x_lo and gx != x_hi:
                            continue
                        c = gy * gw + gx
                        for p in range(start[c], start[c + 1]):
                            j = order[p]
                            dx = ax - B[j, 0]
                            dy = ay - B[j, 1]
                            d2 = dx * dx + dy * dy
                            if d2 < best or (d2 == best and j < bj):
                                best = d2
                                bj = j
                r += 1
            res[i] = bj
    return out


# ---------------------------------------------------------------------------
# connected components (two-pass union-find)
# ---------------------------------------------------------------------------

cdef inline Py_ssize_t _find(Py_ssize_t[::1] parent, Py_ssize_t a) noexcept nogil:
    cdef Py_ssize_t root = a, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        nxt = parent[a]
        parent[a] = root
        a = nxt
    return root


cdef inline void _union(Py_ssize_t[::1] parent, Py_ssize_t p, Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t ra = _find(parent, p), rb = _find(parent, q)
    if ra < rb:
        parent[rb] = ra
    elif rb < ra:
        parent[ra] = rb


def label_components(labels, bint eight=False):
    cdef int[:, ::1] lab = np.ascontiguousarray(labels, dtype=np.int32)
    cdef Py_ssize_t h = lab.shape[0], w = lab.shape[1]
    cdef Py_ssize_t n = h * w
    cdef Py_ssize_t[::1] parent = np.arange(n, dtype=np.intp)
    out_arr = np.full((h, w), -1, dtype=np.int32)
    cdef int[:, ::1] out = out_arr
    cdef Py_ssize_t[::1] ids = np.full(n, -1, dtype=np.intp)
    cdef Py_ssize_t x, y, p, r, count = 0
    cdef int v
    with nogil:
        for y in range(h):
            for x in range(w):
                v = lab[y, x]
                if v < 0:
                    continue
                p = y * w + x
                if y > 0:
                    if lab[y - 1, x] == v:
                        _union(parent, p, p - w)
                    if eight:
                        if x > 0 and lab[y - 1, x - 1] == v:
                            _union(parent, p, p - w - 1)
                        if x + 1 < w and lab[y - 1, x + 1] == v:
                            _union(parent, p, p - w + 1)
                if x > 0 and lab[y, x - 1] == v:
                    _union(parent, p, p - 1)
        for y in range(h):
            for x in range(w):
                if lab[y, x] < 0:
                    continue
                r = _find(parent, y * w + x)
                if ids[r] < 0:
                    ids[r] = count
                    count += 1
                out[y, x] = <int>ids[r]
    return out_arr, count


# ---------------------------------------------------------------------------
# confidence-1 rule mining
# ---------------------------------------------------------------------------

cdef class _Miner:
    cdef const unsigned char[:, ::1] bins
    cdef Py_ssize_t n_vars, min_size, max_size, nbins
    cdef Py_ssize_t[:, ::1] pos_buf
    cdef Py_ssize_t[:, ::1] neg_buf
    cdef signed char[::1] chosen
    cdef object chosen_arr
    cdef unsigned char[:, ::1] covered
    cdef object covered_arr
    cdef object rows
    cdef object cov

    def __init__(self, bins, pos_rows, neg_rows, min_size, max_size, nbins):
        self.bins = bins
        self.n_vars = bins.shape[1]
        self.min_size = min_size
        self.max_size = max_size
        self.nbins = nbins
        depth = max_size + 1
        pb = np.zeros((depth, max(len(pos_rows), 1)), dtype=np.intp)
        nb = np.zeros((depth, max(len(neg_rows), 1)), dtype=np.intp)
        pb[0, :len(pos_rows)] = pos_rows
        nb[0, :len(neg_rows)] = neg_rows
        self.pos_buf = pb
        self.neg_buf = nb
        self.chosen_arr = np.zeros(self.n_vars, dtype=np.int8)
        self.chosen = self.chosen_arr
        self.rows = []
        self.cov = []
        self.covered_arr = np.zeros((max_size + 1, bins.shape[0]), dtype=np.uint8)
        self.covered = self.covered_arr

    cdef void visit(self, Py_ssize_t start, Py_ssize_t depth,
                    Py_ssize_t npos, Py_ssize_t nneg):
        cdef Py_ssize_t v, b, i, r, np2, nn2, need, stop
        cdef Py_ssize_t d = depth + 1
        need = self.min_size - d
        stop = self.n_vars - (need if need > 0 else 0)
        for v in range(start, stop):
            for b in range(1, self.nbins + 1):
                np2 = 0
                for i in range(npos):
                    r = self.pos_buf[depth, i]
                    if self.bins[r, v] == b:
                        self.pos_buf[d, np2] = r
                        np2 += 1
                if np2 == 0:
                    continue
                nn2 = 0
                for i in range(nneg):
                    r = self.neg_buf[depth, i]
                    if self.bins[r, v] == b:
                        self.neg_buf[d, nn2] = r
                        nn2 += 1
                self.chosen[v] = <signed char>b
                if d >= self.min_size and nn2 == 0:
                    self.rows.append(self.chosen_arr.tobytes())
                    self.cov.append(np2)
                    for i in range(np2):
                        self.covered[d, self.pos_buf[d, i]] = 1
                if d < self.max_size:
                    self.visit(v + 1, d, np2, nn2)
            self.chosen[v] = 0


def mine_rules(bins, positive, Py_ssize_t min_size, Py_ssize_t max_size, Py_ssize_t nbins=4):
    b = np.ascontiguousarray(bins, dtype=np.uint8)
    positive = np.asarray(positive, dtype=bool)
    n_vars = b.shape[1]
    pos_rows = np.flatnonzero(positive)
    neg_rows = np.flatnonzero(~positive)
    if len(pos_rows) == 0:
        return (np.zeros((0, n_vars), dtype=np.int8), np.zeros(0, dtype=np.int64),
                np.zeros((max_size + 1, b.shape[0]), dtype=bool))
    m = _Miner(b, pos_rows, neg_rows, min_size, max_size, nbins)
    m.visit(0, 0, len(pos_rows), len(neg_rows))
    covered = m.covered_arr.astype(bool)
    if not m.rows:
        return np.zeros((0, n_vars), dtype=np.int8), np.zeros(0, dtype=np.int64), covered
    ants = np.frombuffer(b"".join(m.rows), dtype=np.int8).reshape(len(m.rows), n_vars).copy()
    return ants, np.array(m.cov, dtype=np.int64), covered
