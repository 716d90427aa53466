# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled 2-d tree for max-norm k-nearest-neighbour radii and the strict
per-axis range counts used by the KSG estimator.

Mirrors ``_kdtree_py`` exactly; both must return identical integers and
identical distances for the same input.
"""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()

ctypedef cnp.intp_t idx_t


cdef struct Tree:
    double* px
    double* py
    idx_t* perm
    idx_t* lo
    idx_t* hi
    double* x0
    double* x1
    double* y0
    double* y1
    idx_t leafsize
    idx_t n_nodes


cdef inline double _fmax(double a, double b) noexcept nogil:
    return a if a > b else b


cdef inline double _fabs(double a) noexcept nogil:
    return a if a >= 0 else -a


cdef void _select(double* key, double* other, idx_t* perm, idx_t lo, idx_t hi, idx_t nth) noexcept nogil:
    # quickselect on key[lo:hi] so key[nth] is the nth smallest; other/perm follow key
    cdef idx_t left = lo, right = hi - 1, i, j, mid
    cdef double pivot, t
    cdef idx_t ti
    while right > left:
        mid = left + (right - left) // 2
        # median of three into key[mid]
        if key[mid] < key[left]:
            t = key[mid]; key[mid] = key[left]; key[left] = t
            t = other[mid]; other[mid] = other[left]; other[left] = t
            ti = perm[mid]; perm[mid] = perm[left]; perm[left] = ti
        if key[right] < key[left]:
            t = key[right]; key[right] = key[left]; key[left] = t
            t = other[right]; other[right] = other[left]; other[left] = t
            ti = perm[right]; perm[right] = perm[left]; perm[left] = ti
        if key[right] < key[mid]:
            t = key[right]; key[right] = key[mid]; key[mid] = t
            t = other[right]; other[right] = other[mid]; other[mid] = t
            ti = perm[right]; perm[right] = perm[mid]; perm[mid] = ti
        pivot = key[mid]
        i = left
        j = right
        while i <= j:
            while key[i] < pivot:
                i += 1
            while key[j] > pivot:
                j -= 1
            if i <= j:
                t = key[i]; key[i] = key[j]; key[j] = t
                t = other[i]; other[i] = other[j]; other[j] = t
                ti = perm[i]; perm[i] = perm[j]; perm[j] = ti
                i += 1
                j -= 1
        if nth <= j:
            right = j
        elif nth >= i:
            left = i
        else:
            return


cdef void _build(Tree* t, idx_t node, idx_t lo, idx_t hi) noexcept nogil:
    cdef idx_t i, mid
    cdef double ax0 = t.px[lo], ax1 = t.px[lo], ay0 = t.py[lo], ay1 = t.py[lo]
    for i in range(lo + 1, hi):
        if t.px[i] < ax0: ax0 = t.px[i]
        if t.px[i] > ax1: ax1 = t.px[i]
        if t.py[i] < ay0: ay0 = t.py[i]
        if t.py[i] > ay1: ay1 = t.py[i]
    t.lo[node] = lo
    t.hi[node] = hi
    t.x0[node] = ax0
    t.x1[node] = ax1
    t.y0[node] = ay0
    t.y1[node] = ay1
    if hi - lo <= t.leafsize:
        return
    mid = lo + (hi - lo) // 2
    if ax1 - ax0 >= ay1 - ay0:
        _select(t.px, t.py, t.perm, lo, hi, mid)
    else:
        _select(t.py, t.px, t.perm, lo, hi, mid)
    _build(t, 2 * node + 1, lo, mid)
    _build(t, 2 * node + 2, mid, hi)


cdef inline double _box_dist(Tree* t, idx_t node, double qx, double qy) noexcept nogil:
    cdef double dx = _fmax(_fmax(t.x0[node] - qx, qx - t.x1[node]), 0.0)
    cdef double dy = _fmax(_fmax(t.y0[node] - qy, qy - t.y1[node]), 0.0)
    return _fmax(dx, dy)


cdef inline void _push(double* best, idx_t k, idx_t* filled, double d) noexcept nogil:
    # best[0:filled] is sorted ascending; keep the k smallest
    cdef idx_t pos
    if filled[0] < k:
        pos = filled[0]
        filled[0] += 1
    elif d < best[k - 1]:
        pos = k - 1
    else:
        return
    while pos > 0 and best[pos - 1] > d:
        best[pos] = best[pos - 1]
        pos -= 1
    best[pos] = d


cdef void _search(Tree* t, idx_t node, double qx, double qy, idx_t skip,
                  double* best, idx_t k, idx_t* filled) noexcept nogil:
    cdef idx_t i, left, right
    cdef double d, dl, dr
    if t.hi[node] - t.lo[node] <= t.leafsize:
        for i in range(t.lo[node], t.hi[node]):
            if t.perm[i] == skip:
                continue
            d = _fmax(_fabs(t.px[i] - qx), _fabs(t.py[i] - qy))
            _push(best, k, filled, d)
        return
    left = 2 * node + 1
    right = 2 * node + 2
    dl = _box_dist(t, left, qx, qy)
    dr = _box_dist(t, right, qx, qy)
    if dl <= dr:
        if filled[0] < k or dl < best[k - 1]:
            _search(t, left, qx, qy, skip, best, k, filled)
        if filled[0] < k or dr < best[k - 1]:
            _search(t, right, qx, qy, skip, best, k, filled)
    else:
        if filled[0] < k or dr < best[k - 1]:
            _search(t, right, qx, qy, skip, best, k, filled)
        if filled[0] < k or dl < best[k - 1]:
            _search(t, left, qx, qy, skip, best, k, filled)


cdef class KDTree2:
    """Balanced 2-d tree over the points (x[i], y[i]).

    Splits at the median of the wider bounding-box side; leaves hold at most
    ``leafsize`` points. Nodes are stored in heap order.
    """
    cdef Tree t
    cdef readonly idx_t n
    cdef object _px, _py, _perm, _lo, _hi, _x0, _x1, _y0, _y1
    cdef object _x, _y

    def __cinit__(self, x, y, idx_t leafsize=8):
        cdef idx_t n_leaf_levels = 0, m
        self._x = np.ascontiguousarray(x, dtype=np.float64)
        self._y = np.ascontiguousarray(y, dtype=np.float64)
        if self._x.ndim != 1 or self._x.shape != self._y.shape:
            raise ValueError("x and y must be 1-d arrays of equal length")
        self.n = self._x.shape[0]
        if self.n < 1:
            raise ValueError("cannot index an empty sample")
        if leafsize < 1:
            raise ValueError("leafsize must be >= 1")
        m = self.n
        while m > leafsize:
            m = (m + 1) // 2
            n_leaf_levels += 1
        self.t.n_nodes = (1 << (n_leaf_levels + 1)) - 1
        self.t.leafsize = leafsize

        self._px = self._x.copy()
        self._py = self._y.copy()
        self._perm = np.arange(self.n, dtype=np.intp)
        self._lo = np.zeros(self.t.n_nodes, dtype=np.intp)
        self._hi = np.zeros(self.t.n_nodes, dtype=np.intp)
        self._x0 = np.zeros(self.t.n_nodes)
        self._x1 = np.zeros(self.t.n_nodes)
        self._y0 = np.zeros(self.t.n_nodes)
        self._y1 = np.zeros(self.t.n_nodes)
        self.t.px = <double*> cnp.PyArray_DATA(self._px)
        self.t.py = <double*> cnp.PyArray_DATA(self._py)
        self.t.perm = <idx_t*> cnp.PyArray_DATA(self._perm)
        self.t.lo = <idx_t*> cnp.PyArray_DATA(self._lo)
        self.t.hi = <idx_t*> cnp.PyArray_DATA(self._hi)
        self.t.x0 = <double*> cnp.PyArray_DATA(self._x0)
        self.t.x1 = <double*> cnp.PyArray_DATA(self._x1)
        self.t.y0 = <double*> cnp.PyArray_DATA(self._y0)
        self.t.y1 = <double*> cnp.PyArray_DATA(self._y1)
        with nogil:
            _build(&self.t, 0, 0, self.n)

    def query(self, double qx, double qy, idx_t k, idx_t exclude=-1):
        """Sorted max-norm distances from (qx, qy) to its ``k`` nearest
        points, skipping the point with index ``exclude``."""
        cdef idx_t avail = self.n - (1 if 0 <= exclude < self.n else 0)
        if k < 1 or k > avail:
            raise ValueError(f"k must be in [1, {avail}], got {k}")
        out = np.empty(k)
        cdef double[::1] best = out
        cdef idx_t filled = 0
        with nogil:
            _search(&self.t, 0, qx, qy, exclude, &best[0], k, &filled)
        return out

    def knn_radius(self, idx_t k):
        """Distance from every point to its ``k``-th nearest other point."""
        if k < 1 or k > self.n - 1:
            raise ValueError(f"k must be in [1, {self.n - 1}], got {k}")
        out = np.empty(self.n)
        cdef double[::1] radius = out
        cdef double[::1] x = self._x
        cdef double[::1] y = self._y
        cdef idx_t i, filled
        cdef double* best = <double*> malloc(k * sizeof(double))
        if best == NULL:
            raise MemoryError()
        try:
            with nogil:
                for i in range(self.n):
                    filled = 0
                    _search(&self.t, 0, x[i], y[i], i, best, k, &filled)
                    radius[i] = best[k - 1]
        finally:
            free(best)
        return out


def strict_counts(values, radii):
    """For each i, the number of j != i with |values[j] - values[i]| < radii[i].

    Binary searches evaluate that exact predicate on the sorted values, so
    the result agrees with a brute-force scan even at rounding boundaries.
    """
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] r = np.ascontiguousarray(radii, dtype=np.float64)
    if v.shape[0] != r.shape[0]:
        raise ValueError("values and radii must have equal length")
    s_arr = np.sort(np.asarray(v))
    cdef double[::1] s = s_arr
    cdef idx_t n = v.shape[0]
    out = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] counts = out
    cdef idx_t i, a, b, m, p, lower, upper
    cdef double c, rad
    with nogil:
        for i in range(n):
            c = v[i]
            rad = r[i]
            if not (rad > 0):
                continue
            # p: first position holding c
            a = 0
            b = n
            while a < b:
                m = (a + b) // 2
                if s[m] < c:
                    a = m + 1
                else:
                    b = m
            p = a
            # lower: first j in [0, p] with c - s[j] < rad
            a = 0
            b = p
            while a < b:
                m = (a + b) // 2
                if c - s[m] < rad:
                    b = m
                else:
                    a = m + 1
            lower = a
            # upper: first j in [p, n) with s[j] - c >= rad, or n
            a = p
            b = n
            while a < b:
                m = (a + b) // 2
                if s[m] - c < rad:
                    a = m + 1
                else:
                    b = m
            upper = a
            counts[i] = upper - lower - 1
    return out
