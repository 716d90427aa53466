"""Pure-Python twin of the compiled ``_kdtree`` kernel.

Same tree layout and split rule. The k-th distance and the counts do not
depend on how median ties are split, so both backends return identical
values. Used when the extension is not built or when
``MIBENCH_PURE_PYTHON=1``.
"""
from __future__ import annotations

import numpy as np


class KDTree2:
    def __init__(self, x, y, leafsize: int = 8):
        x = np.ascontiguousarray(x, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be 1-d arrays of equal length")
        self.n = x.shape[0]
        if self.n < 1:
            raise ValueError("cannot index an empty sample")
        if leafsize < 1:
            raise ValueError("leafsize must be >= 1")
        self.leafsize = leafsize
        self._x = x
        self._y = y

        levels, m = 0, self.n
        while m > leafsize:
            m = (m + 1) // 2
            levels += 1
        n_nodes = (1 << (levels + 1)) - 1
        self._lo = [0] * n_nodes
        self._hi = [0] * n_nodes
        self._box = [(0.0, 0.0, 0.0, 0.0)] * n_nodes

        self._perm = np.arange(self.n)
        self._build(0, 0, self.n)
        self._px = x[self._perm].tolist()
        self._py = y[self._perm].tolist()
        self._idx = self._perm.tolist()

    def _build(self, node: int, lo: int, hi: int) -> None:
        idx = self._perm[lo:hi]
        xs = self._x[idx]
        ys = self._y[idx]
        x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
        self._lo[node] = lo
        self._hi[node] = hi
        self._box[node] = (float(x0), float(x1), float(y0), float(y1))
        if hi - lo <= self.leafsize:
            return
        mid = lo + (hi - lo) // 2
        key = xs if x1 - x0 >= y1 - y0 else ys
        order = np.argpartition(key, mid - lo, kind="introselect")
        self._perm[lo:hi] = idx[order]
        self._build(2 * node + 1, lo, mid)
        self._build(2 * node + 2, mid, hi)

    def _box_dist(self, node: int, qx: float, qy: float) -> float:
        x0, x1, y0, y1 = self._box[node]
        return max(x0 - qx, qx - x1, y0 - qy, qy - y1, 0.0)

    def _search(self, qx: float, qy: float, skip: int, k: int) -> list[float]:
        best: list[float] = []
        lo, hi, leafsize = self._lo, self._hi, self.leafsize
        px, py, ids = self._px, self._py, self._idx

        def visit(node: int) -> None:
            if hi[node] - lo[node] <= leafsize:
                for i in range(lo[node], hi[node]):
                    if ids[i] == skip:
                        continue
                    d = max(abs(px[i] - qx), abs(py[i] - qy))
                    if len(best) < k:
                        best.append(d)
                        best.sort()
                    elif d < best[-1]:
                        best[-1] = d
                        best.sort()
                return
            left, right = 2 * node + 1, 2 * node + 2
            dl = self._box_dist(left, qx, qy)
            dr = self._box_dist(right, qx, qy)
            first, second = ((left, dl), (right, dr)) if dl <= dr else ((right, dr), (left, dl))
            for child, dist in (first, second):
                if len(best) < k or dist < best[-1]:
                    visit(child)

        visit(0)
        return best

    def query(self, qx: float, qy: float, k: int, exclude: int = -1) -> np.ndarray:
        avail = self.n - (1 if 0 <= exclude < self.n else 0)
        if k < 1 or k > avail:
            raise ValueError(f"k must be in [1, {avail}], got {k}")
        return np.array(self._search(float(qx), float(qy), exclude, k))

    def knn_radius(self, k: int) -> np.ndarray:
        if k < 1 or k > self.n - 1:
            raise ValueError(f"k must be in [1, {self.n - 1}], got {k}")
        xs, ys = self._x.tolist(), self._y.tolist()
        return np.array([self._search(xs[i], ys[i], i, k)[k - 1] for i in range(self.n)])


def _fix_lower(s, c, r, lower, p):
    # smallest j in [0, p] with c - s[j] < r
    while True:
        step_down = (lower > 0) & (c - s[np.maximum(lower - 1, 0)] < r)
        if not step_down.any():
            break
        lower = lower - step_down
    while True:
        step_up = (lower < p) & ~(c - s[np.minimum(lower, len(s) - 1)] < r)
        if not step_up.any():
            break
        lower = lower + step_up
    return lower


def _fix_upper(s, c, r, upper, p):
    # smallest j in [p, n] with s[j] - c >= r (n if none)
    n = len(s)
    while True:
        step_up = (upper < n) & (s[np.minimum(upper, n - 1)] - c < r)
        if not step_up.any():
            break
        upper = upper + step_up
    while True:
        step_down = (upper > p) & ~(s[np.maximum(upper - 1, 0)] - c < r)
        if not step_down.any():
            break
        upper = upper - step_down
    return upper


def strict_counts(values, radii) -> np.ndarray:
    """For each i, the number of j != i with |values[j] - values[i]| < radii[i]."""
    v = np.ascontiguousarray(values, dtype=np.float64)
    r = np.ascontiguousarray(radii, dtype=np.float64)
    if v.shape != r.shape:
        raise ValueError("values and radii must have equal length")
    s = np.sort(v)
    p = np.searchsorted(s, v, side="left")
    # searchsorted on c -/+ r is off by at most a few rounding ties; the fixups
    # walk to the boundary of the exact predicate
    lower = _fix_lower(s, v, r, np.minimum(np.searchsorted(s, v - r, side="right"), p), p)
    upper = _fix_upper(s, v, r, np.maximum(np.searchsorted(s, v + r, side="left"), p), p)
    counts = (upper - lower - 1).astype(np.int64)
    counts[~(r > 0)] = 0
    return counts
