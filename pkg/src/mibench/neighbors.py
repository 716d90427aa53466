"""Neighbour index for KSG: backend selection plus a brute-force reference.

The compiled ``_kdtree`` extension is used when importable; otherwise the
pure-Python twin. Set ``MIBENCH_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kdtree_py

if os.environ.get("MIBENCH_PURE_PYTHON", "") not in ("", "0"):
    _backend = _kdtree_py
    BACKEND = "python"
else:
    try:
        from . import _kdtree as _backend  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _backend = _kdtree_py
        BACKEND = "python"

BACKENDS = {"python": _kdtree_py}
if BACKEND == "cython":
    BACKENDS["cython"] = _backend


def get_backend(name: str | None = None):
    if name is None:
        return _backend
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} is not available; have {sorted(BACKENDS)}") from None


class NeighborIndex:
    """Joint-space max-norm kNN plus per-axis strict range counts for one sample."""

    def __init__(self, x, y, backend: str | None = None, leafsize: int = 8):
        self.x = np.ascontiguousarray(x, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.float64)
        if self.x.shape[0] < 2:
            raise ValueError(f"need at least 2 points, got {self.x.shape[0]}")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise ValueError("coordinates must be finite")
        self._impl = get_backend(backend)
        self._tree = self._impl.KDTree2(self.x, self.y, leafsize)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def kth_distances(self, k: int) -> np.ndarray:
        """Max-norm distance from each point to its k-th nearest other point."""
        return self._tree.knn_radius(k)

    def query(self, qx: float, qy: float, k: int, exclude: int = -1) -> np.ndarray:
        return self._tree.query(qx, qy, k, exclude)

    def range_counts(self, radii) -> tuple[np.ndarray, np.ndarray]:
        """Counts of j != i with |x_j - x_i| < r_i and with |y_j - y_i| < r_i."""
        return self._impl.strict_counts(self.x, radii), self._impl.strict_counts(self.y, radii)


def build_knn_index(sample, backend: str | None = None) -> NeighborIndex:
    return NeighborIndex(sample.x, sample.y, backend=backend)


def naive_kth_distances(x, y, k: int) -> np.ndarray:
    """O(N^2) reference for ``NeighborIndex.kth_distances``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    out = np.empty(n)
    for i in range(n):
        d = np.maximum(np.abs(x - x[i]), np.abs(y - y[i]))
        d[i] = np.inf
        out[i] = np.partition(d, k - 1)[k - 1]
    return out


def naive_range_counts(x, y, radii) -> tuple[np.ndarray, np.ndarray]:
    """O(N^2) reference for ``NeighborIndex.range_counts``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    nx = np.empty(n, dtype=np.int64)
    ny = np.empty(n, dtype=np.int64)
    for i in range(n):
        mx = np.abs(x - x[i]) < radii[i]
        my = np.abs(y - y[i]) < radii[i]
        mx[i] = my[i] = False
        nx[i] = mx.sum()
        ny[i] = my.sum()
    return nx, ny
