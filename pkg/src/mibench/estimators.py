"""Point estimators of mutual information (nats).

``ksg_mi`` is the Kraskov-Stoegbauer-Grassberger kNN estimator (first
variant, strict counts at the joint kNN radius). ``plugin_mi`` substitutes an
equal-width joint histogram into the definition of MI, optionally with the
Miller-Madow first-order entropy correction.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .analytic import digamma
from .neighbors import NeighborIndex, naive_kth_distances, naive_range_counts
from .sampling import Sample

ESTIMATORS = ("ksg", "plugin")
JITTER_SCALE = 1e-10


@dataclass(frozen=True)
class EstimatorConfig:
    kind: str = "ksg"
    k: int = 4
    bins: int | None = None
    miller_madow: bool = False
    dedup: bool = False

    def __post_init__(self):
        if self.kind not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.kind!r}; expected one of {ESTIMATORS}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.bins is not None and self.bins < 2:
            raise ValueError(f"bins must be >= 2, got {self.bins}")

    def label(self) -> str:
        if self.kind == "ksg":
            return "ksg"
        return "plugin_mm" if self.miller_madow else "plugin"

    def k_or_bins(self, n: int) -> int:
        return self.k if self.kind == "ksg" else (self.bins or default_bins(n))


def _check_finite(s: Sample) -> None:
    if not s.is_finite():
        raise ValueError("sample contains non-finite values")


def _coordinate_jitter(v: np.ndarray) -> np.ndarray:
    seed = int.from_bytes(hashlib.sha256(v.tobytes()).digest()[:8], "little")
    rng = np.random.Generator(np.random.PCG64(seed))
    scale = float(np.std(v)) or float(np.max(np.abs(v))) or 1.0
    return v + JITTER_SCALE * scale * rng.standard_normal(v.shape[0])


def break_duplicates(s: Sample) -> Sample:
    """Return ``s`` with tiny deterministic noise on any coordinate holding
    repeated values; unchanged (same object) if there are none.

    The noise for a coordinate is seeded from that coordinate's bytes only,
    so the result does not depend on which axis is called x.
    """
    x, y = s.x, s.y
    x_dup = np.unique(x).shape[0] < x.shape[0]
    y_dup = np.unique(y).shape[0] < y.shape[0]
    if not (x_dup or y_dup):
        return s
    return Sample(
        _coordinate_jitter(x) if x_dup else x,
        _coordinate_jitter(y) if y_dup else y,
        dict(s.provenance, jittered=True),
    )


def _ksg_precheck(s: Sample, k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if s.n <= k:
        raise ValueError(f"KSG needs more than k={k} points, got n={s.n}")
    _check_finite(s)


def _local_terms(n: int, k: int, nx: np.ndarray, ny: np.ndarray) -> np.ndarray:
    return digamma(float(k)) + digamma(float(n)) - (digamma(nx + 1.0) + digamma(ny + 1.0))


def ksg_local(s: Sample, k: int = 4, dedup: bool = False, backend: str | None = None) -> np.ndarray:
    """Per-point KSG contributions; their mean is ``ksg_mi``."""
    _ksg_precheck(s, k)
    if dedup:
        s = break_duplicates(s)
    index = NeighborIndex(s.x, s.y, backend=backend)
    radii = index.kth_distances(k)
    nx, ny = index.range_counts(radii)
    return _local_terms(s.n, k, nx, ny)


def ksg_mi(s: Sample, k: int = 4, dedup: bool = False, backend: str | None = None) -> float:
    """KSG estimate of MI(X;Y). May be negative; it is never clamped."""
    return float(np.mean(ksg_local(s, k, dedup, backend)))


def ksg_mi_naive(s: Sample, k: int = 4, dedup: bool = False) -> float:
    """Brute-force O(N^2) KSG, kept as the reference for ``ksg_mi``."""
    _ksg_precheck(s, k)
    if dedup:
        s = break_duplicates(s)
    radii = naive_kth_distances(s.x, s.y, k)
    nx, ny = naive_range_counts(s.x, s.y, radii)
    return float(np.mean(_local_terms(s.n, k, nx, ny)))


@dataclass(frozen=True)
class JointHistogram:
    counts: np.ndarray
    x_edges: np.ndarray
    y_edges: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def bins(self) -> int:
        return self.counts.shape[0]

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        return self.counts.sum(axis=1), self.counts.sum(axis=0)


def default_bins(n: int) -> int:
    """ceil(n ** (1/3)) computed in integers, clamped to [8, 256]."""
    b = max(1, round(n ** (1.0 / 3.0)))
    while b**3 < n:
        b += 1
    while b > 1 and (b - 1) ** 3 >= n:
        b -= 1
    return min(max(b, 8), 256)


def _bin_index(v: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = float(v.min()), float(v.max())
    edges = np.linspace(lo, hi, bins + 1)
    if hi == lo:
        return np.zeros(v.shape[0], dtype=np.int64), edges
    idx = np.floor((v - lo) / (hi - lo) * bins).astype(np.int64)
    return np.clip(idx, 0, bins - 1), edges


def joint_histogram(s: Sample, bins: int) -> JointHistogram:
    """Equal-width bins over each axis' observed range."""
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    _check_finite(s)
    ix, x_edges = _bin_index(s.x, bins)
    iy, y_edges = _bin_index(s.y, bins)
    counts = np.bincount(ix * bins + iy, minlength=bins * bins).reshape(bins, bins)
    return JointHistogram(counts, x_edges, y_edges)


def histogram_mi(h: JointHistogram, miller_madow: bool = False) -> float:
    n = h.n
    cx, cy = h.marginals()
    nz = h.counts > 0
    ii, jj = np.nonzero(nz)
    cxy = h.counts[nz].astype(float)
    # sum p_ij ln(p_ij / (p_i q_j)) with p = count / n
    mi = float(np.sum(cxy / n * np.log(cxy * n / (cx[ii].astype(float) * cy[jj]))))
    if miller_madow:
        mx = int(np.count_nonzero(cx))
        my = int(np.count_nonzero(cy))
        mxy = int(np.count_nonzero(nz))
        mi += miller_madow_correction(n, mx, my, mxy)
    return mi


def miller_madow_correction(n: int, mx: int, my: int, mxy: int) -> float:
    """(m-1)/(2n) per entropy, combined as H(X) + H(Y) - H(X,Y)."""
    return ((mx - 1) + (my - 1) - (mxy - 1)) / (2.0 * n)


def plugin_mi(s: Sample, bins: int | None = None, miller_madow: bool = False) -> float:
    if s.n < 2:
        raise ValueError(f"plugin estimator needs n >= 2, got n={s.n}")
    _check_finite(s)
    return histogram_mi(joint_histogram(s, bins or default_bins(s.n)), miller_madow)


def estimate(s: Sample, config: EstimatorConfig) -> float:
    if config.kind == "ksg":
        return ksg_mi(s, config.k, dedup=config.dedup)
    return plugin_mi(s, config.bins, config.miller_madow)
