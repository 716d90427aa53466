"""Monte Carlo protocol: replicate ensembles over an N grid, quantile
confidence intervals, pair bootstrap, and 1/N bias extrapolation."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimators import EstimatorConfig, estimate, ksg_local, ksg_mi
from .sampling import DistributionSpec, Sample, analytic_mi, sample, substream

DEFAULT_N_GRID = (100, 300, 1_000, 3_000, 10_000, 30_000, 100_000)
CSV_COLUMNS = (
    "family", "transform", "estimator", "k_or_bins", "N", "R",
    "mean", "q05", "q95", "analytic", "master_seed",
)


class EstimationError(RuntimeError):
    """An estimator failed inside an experiment; the message names the cell."""


def default_replicates(n: int) -> int:
    if n <= 10_000:
        return 1000
    if n <= 100_000:
        return 100
    return 10


@dataclass(frozen=True)
class ExperimentConfig:
    spec: DistributionSpec
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    n_grid: tuple[int, ...] = DEFAULT_N_GRID
    replicates: int | None = None
    master_seed: int = 0
    quantiles: tuple[float, float] = (0.05, 0.95)

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "quantiles", tuple(float(q) for q in self.quantiles))
        if not self.n_grid:
            raise ValueError("n_grid is empty")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError(f"n_grid must be strictly increasing, got {self.n_grid}")
        if self.n_grid[0] < 2:
            raise ValueError("every N in n_grid must be >= 2")
        if self.replicates is not None and self.replicates < 2:
            raise ValueError(f"need R >= 2 replicates, got {self.replicates}")
        lo, hi = self.quantiles
        if not (0 < lo < hi < 1):
            raise ValueError(f"quantiles must satisfy 0 < lo < hi < 1, got {self.quantiles}")

    def replicates_for(self, n: int) -> int:
        return self.replicates if self.replicates is not None else default_replicates(n)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "estimator": {
                "kind": self.estimator.kind,
                "k": self.estimator.k,
                "bins": self.estimator.bins,
                "miller_madow": self.estimator.miller_madow,
                "dedup": self.estimator.dedup,
            },
            "n_grid": list(self.n_grid),
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "quantiles": list(self.quantiles),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(
            spec=DistributionSpec.from_dict(d["spec"]),
            estimator=EstimatorConfig(**d.get("estimator", {})),
            n_grid=tuple(d.get("n_grid", DEFAULT_N_GRID)),
            replicates=d.get("replicates"),
            master_seed=int(d.get("master_seed", 0)),
            quantiles=tuple(d.get("quantiles", (0.05, 0.95))),
        )


@dataclass
class CellResult:
    n: int
    estimates: np.ndarray
    mean: float
    q_lo: float
    q_hi: float
    median: float
    analytic: float
    k_or_bins: int
    wall_time: float = 0.0

    @property
    def replicates(self) -> int:
        return int(self.estimates.shape[0])

    @property
    def width(self) -> float:
        return self.q_hi - self.q_lo

    def covers(self, value: float) -> bool:
        return self.q_lo <= value <= self.q_hi


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    cells: list[CellResult]

    def cell(self, n: int) -> CellResult:
        for c in self.cells:
            if c.n == n:
                return c
        raise KeyError(n)

    def rows(self, scale: float = 1.0) -> list[dict]:
        cfg = self.config
        return [
            {
                "family": cfg.spec.family,
                "transform": cfg.spec.transform,
                "estimator": cfg.estimator.label(),
                "k_or_bins": c.k_or_bins,
                "N": c.n,
                "R": c.replicates,
                "mean": c.mean / scale,
                "q05": c.q_lo / scale,
                "q95": c.q_hi / scale,
                "analytic": c.analytic / scale,
                "master_seed": cfg.master_seed,
            }
            for c in self.cells
        ]

    def to_csv(self, scale: float = 1.0) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows(scale):
            writer.writerow({k: _fmt(v) for k, v in row.items()})
        return buf.getvalue()

    def to_json(self, scale: float = 1.0) -> str:
        # wall times are left out so the file is reproducible byte for byte
        payload = {
            "config": self.config.to_dict(),
            "units_scale": scale,
            "cells": [
                dict(row, estimates=[float(v) / scale for v in c.estimates])
                for row, c in zip(self.rows(scale), self.cells)
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def quantile(values, p: float) -> float:
    """Order statistic with linear interpolation at h = (n - 1) p."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise ValueError("quantile of an empty list")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"probability must be in [0, 1], got {p}")
    h = (v.size - 1) * p
    lo = math.floor(h)
    hi = min(lo + 1, v.size - 1)
    return float(v[lo] + (h - lo) * (v[hi] - v[lo]))


def _replicate(spec: DistributionSpec, estimator: EstimatorConfig, n: int, seed: int, r: int) -> float:
    s = sample(spec, n, substream(seed, n, r))
    try:
        return estimate(s, estimator)
    except Exception as exc:
        raise EstimationError(f"N={n} replicate={r}: {exc}") from exc


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_ci_experiment(config: ExperimentConfig, workers: int = 1, progress=None) -> ExperimentResult:
    """Draw R fresh samples per N and summarise the estimates.

    Replicate r of cell N always uses substream (master_seed, N, r), so the
    output is the same for any worker count and any grid that contains N.
    """
    analytic = analytic_mi(config.spec).value
    lo_p, hi_p = config.quantiles
    cells = []
    for n in config.n_grid:
        reps = config.replicates_for(n)
        t0 = time.perf_counter()
        est = np.array(
            _map(lambda r: _replicate(config.spec, config.estimator, n, config.master_seed, r), range(reps), workers)
        )
        cells.append(
            CellResult(
                n=n,
                estimates=est,
                mean=float(np.mean(est)),
                q_lo=quantile(est, lo_p),
                q_hi=quantile(est, hi_p),
                median=quantile(est, 0.5),
                analytic=analytic,
                k_or_bins=config.estimator.k_or_bins(n),
                wall_time=time.perf_counter() - t0,
            )
        )
        if progress is not None:
            progress(cells[-1])
    return ExperimentResult(config, cells)


def bootstrap_indices(n: int, seed: int, b: int) -> np.ndarray:
    return substream(seed, b).integers(0, n, size=n)


BOOTSTRAP_DUPLICATES = ("collapse", "jitter")


def _resample_estimate(s: Sample, idx: np.ndarray, estimator: EstimatorConfig, duplicates: str) -> float:
    if estimator.kind != "ksg":
        return estimate(s.take(idx), estimator)
    if duplicates == "jitter":
        return ksg_mi(s.take(idx), estimator.k, dedup=True)
    unique, counts = np.unique(idx, return_counts=True)
    local = ksg_local(s.take(unique), estimator.k, dedup=estimator.dedup)
    return float(np.average(local, weights=counts))


def bootstrap_mi(s: Sample, B: int, estimator: EstimatorConfig, seed: int, workers: int = 1,
                 duplicates: str = "collapse") -> float:
    """Mean estimate over ``B`` pair-bootstrap resamples of ``s``.

    Resampling repeats pairs. For KSG, ``duplicates="collapse"`` computes the
    per-point terms on the distinct resampled pairs and weights each by its
    multiplicity. ``"jitter"`` separates copies by ~1e-10 of the coordinate
    scale instead; the copies then sit at near-zero distance from each other
    and the estimate is inflated severalfold.
    """
    if B < 1:
        raise ValueError(f"need B >= 1 bootstrap resamples, got {B}")
    if duplicates not in BOOTSTRAP_DUPLICATES:
        raise ValueError(f"duplicates must be one of {BOOTSTRAP_DUPLICATES}, got {duplicates!r}")

    def one(b: int) -> float:
        return _resample_estimate(s, bootstrap_indices(s.n, seed, b), estimator, duplicates)

    return float(np.mean(_map(one, range(B), workers)))


@dataclass(frozen=True)
class BiasFit:
    intercept: float
    slope: float
    rms_residual: float
    points: tuple[tuple[float, float], ...]

    def corrected(self, n: int, value: float) -> float:
        """Remove the fitted 1/N term from an estimate at sample size ``n``."""
        return value - self.slope / n


def fit_inverse_n(ns, means) -> BiasFit:
    """Ordinary least squares of mean estimate against 1/N."""
    ns = np.asarray(ns, dtype=float)
    means = np.asarray(means, dtype=float)
    if ns.shape != means.shape:
        raise ValueError("ns and means must have equal length")
    if np.unique(ns).size < 3:
        raise ValueError(f"bias extrapolation needs at least 3 distinct N values, got {np.unique(ns).size}")
    inv = 1.0 / ns
    design = np.column_stack([np.ones_like(inv), inv])
    (intercept, slope), *_ = np.linalg.lstsq(design, means, rcond=None)
    resid = means - (intercept + slope * inv)
    return BiasFit(
        intercept=float(intercept),
        slope=float(slope),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        points=tuple(zip(inv.tolist(), means.tolist())),
    )


def bias_extrapolate(results: ExperimentResult) -> BiasFit:
    return fit_inverse_n([c.n for c in results.cells], [c.mean for c in results.cells])
