"""Seeded bivariate samplers (normal, lognormal, Student-t) and the
per-coordinate invertible transforms used to probe estimator bias.

Random streams come from numpy's PCG64 seeded through ``SeedSequence``.
Substreams are addressed by a spawn key, so replicate ``r`` of cell ``N``
draws the same numbers no matter which worker runs it or in which order.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .analytic import AnalyticMI, analytic_mi_gauss, analytic_mi_student

FAMILIES = ("normal", "lognormal", "student_t")
TRANSFORMS = ("none", "cube", "cube_root", "exp_map")

# command-line spellings
FAMILY_ALIASES = {"student": "student_t", "student-t": "student_t", "t": "student_t"}
TRANSFORM_ALIASES = {"cuberoot": "cube_root", "exp": "exp_map"}


@dataclass(frozen=True)
class DistributionSpec:
    family: str = "normal"
    rho: float = 0.0
    mu: tuple[float, float] = (0.0, 0.0)
    sigma: tuple[float, float] = (1.0, 1.0)
    nu: float | None = None
    transform: str = "none"

    def __post_init__(self):
        family = FAMILY_ALIASES.get(self.family, self.family)
        transform = TRANSFORM_ALIASES.get(self.transform, self.transform)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "transform", transform)
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        object.__setattr__(self, "sigma", tuple(float(s) for s in self.sigma))
        self.validate()

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.transform not in TRANSFORMS:
            raise ValueError(f"unknown transform {self.transform!r}; expected one of {TRANSFORMS}")
        if not (abs(self.rho) < 1):
            raise ValueError(f"correlation must satisfy |rho| < 1, got rho={self.rho}")
        if len(self.mu) != 2 or len(self.sigma) != 2:
            raise ValueError("mu and sigma must be pairs")
        if not all(math.isfinite(m) for m in self.mu):
            raise ValueError(f"means must be finite, got {self.mu}")
        if not all(s > 0 and math.isfinite(s) for s in self.sigma):
            raise ValueError(f"standard deviations must be finite and > 0, got {self.sigma}")
        if self.family == "student_t":
            if self.nu is None or not (self.nu > 0) or not math.isfinite(self.nu):
                raise ValueError(f"student_t requires finite nu > 0, got nu={self.nu}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mu"] = list(self.mu)
        d["sigma"] = list(self.sigma)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DistributionSpec":
        known = {f: d[f] for f in ("family", "rho", "mu", "sigma", "nu", "transform") if f in d}
        return cls(**known)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DistributionSpec":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_keyvalue(cls, text: str) -> "DistributionSpec":
        """Parse ``key=value`` lines; ``mu`` and ``sigma`` take ``a,b``."""
        d: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in ("mu", "sigma"):
                d[key] = tuple(float(v) for v in value.split(","))
            elif key in ("rho", "nu"):
                d[key] = float(value)
            elif key in ("family", "transform"):
                d[key] = value
            else:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
        return cls(**d)

    def to_keyvalue(self) -> str:
        lines = [
            f"family={self.family}",
            f"rho={self.rho!r}",
            f"mu={self.mu[0]!r},{self.mu[1]!r}",
            f"sigma={self.sigma[0]!r},{self.sigma[1]!r}",
        ]
        if self.nu is not None:
            lines.append(f"nu={self.nu!r}")
        lines.append(f"transform={self.transform}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Sample:
    """N ordered (x, y) pairs."""

    x: np.ndarray
    y: np.ndarray
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError(f"x and y must be 1-d arrays of equal length, got {x.shape} and {y.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def __len__(self) -> int:
        return self.n

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]], provenance=None) -> "Sample":
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1], provenance or {})

    def swapped(self) -> "Sample":
        return Sample(self.y, self.x, dict(self.provenance))

    def take(self, indices) -> "Sample":
        return Sample(self.x[indices], self.y[indices], dict(self.provenance))

    def head(self, n: int) -> "Sample":
        return Sample(self.x[:n], self.y[:n], dict(self.provenance))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y)))


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the substream addressed by ``key``."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def _draw(spec: DistributionSpec, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    z = rng.standard_normal((n, 2))
    z1, z2 = z[:, 0], z[:, 1]
    rho = spec.rho
    c1 = z1
    c2 = rho * z1 + math.sqrt(1.0 - rho * rho) * z2

    if spec.family == "student_t":
        w = rng.chisquare(spec.nu, size=n)
        scale = np.sqrt(w / spec.nu)
        c1 = c1 / scale
        c2 = c2 / scale

    x = spec.mu[0] + spec.sigma[0] * c1
    y = spec.mu[1] + spec.sigma[1] * c2
    if spec.family == "lognormal":
        x = np.exp(x)
        y = np.exp(y)
    return x, y


def sample(spec: DistributionSpec, n: int, seed: int | np.random.Generator) -> Sample:
    """Draw ``n`` pairs from ``spec`` and apply its transform.

    ``seed`` is an integer (a fresh PCG64 stream) or an existing generator.
    """
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got n={n}")
    spec.validate()
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed)
    x, y = _draw(spec, int(n), rng)
    prov = {"spec": spec.to_dict()}
    if not isinstance(seed, np.random.Generator):
        prov["seed"] = int(seed)
    out = Sample(x, y, prov)
    if spec.transform != "none":
        out = apply_transform(out, spec.transform)
    return out


def _transform_fn(transform: str):
    transform = TRANSFORM_ALIASES.get(transform, transform)
    if transform == "none":
        return lambda v: v.copy()
    if transform == "cube":
        return lambda v: v * v * v
    if transform == "cube_root":
        return np.cbrt
    if transform == "exp_map":
        return np.exp
    raise ValueError(f"unknown transform {transform!r}; expected one of {TRANSFORMS}")


def apply_transform(s: Sample, transform: str, axes: str = "xy") -> Sample:
    """Elementwise map of the chosen coordinates; pair order is kept.

    ``cube_root`` is the real (sign-preserving) root, so every map here is a
    bijection of the real line onto its image.
    """
    fn = _transform_fn(transform)
    x = fn(s.x) if "x" in axes else s.x
    y = fn(s.y) if "y" in axes else s.y
    prov = dict(s.provenance)
    prov["transforms"] = list(prov.get("transforms", [])) + [f"{transform}:{axes}"]
    return Sample(x, y, prov)


def analytic_mi(spec: DistributionSpec) -> AnalyticMI:
    """Ground-truth MI; transforms and the lognormal exp map leave it unchanged."""
    spec.validate()
    if spec.family == "student_t":
        return analytic_mi_student(spec.nu, spec.rho)
    return analytic_mi_gauss(spec.rho)


def with_transform(spec: DistributionSpec, transform: str) -> DistributionSpec:
    return replace(spec, transform=transform)
