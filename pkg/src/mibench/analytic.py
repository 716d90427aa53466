"""Special functions and closed-form mutual information values.

All values are in nats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EULER_GAMMA = 0.57721566490153286060651209008240243

# B_{2j} / (2j) for j = 1..10, used in the asymptotic digamma series
_ASYMPTOTIC_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
    -174611.0 / 6600.0,
)
_ASYMPTOTIC_THRESHOLD = 6.0


@dataclass(frozen=True)
class AnalyticMI:
    """A closed-form MI value together with the parameters that produced it."""

    value: float
    family: str
    params: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value


def _asymptotic_digamma(x):
    z = 1.0 / (x * x)
    poly = 0.0
    for c in reversed(_ASYMPTOTIC_COEFFS):
        poly = poly * z + c
    return np.log(x) - 0.5 / x - z * poly


def digamma(x):
    """Digamma function psi(x) for x > 0.

    Accepts a scalar or an array. Arguments below 6 are shifted upward with
    psi(x) = psi(x + 1) - 1/x before applying the asymptotic series.
    """
    scalar = np.ndim(x) == 0
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)) or not np.all(np.isfinite(arr)):
        raise ValueError("digamma is only defined here for finite x > 0")

    shift = np.zeros_like(arr)
    work = arr.copy()
    small = work < _ASYMPTOTIC_THRESHOLD
    while np.any(small):
        shift[small] += 1.0 / work[small]
        work[small] += 1.0
        small = work < _ASYMPTOTIC_THRESHOLD
    out = _asymptotic_digamma(work) - shift
    return float(out) if scalar else out


def log_beta(a: float, b: float) -> float:
    """ln B(a, b) via log-gamma; stays finite where B itself would underflow."""
    if not (a > 0 and b > 0):
        raise ValueError(f"log_beta requires a > 0 and b > 0, got a={a}, b={b}")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _check_rho(rho: float) -> None:
    if not (abs(rho) < 1):
        raise ValueError(f"correlation must satisfy |rho| < 1, got rho={rho}")


def analytic_mi_gauss(rho: float) -> AnalyticMI:
    _check_rho(rho)
    value = -0.5 * math.log1p(-rho * rho)
    return AnalyticMI(value=value, family="normal", params={"rho": rho})


def analytic_mi_student(nu: float, rho: float) -> AnalyticMI:
    """MI of a bivariate Student-t with ``nu`` degrees of freedom and scale
    correlation ``rho``.

    Reduces to the Gaussian value as ``nu`` grows; the excess is the
    dependence induced by the shared chi-square scale.
    """
    if not (nu > 0) or not math.isfinite(nu):
        raise ValueError(f"degrees of freedom must be finite and > 0, got nu={nu}")
    gauss = analytic_mi_gauss(rho).value
    scale_term = 2.0 * (0.5 * math.log(nu / (2.0 * math.pi)) + log_beta(nu / 2.0, 0.5))
    psi_term = (1.0 + nu) * (digamma((nu + 1.0) / 2.0) - digamma(nu / 2.0))
    value = gauss + scale_term - (2.0 + nu) / nu + psi_term
    return AnalyticMI(value=value, family="student_t", params={"nu": nu, "rho": rho})
