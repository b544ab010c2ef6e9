"""Standard-normal and binomial primitives.

Everything else in the package is built on the four functions here. They
accept Python scalars or numpy arrays; scalar input gives a ``float`` back.
Out-of-domain input raises instead of being clamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, ValidationError


@dataclass(frozen=True)
class NormalMoments:
    """Mean and variance of a (possibly degenerate) normal distribution."""

    mean: float
    variance: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise ValidationError(f"moments must be finite, got mean={self.mean}, variance={self.variance}")
        if self.variance < 0:
            raise ValidationError(f"variance must be >= 0, got {self.variance}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def _unwrap(x: np.ndarray):
    return float(x) if x.ndim == 0 else x


def as_probability(p, name: str = "p", *, open_interval: bool = False) -> np.ndarray:
    """Check that ``p`` holds probabilities and return it as a float array.

    With ``open_interval`` the endpoints 0 and 1 are rejected as a
    :class:`DomainError`; values outside [0, 1] are always a
    :class:`ValidationError`.
    """
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite")
    if np.any((arr < 0) | (arr > 1)):
        raise ValidationError(f"{name} must lie in [0, 1]")
    if open_interval and np.any((arr == 0) | (arr == 1)):
        raise DomainError(f"{name} must lie strictly inside (0, 1); 0 and 1 map to infinite quantiles")
    return arr


def std_normal_cdf(z):
    """Standard normal CDF, Φ(z)."""
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValidationError("std_normal_cdf requires finite input")
    return _unwrap(special.ndtr(z))


def std_normal_quantile(p):
    """Inverse standard normal CDF, Φ⁻¹(p), for p in the open unit interval."""
    p = as_probability(p, "p", open_interval=True)
    return _unwrap(special.ndtri(p))


def expected_normal_cdf(m: NormalMoments) -> float:
    """E[Φ(x)] for x ~ N(m.mean, m.variance), which equals Φ(mean / √(1 + variance))."""
    if m.variance < 0:
        raise ValidationError(f"variance must be >= 0, got {m.variance}")
    return std_normal_cdf(m.mean / math.sqrt(1.0 + m.variance))


def binomial_log_pmf(n: int, k: int, p, *, include_coefficient: bool = True):
    """Log of the binomial probability of ``k`` successes in ``n`` trials.

    ``p`` may be an array, which is how the posterior grid evaluates the
    likelihood at every node in one call. Uses 0·log 0 = 0, so ``p`` at
    either endpoint gives 0 or -inf rather than nan. Pass
    ``include_coefficient=False`` to drop log C(n, k) when the result is
    renormalized afterwards anyway.
    """
    if int(n) != n or int(k) != k:
        raise ValidationError(f"n and k must be integers, got n={n}, k={k}")
    n, k = int(n), int(k)
    if n < 0 or k < 0:
        raise ValidationError(f"n and k must be non-negative, got n={n}, k={k}")
    if k > n:
        raise ValidationError(f"k={k} exceeds n={n}")
    p = as_probability(p, "p")
    out = special.xlogy(k, p) + special.xlog1py(n - k, -p)
    if include_coefficient:
        out = out + (special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1))
    return _unwrap(np.asarray(out))


def normal_pdf(x, mean: float = 0.0, variance: float = 1.0):
    """Normal density; used for priors and the Figure-3 style diagnostics."""
    if variance <= 0:
        raise ValidationError(f"variance must be > 0, got {variance}")
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * (x - mean) ** 2 / variance) / math.sqrt(2.0 * math.pi * variance)
    return _unwrap(out)
