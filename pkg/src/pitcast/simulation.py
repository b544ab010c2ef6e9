"""Seeded simulation of factor paths and portfolio default histories.

Normal variates come from inverse-CDF transforms of 53-bit uniforms drawn
from numpy's PCG64 generator, so a given seed always yields the same path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal, special

from .ar import Ar1Params, Ar2Params
from .errors import ValidationError
from .factor import barrier_from_ttc, check_rho, pit_conditional

AR2_BURN_IN = 1000
METHODS = ("binomial", "asset-return")
_BLOCK_DRAWS = 2_000_000


def _rng(seed) -> np.random.Generator:
    if int(seed) != seed:
        raise ValidationError(f"seed must be an integer, got {seed!r}")
    return np.random.default_rng(int(seed))


def standard_normals(rng: np.random.Generator, size) -> np.ndarray:
    """N(0, 1) draws as Φ⁻¹ of uniforms strictly inside (0, 1)."""
    k = rng.integers(0, 2**53, size=size, dtype=np.int64)
    return special.ndtri((k + 0.5) * 2.0**-53)


def _check_length(length, minimum: int) -> int:
    if int(length) != length or length < minimum:
        raise ValidationError(f"path length must be an integer >= {minimum}, got {length}")
    return int(length)


def simulate_ar1_path(p: Ar1Params, length: int, seed: int) -> np.ndarray:
    """AR(1) factor path started from the stationary N(0, 1)."""
    length = _check_length(length, 1)
    shocks = standard_normals(_rng(seed), length)
    shocks[1:] *= math.sqrt(p.innovation_variance)
    return signal.lfilter([1.0], [1.0, -p.a1], shocks)


def simulate_ar2_path(p: Ar2Params, length: int, seed: int) -> np.ndarray:
    """AR(2) factor path; the first 1000 steps from a zero start are discarded."""
    length = _check_length(length, 2)
    shocks = math.sqrt(p.innovation_variance) * standard_normals(_rng(seed), length + AR2_BURN_IN)
    return signal.lfilter([1.0], [1.0, -p.a1, -p.a2], shocks)[AR2_BURN_IN:]


def simulate_path(p: Ar1Params | Ar2Params, length: int, seed: int) -> np.ndarray:
    if isinstance(p, Ar2Params):
        return simulate_ar2_path(p, length, seed)
    return simulate_ar1_path(p, length, seed)


@dataclass(frozen=True, eq=False)
class SimulatedHistory:
    psi_path: np.ndarray
    pit_pds: np.ndarray
    default_counts: np.ndarray
    n: int
    seed: int
    method: str = "binomial"

    @property
    def default_rates(self) -> np.ndarray:
        return self.default_counts / self.n


def simulate_default_history(
    psi_path, pd_ttc: float, rho: float, n: int, seed: int, method: str = "binomial"
) -> SimulatedHistory:
    """Default counts of an ``n``-obligor homogeneous portfolio along a factor path.

    ``binomial`` draws each year's count from Binomial(n, PIT PD).
    ``asset-return`` draws every obligor's idiosyncratic return and counts
    those whose asset return falls below the TTC barrier. Both give the
    same distribution; the second is much slower.
    """
    psi = np.asarray(psi_path, dtype=float).reshape(-1)
    if psi.size == 0 or not np.all(np.isfinite(psi)):
        raise ValidationError("psi_path must be a non-empty finite sequence")
    rho = check_rho(rho)
    if int(n) != n or n < 1:
        raise ValidationError(f"portfolio size must be a positive integer, got {n}")
    n = int(n)
    if method not in METHODS:
        raise ValidationError(f"method must be one of {METHODS}, got {method!r}")
    pit = np.atleast_1d(pit_conditional(pd_ttc, rho, psi))
    rng = _rng(seed)

    if method == "binomial":
        counts = rng.binomial(n, pit)
    else:
        barrier = barrier_from_ttc(pd_ttc)
        counts = np.empty(psi.size, dtype=np.int64)
        block = max(1, _BLOCK_DRAWS // n)
        for start in range(0, psi.size, block):
            stop = min(start + block, psi.size)
            eps = standard_normals(rng, (stop - start, n))
            returns = psi[start:stop, None] * math.sqrt(rho) + eps * math.sqrt(1.0 - rho)
            counts[start:stop] = np.count_nonzero(returns < barrier, axis=1)
    return SimulatedHistory(psi, pit, np.asarray(counts, dtype=np.int64), n, int(seed), method)


def upward_crossings(psi_path) -> np.ndarray:
    """Indices t with ψ_{t−1} < 0 <= ψ_t."""
    x = np.asarray(psi_path, dtype=float)
    return np.flatnonzero((x[:-1] < 0) & (x[1:] >= 0)) + 1


def double_crossing_period(psi_path) -> float:
    """Average cycle length: mean gap between consecutive upward zero crossings."""
    x = np.asarray(psi_path, dtype=float).reshape(-1)
    if x.size < 10:
        raise ValidationError(f"need a path of at least 10 years, got {x.size}")
    ups = upward_crossings(x)
    if ups.size < 2:
        raise ValidationError(f"only {ups.size} upward zero crossing(s); cannot measure a cycle")
    return float(np.mean(np.diff(ups)))
