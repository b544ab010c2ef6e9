"""One-factor credit portfolio transforms.

An obligor defaults when its standardized asset return

    r = ψ·√ρ + ε·√(1−ρ),    ψ, ε ~ N(0, 1) independent

falls below the barrier Φ⁻¹(PD_TTC). Conditioning on the systematic factor
ψ gives the point-in-time PD; averaging over a normal belief about ψ gives
the forward PD in closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryEvidenceError, DomainError, LowDefaultWarning, ValidationError
from .normal import NormalMoments, as_probability, std_normal_cdf, std_normal_quantile

DEFAULT_LOW_DEFAULT_THRESHOLD = 10
BRACKET = 8.0
EXPANDED_BRACKET = 12.0


@dataclass(frozen=True)
class FactorDistribution(NormalMoments):
    """Normal belief about the systematic factor in some period.

    ``variance == 0`` means the factor is treated as known exactly.
    """

    @classmethod
    def unconditional(cls) -> "FactorDistribution":
        return cls(0.0, 1.0)

    @classmethod
    def known(cls, psi: float) -> "FactorDistribution":
        return cls(float(psi), 0.0)


@dataclass(frozen=True, eq=False)
class PortfolioSnapshot:
    """TTC PDs of every obligor plus the number that defaulted in one period."""

    ttc_pds: np.ndarray
    defaults: int
    obligor_ids: tuple = field(default=())

    def __post_init__(self):
        pds = np.array(self.ttc_pds, dtype=float).reshape(-1)
        if pds.size == 0:
            raise ValidationError("portfolio snapshot is empty")
        as_probability(pds, "ttc_pds", open_interval=True)
        pds.setflags(write=False)
        object.__setattr__(self, "ttc_pds", pds)
        if int(self.defaults) != self.defaults:
            raise ValidationError(f"defaults must be an integer count, got {self.defaults}")
        object.__setattr__(self, "defaults", int(self.defaults))
        if not 0 <= self.defaults <= pds.size:
            raise ValidationError(f"defaults={self.defaults} outside [0, {pds.size}]")
        ids = tuple(str(i) for i in self.obligor_ids) or tuple(str(i) for i in range(pds.size))
        if len(ids) != pds.size:
            raise ValidationError(f"{len(ids)} obligor ids for {pds.size} TTC PDs")
        if len(set(ids)) != len(ids):
            raise ValidationError("obligor ids must be unique")
        object.__setattr__(self, "obligor_ids", ids)

    @property
    def n(self) -> int:
        return int(self.ttc_pds.size)

    @property
    def default_rate(self) -> float:
        return self.defaults / self.n

    @property
    def is_homogeneous(self) -> bool:
        return bool(np.all(self.ttc_pds == self.ttc_pds[0]))


def check_rho(rho: float, *, positive: bool = False) -> float:
    """Validate an R-squared: 0 ≤ rho < 1, or 0 < rho < 1 with ``positive``."""
    rho = float(rho)
    if not math.isfinite(rho) or rho < 0 or rho >= 1:
        raise ValidationError(f"rho must satisfy 0 <= rho < 1, got {rho}")
    if positive and rho == 0:
        raise DomainError("rho = 0 leaves the systematic factor unidentifiable")
    return rho


def barrier_from_ttc(pd_ttc):
    """Asset-return default barrier implied by a TTC PD."""
    return std_normal_quantile(as_probability(pd_ttc, "pd_ttc", open_interval=True))


def pit_conditional(pd_ttc, rho: float, psi):
    """PIT PD given the factor realization ``psi``.

    Φ((Φ⁻¹(pd_ttc) − psi·√rho) / √(1 − rho)); broadcasts over array inputs.
    """
    rho = check_rho(rho)
    barrier = np.asarray(barrier_from_ttc(pd_ttc))
    psi = np.asarray(psi, dtype=float)
    return std_normal_cdf((barrier - psi * math.sqrt(rho)) / math.sqrt(1.0 - rho))


def factor_from_pit(pd_ttc, pd_pit, rho: float):
    """Invert :func:`pit_conditional` for the factor realization."""
    rho = check_rho(rho, positive=True)
    barrier = np.asarray(barrier_from_ttc(pd_ttc))
    pit_barrier = np.asarray(std_normal_quantile(as_probability(pd_pit, "pd_pit", open_interval=True)))
    out = (barrier - pit_barrier * math.sqrt(1.0 - rho)) / math.sqrt(rho)
    return float(out) if out.ndim == 0 else out


def forward_pit(pd_ttc, rho: float, factor: NormalMoments):
    """Forward PIT PD when the factor is only known up to N(mean, variance).

    Φ((Φ⁻¹(pd_ttc) − mean·√rho) / √(1 − rho + variance·rho)). With the
    unconditional belief N(0, 1) this returns ``pd_ttc``; with variance 0
    it matches :func:`pit_conditional`.
    """
    rho = check_rho(rho)
    barrier = np.asarray(barrier_from_ttc(pd_ttc))
    # 1 + rho*(v - 1) == 1 - rho + v*rho, but exact for v = 1
    scale = math.sqrt(1.0 + rho * (factor.variance - 1.0))
    return std_normal_cdf((barrier - factor.mean * math.sqrt(rho)) / scale)


def warn_if_low_default(defaults: int, threshold: int = DEFAULT_LOW_DEFAULT_THRESHOLD) -> bool:
    if defaults < threshold:
        warnings.warn(
            f"only {defaults} defaults observed (threshold {threshold}); the point estimate of the "
            "systematic factor is unreliable, consider the Bayesian posterior instead",
            LowDefaultWarning,
            stacklevel=3,
        )
        return True
    return False


def _expected_defaults(barriers: np.ndarray, weights: np.ndarray, rho: float, psi: float) -> float:
    z = (barriers - psi * math.sqrt(rho)) / math.sqrt(1.0 - rho)
    return math.fsum(weights * std_normal_cdf(z))


def estimate_factor(
    snapshot: PortfolioSnapshot,
    rho: float,
    *,
    tol: float = 1e-8,
    low_default_threshold: int | None = DEFAULT_LOW_DEFAULT_THRESHOLD,
) -> float:
    """Factor realization that makes expected defaults equal observed defaults.

    Solves Σ_i pit_conditional(ttc_i, rho, ψ) = defaults by bisection (the
    left side is strictly decreasing in ψ) followed by a Newton polish.

    Raises
    ------
    BoundaryEvidenceError
        If no obligor or every obligor defaulted. Use
        :func:`pitcast.bayes.posterior` for such portfolios.
    """
    rho = check_rho(rho, positive=True)
    n, d = snapshot.n, snapshot.defaults
    if d == 0 or d == n:
        raise BoundaryEvidenceError(
            f"{d} of {n} obligors defaulted; the factor estimate has no finite root. "
            "Use the Bayesian posterior for boundary evidence."
        )
    if low_default_threshold is not None:
        warn_if_low_default(d, low_default_threshold)

    # obligors sharing a TTC PD contribute identically
    ttc, counts = np.unique(snapshot.ttc_pds, return_counts=True)
    barriers = np.atleast_1d(barrier_from_ttc(ttc))
    weights = counts.astype(float)

    def residual(psi):
        return _expected_defaults(barriers, weights, rho, psi) - d

    lo, hi = -BRACKET, BRACKET
    if residual(lo) < 0 or residual(hi) > 0:
        lo, hi = -EXPANDED_BRACKET, EXPANDED_BRACKET
        if residual(lo) < 0 or residual(hi) > 0:
            raise DomainError(
                f"no factor in [{lo}, {hi}] reproduces {d} defaults out of {n}; TTC PDs are inconsistent with the count"
            )

    # residual(lo) >= 0 >= residual(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if residual(mid) > 0:
            lo = mid
        else:
            hi = mid
    psi = 0.5 * (lo + hi)

    slope_scale = math.sqrt(rho) / math.sqrt(1.0 - rho)
    for _ in range(3):
        z = (barriers - psi * math.sqrt(rho)) / math.sqrt(1.0 - rho)
        deriv = -slope_scale * math.fsum(weights * np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi))
        r = residual(psi)
        if abs(r) < tol * 1e-3 or deriv == 0:
            break
        step = psi - r / deriv
        if not lo - 1e-9 <= step <= hi + 1e-9:
            break
        psi = step

    if abs(residual(psi)) >= tol:
        raise DomainError(f"factor root did not converge: residual {residual(psi):.3g} defaults")
    return psi
