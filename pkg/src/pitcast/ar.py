"""Autoregressive dynamics of the systematic factor.

Both processes are parametrized so that the factor is stationary with mean
0 and variance 1. The conditional distribution given the latest estimate(s)
therefore starts out concentrated at the estimate and relaxes to N(0, 1),
which is what makes forward PIT PDs converge to TTC PDs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .factor import FactorDistribution, check_rho, forward_pit, pit_conditional


@dataclass(frozen=True)
class Ar1Params:
    """ψ_t = a1·ψ_{t−1} + ε_t with ε_t ~ N(0, 1 − a1²)."""

    a1: float

    def __post_init__(self):
        a1 = float(self.a1)
        if not math.isfinite(a1) or not 0 <= a1 < 1:
            raise ValidationError(f"AR(1) restriction violated: 0 <= a1 < 1 (got a1={self.a1})")
        object.__setattr__(self, "a1", a1)

    @property
    def innovation_variance(self) -> float:
        return 1.0 - self.a1**2


def ar2_restriction_violations(a1: float, a2: float) -> list[str]:
    """Names of the AR(2) restrictions that (a1, a2) violates."""
    checks = [
        ("-1 < a2 < 1", -1 < a2 < 1),
        ("a2 - a1 < 1", a2 - a1 < 1),
        ("a2 + a1 < 1", a2 + a1 < 1),
        ("a1^2 + 4*a2 < 0 (complex roots)", a1 * a1 + 4 * a2 < 0),
    ]
    return [name for name, ok in checks if not ok]


@dataclass(frozen=True)
class Ar2Params:
    """ψ_t = a1·ψ_{t−1} + a2·ψ_{t−2} + ε_t with unit stationary variance.

    The parameters must lie in the stationarity triangle and give complex
    characteristic roots (pseudo-cyclical behaviour). The innovation
    variance is derived, not free.
    """

    a1: float
    a2: float

    def __post_init__(self):
        a1, a2 = float(self.a1), float(self.a2)
        if not (math.isfinite(a1) and math.isfinite(a2)):
            raise ValidationError(f"AR(2) coefficients must be finite, got a1={self.a1}, a2={self.a2}")
        bad = ar2_restriction_violations(a1, a2)
        if bad:
            raise ValidationError(
                f"AR(2) restriction(s) violated for a1={a1}, a2={a2}: " + "; ".join(bad)
            )
        object.__setattr__(self, "a1", a1)
        object.__setattr__(self, "a2", a2)

    @property
    def innovation_variance(self) -> float:
        a1, a2 = self.a1, self.a2
        return (1 + a2) * ((1 - a2) ** 2 - a1**2) / (1 - a2)


def validate_ar1(a1: float) -> Ar1Params:
    return Ar1Params(a1)


def validate_ar2(a1: float, a2: float) -> Ar2Params:
    return Ar2Params(a1, a2)


def check_horizon(horizon, minimum: int) -> int:
    if int(horizon) != horizon:
        raise ValidationError(f"horizon must be an integer number of years, got {horizon}")
    horizon = int(horizon)
    if horizon < minimum:
        raise ValidationError(f"horizon must be >= {minimum}, got {horizon}")
    return horizon


def ar1_conditional_moments(p: Ar1Params, psi0: float, horizon: int) -> FactorDistribution:
    """Distribution of ψ ``horizon`` years after observing ψ = ``psi0``."""
    horizon = check_horizon(horizon, 0)
    decay = p.a1**horizon
    return FactorDistribution(psi0 * decay, 1.0 - decay * decay)


def ar2_weights(p: Ar2Params, horizon: int) -> np.ndarray:
    """Impulse-response weights w_1..w_horizon (w_1 = 1, w_2 = a1)."""
    w = np.empty(horizon)
    for t in range(horizon):
        if t == 0:
            w[t] = 1.0
        elif t == 1:
            w[t] = p.a1
        else:
            w[t] = p.a1 * w[t - 1] + p.a2 * w[t - 2]
    return w


def ar2_conditional_moments(p: Ar2Params, psi0: float, psi_minus1: float, horizon: int) -> FactorDistribution:
    """Distribution of ψ ``horizon`` years ahead given the last two realizations.

    The mean follows the AR recursion seeded with (psi0, psi_minus1); the
    variance is σ_ε²·Σ w_t² over the impulse-response weights.
    """
    horizon = check_horizon(horizon, 1)
    prev, cur = float(psi_minus1), float(psi0)
    for _ in range(horizon):
        prev, cur = cur, p.a1 * cur + p.a2 * prev
    w = ar2_weights(p, horizon)
    variance = p.innovation_variance * math.fsum(w * w)
    return FactorDistribution(cur, variance)


def forward_pit_ar1(pd_ttc, rho: float, p: Ar1Params, psi0: float, horizon: int):
    """Forward PIT PD under AR(1): the conditional PD with rho decayed to rho·a1^(2h)."""
    horizon = check_horizon(horizon, 1)
    rho = check_rho(rho)
    return pit_conditional(pd_ttc, rho * p.a1 ** (2 * horizon), psi0)


def forward_pit_ar2(pd_ttc, rho: float, p: Ar2Params, psi0: float, psi_minus1: float, horizon: int):
    return forward_pit(pd_ttc, rho, ar2_conditional_moments(p, psi0, psi_minus1, horizon))


def _period_from_cosine(cosine: float, p: Ar2Params) -> float:
    if not -1.0 <= cosine <= 1.0:
        raise DomainError(
            f"spectral peak undefined for a1={p.a1}, a2={p.a2}: arccos argument {cosine:.6g} outside [-1, 1]"
        )
    return 2.0 * math.pi / math.acos(cosine)


def ar2_spectral_period(p: Ar2Params) -> float:
    """Period (years) of the AR(2) spectral-density peak.

    f = arccos(a1·(a2 − 1) / (4·a2)) / 2π and the period is 1/f. About
    10.46 years for (1.3, −0.65).
    """
    return _period_from_cosine(p.a1 * (p.a2 - 1) / (4 * p.a2), p)


def ar2_damped_period(p: Ar2Params) -> float:
    """Pseudo-period 2π / arccos(a1 / (2√−a2)) of the damped oscillation.

    Reported alongside :func:`ar2_spectral_period` for comparison; about
    9.93 years for (1.3, −0.65).
    """
    return _period_from_cosine(p.a1 / (2 * math.sqrt(-p.a2)), p)
