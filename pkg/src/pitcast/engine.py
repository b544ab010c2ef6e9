"""Forecast pipeline: snapshot -> current factor belief -> forward PIT curves.

Point mode solves for the factor from the default count; Bayesian mode
(AR(1) only) uses the moment-matched grid posterior instead. Every obligor
then gets a marginal PIT PD per future year plus the survival-product
cumulative PD.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import pandas as pd

from .ar import Ar1Params, Ar2Params, ar2_conditional_moments, forward_pit_ar1
from .bayes import DefaultEvidence, GridSpec, PosteriorGrid, PriorSpec, bayes_forward_pit, posterior, posterior_normal_approx
from .errors import UnsupportedModeError, ValidationError
from .factor import (
    DEFAULT_LOW_DEFAULT_THRESHOLD,
    FactorDistribution,
    PortfolioSnapshot,
    check_rho,
    estimate_factor,
    forward_pit,
)
from .ttc import TtcCurve

MODES = ("point", "bayes")


@dataclass(frozen=True)
class ForecastRequest:
    """Everything needed to forecast forward PIT PDs for one portfolio.

    ``ttc_curves`` maps obligor id to its forward TTC curve. Obligors left
    out keep their current TTC PD at every horizon. AR(2) in point mode
    needs ``previous_snapshot`` to estimate the factor one year earlier.
    """

    snapshot: PortfolioSnapshot
    rho: float
    process: Ar1Params | Ar2Params
    horizon_max: int
    mode: str = "point"
    prior: PriorSpec = field(default_factory=PriorSpec)
    ttc_curves: Mapping[str, TtcCurve] | None = None
    previous_snapshot: PortfolioSnapshot | None = None
    grid: GridSpec | None = None
    low_default_threshold: int | None = DEFAULT_LOW_DEFAULT_THRESHOLD

    def __post_init__(self):
        check_rho(self.rho, positive=True)
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not isinstance(self.process, (Ar1Params, Ar2Params)):
            raise ValidationError(f"process must be Ar1Params or Ar2Params, got {type(self.process).__name__}")
        if int(self.horizon_max) != self.horizon_max or self.horizon_max < 1:
            raise ValidationError(f"horizon_max must be a positive integer, got {self.horizon_max}")
        if isinstance(self.process, Ar2Params):
            if self.mode == "bayes":
                raise UnsupportedModeError("Bayesian mode is only defined for the AR(1) process")
            if self.previous_snapshot is None:
                raise ValidationError("AR(2) forecasts need the previous period's snapshot to estimate psi(T-1)")
        for oid, curve in (self.ttc_curves or {}).items():
            if str(oid) not in self.snapshot.obligor_ids:
                raise ValidationError(f"TTC curve given for unknown obligor {oid!r}")
            if len(curve) < self.horizon_max:
                raise ValidationError(
                    f"TTC curve for obligor {oid!r} covers {len(curve)} horizons, need {self.horizon_max}"
                )


@dataclass(frozen=True, eq=False)
class PitCurve:
    obligor_id: str
    ttc_pds: np.ndarray
    marginal_pit_pds: np.ndarray
    cumulative_pd: np.ndarray

    @property
    def horizons(self) -> np.ndarray:
        return np.arange(1, self.marginal_pit_pds.size + 1)


@dataclass(frozen=True, eq=False)
class LifetimeSummary:
    portfolio: pd.DataFrame
    obligors: pd.DataFrame


@dataclass(frozen=True, eq=False)
class ForecastResult:
    curves: dict
    factor: FactorDistribution
    psi_previous: float | None
    posterior: PosteriorGrid | None
    summary: LifetimeSummary


def cumulative_from_marginal(marginal: np.ndarray) -> np.ndarray:
    """1 − Π(1 − m_t), along the last axis."""
    return 1.0 - np.cumprod(1.0 - np.asarray(marginal, dtype=float), axis=-1)


def _natural_key(s: str):
    if s.isdigit():
        return [(0, int(s), "")]
    return [(0, int(t), "") if t.isdigit() else (1, 0, t) for t in re.split(r"(\d+)", s) if t]


def _ttc_matrix(req: ForecastRequest) -> np.ndarray:
    snap, h = req.snapshot, int(req.horizon_max)
    ttc = np.repeat(snap.ttc_pds[:, None], h, axis=1)
    for oid, curve in (req.ttc_curves or {}).items():
        ttc[snap.obligor_ids.index(str(oid))] = curve.marginal_pds[:h]
    return ttc


def run_forecast(req: ForecastRequest) -> ForecastResult:
    snap, rho, proc, h_max = req.snapshot, req.rho, req.process, int(req.horizon_max)
    ttc = _ttc_matrix(req)
    marginal = np.empty_like(ttc)
    post = None
    psi_prev = None

    if req.mode == "point":
        psi0 = estimate_factor(snap, rho, low_default_threshold=req.low_default_threshold)
        factor = FactorDistribution.known(psi0)
        if isinstance(proc, Ar1Params):
            for h in range(1, h_max + 1):
                marginal[:, h - 1] = forward_pit_ar1(ttc[:, h - 1], rho, proc, psi0, h)
        else:
            psi_prev = estimate_factor(req.previous_snapshot, rho, low_default_threshold=req.low_default_threshold)
            for h in range(1, h_max + 1):
                moments = ar2_conditional_moments(proc, psi0, psi_prev, h)
                marginal[:, h - 1] = forward_pit(ttc[:, h - 1], rho, moments)
    else:
        post = posterior(DefaultEvidence.from_snapshot(snap, rho), req.prior, req.grid)
        factor = posterior_normal_approx(post)
        for h in range(1, h_max + 1):
            marginal[:, h - 1] = bayes_forward_pit(ttc[:, h - 1], rho, factor, proc, h)

    cumulative = cumulative_from_marginal(marginal)
    order = sorted(range(snap.n), key=lambda i: _natural_key(snap.obligor_ids[i]))
    curves = {
        snap.obligor_ids[i]: PitCurve(snap.obligor_ids[i], ttc[i], marginal[i], cumulative[i]) for i in order
    }
    return ForecastResult(curves, factor, psi_prev, post, lifetime_summary(curves))


def lifetime_summary(curves) -> LifetimeSummary:
    """Per-horizon portfolio means plus one row per obligor and horizon.

    The portfolio rows are plain averages over obligors, not conditioned on
    survival. Obligors are ordered by id (numeric parts compared as numbers).
    """
    curves = list(curves.values()) if isinstance(curves, Mapping) else list(curves)
    if not curves:
        raise ValidationError("lifetime summary needs at least one curve")
    curves.sort(key=lambda c: _natural_key(c.obligor_id))
    h = curves[0].marginal_pit_pds.size
    if any(c.marginal_pit_pds.size != h for c in curves):
        raise ValidationError("all curves must share the same horizons")
    marginal = np.vstack([c.marginal_pit_pds for c in curves])
    cumulative = np.vstack([c.cumulative_pd for c in curves])
    ttc = np.vstack([c.ttc_pds for c in curves])
    horizons = np.arange(1, h + 1)
    portfolio = pd.DataFrame(
        {
            "horizon": horizons,
            "mean_ttc_pd": ttc.mean(axis=0),
            "mean_marginal_pit_pd": marginal.mean(axis=0),
            "mean_cumulative_pd": cumulative.mean(axis=0),
        }
    )
    obligors = pd.DataFrame(
        {
            "obligor_id": np.repeat([c.obligor_id for c in curves], h),
            "horizon": np.tile(horizons, len(curves)),
            "ttc_pd": ttc.reshape(-1),
            "marginal_pit_pd": marginal.reshape(-1),
            "cumulative_pd": cumulative.reshape(-1),
        }
    )
    return LifetimeSummary(portfolio, obligors)
