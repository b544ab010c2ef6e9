"""Bayesian estimate of the current systematic factor from a default count.

For low-default portfolios the point estimate is volatile or, with zero
defaults, does not exist. Here the factor gets a normal prior (by default
the unconditional N(0, 1)) and a binomial likelihood, and the posterior is
evaluated on a uniform grid and normalized by the trapezoidal rule. Its
mean and variance then feed the AR(1) propagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .ar import Ar1Params, check_horizon
from .errors import ValidationError
from .factor import FactorDistribution, PortfolioSnapshot, check_rho, forward_pit, pit_conditional
from .normal import NormalMoments, as_probability, binomial_log_pmf

MIN_GRID_NODES = 1001
PRIOR_COVERAGE_SDS = 8.0


@dataclass(frozen=True)
class PriorSpec:
    """Normal prior on the factor. N(−1, 1) would encode a mild recession."""

    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)) or self.variance <= 0:
            raise ValidationError(f"prior needs finite mean and variance > 0, got ({self.mean}, {self.variance})")

    def density(self, psi):
        psi = np.asarray(psi, dtype=float)
        return np.exp(-0.5 * (psi - self.mean) ** 2 / self.variance) / math.sqrt(2 * math.pi * self.variance)

    def log_density(self, psi):
        psi = np.asarray(psi, dtype=float)
        return -0.5 * (psi - self.mean) ** 2 / self.variance - 0.5 * math.log(2 * math.pi * self.variance)


@dataclass(frozen=True)
class DefaultEvidence:
    """``n_defaults`` out of ``n`` obligors sharing one TTC PD and rho."""

    n: int
    n_defaults: int
    pd_ttc: float
    rho: float

    def __post_init__(self):
        if int(self.n) != self.n or int(self.n_defaults) != self.n_defaults:
            raise ValidationError("n and n_defaults must be integer counts")
        if self.n < 1 or not 0 <= self.n_defaults <= self.n:
            raise ValidationError(f"need n >= 1 and 0 <= n_defaults <= n, got n={self.n}, n_defaults={self.n_defaults}")
        as_probability(self.pd_ttc, "pd_ttc", open_interval=True)
        check_rho(self.rho)

    @classmethod
    def from_snapshot(cls, snapshot: PortfolioSnapshot, rho: float) -> "DefaultEvidence":
        if not snapshot.is_homogeneous:
            raise ValidationError(
                "Bayesian factor estimation needs a common TTC PD for all obligors; the snapshot is heterogeneous"
            )
        return cls(snapshot.n, snapshot.defaults, float(snapshot.ttc_pds[0]), rho)


@dataclass(frozen=True)
class GridSpec:
    lower: float = -8.0
    upper: float = 8.0
    nodes: int = 4001

    @classmethod
    def covering(cls, prior: PriorSpec, nodes: int = 4001) -> "GridSpec":
        """Default grid [−8, 8] widened if needed to span prior mean ± 8 sd."""
        half = PRIOR_COVERAGE_SDS * math.sqrt(prior.variance)
        return cls(min(-8.0, prior.mean - half), max(8.0, prior.mean + half), nodes)

    def validate_for(self, prior: PriorSpec) -> None:
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)) or self.upper <= self.lower:
            raise ValidationError(f"degenerate grid [{self.lower}, {self.upper}]")
        if self.nodes < MIN_GRID_NODES:
            raise ValidationError(f"grid needs at least {MIN_GRID_NODES} nodes, got {self.nodes}")
        half = PRIOR_COVERAGE_SDS * math.sqrt(prior.variance)
        # small slack so a grid built from the same arithmetic is accepted
        slack = 1e-12 * max(1.0, abs(prior.mean) + half)
        if self.lower > prior.mean - half + slack or self.upper < prior.mean + half - slack:
            raise ValidationError(
                f"grid [{self.lower}, {self.upper}] does not cover prior mean +/- {PRIOR_COVERAGE_SDS:g} sd "
                f"[{prior.mean - half:.6g}, {prior.mean + half:.6g}]"
            )

    def points(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, int(self.nodes))


@dataclass(frozen=True, eq=False)
class PosteriorGrid:
    psi_nodes: np.ndarray
    densities: np.ndarray
    mean: float
    variance: float
    prior: PriorSpec

    @property
    def mode(self) -> float:
        """Grid argmax refined by fitting a parabola through its neighbours."""
        i = int(np.argmax(self.densities))
        x, f = self.psi_nodes, self.densities
        if 0 < i < len(x) - 1:
            f0, f1, f2 = f[i - 1], f[i], f[i + 1]
            denom = f0 - 2 * f1 + f2
            if denom < 0:
                h = x[i + 1] - x[i]
                return float(x[i] + 0.5 * h * (f0 - f2) / denom)
        return float(x[i])

    def prior_densities(self) -> np.ndarray:
        return self.prior.density(self.psi_nodes)

    def approx_densities(self) -> np.ndarray:
        """Moment-matched normal density on the same nodes."""
        return np.exp(-0.5 * (self.psi_nodes - self.mean) ** 2 / self.variance) / math.sqrt(
            2 * math.pi * self.variance
        )

    @property
    def max_density_gap(self) -> float:
        """Largest absolute gap between the exact and the moment-matched density."""
        return float(np.max(np.abs(self.densities - self.approx_densities())))


def grid_moments(psi: np.ndarray, density: np.ndarray) -> tuple[float, float]:
    mean = float(trapezoid(psi * density, psi))
    variance = float(trapezoid((psi - mean) ** 2 * density, psi))
    return mean, variance


def posterior(evidence: DefaultEvidence, prior: PriorSpec | None = None, grid: GridSpec | None = None) -> PosteriorGrid:
    """Grid posterior of the factor given a default count.

    Density at each node is proportional to prior(ψ) times the binomial
    likelihood of the count at PD = pit_conditional(pd_ttc, rho, ψ). Works
    for 0 and ``n`` defaults too.
    """
    prior = prior or PriorSpec()
    grid = grid or GridSpec.covering(prior)
    grid.validate_for(prior)
    psi = grid.points()

    pit = pit_conditional(evidence.pd_ttc, evidence.rho, psi)
    log_post = prior.log_density(psi) + binomial_log_pmf(
        evidence.n, evidence.n_defaults, pit, include_coefficient=False
    )
    top = np.max(log_post)
    if not np.isfinite(top):
        raise ValidationError("likelihood vanishes on the whole grid; widen the grid")
    unnorm = np.exp(log_post - top)
    density = unnorm / trapezoid(unnorm, psi)
    mean, variance = grid_moments(psi, density)
    return PosteriorGrid(psi, density, mean, variance, prior)


def posterior_normal_approx(p: PosteriorGrid) -> FactorDistribution:
    return FactorDistribution(p.mean, p.variance)


def propagate_ar1(factor: NormalMoments, p: Ar1Params, horizon: int) -> FactorDistribution:
    """Push an uncertain current factor N(m, v) forward under AR(1).

    Returns N(m·a1^h, 1 + (v − 1)·a1^(2h)): extra short-term variance,
    same long-run N(0, 1).
    """
    horizon = check_horizon(horizon, 0)
    decay = p.a1**horizon
    return FactorDistribution(factor.mean * decay, 1.0 + (factor.variance - 1.0) * decay * decay)


def bayes_forward_pit(pd_ttc, rho: float, factor: NormalMoments, p: Ar1Params, horizon: int):
    horizon = check_horizon(horizon, 1)
    return forward_pit(pd_ttc, rho, propagate_ar1(factor, p, horizon))
