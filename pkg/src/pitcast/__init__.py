"""Forward point-in-time PD forecasts from a one-factor credit portfolio model.

The systematic factor follows a stationary AR(1) or AR(2) process. Its
current value is estimated from observed default counts, either as a point
estimate or as a Bayesian posterior for low-default portfolios.
"""

from .ar import (
    Ar1Params,
    Ar2Params,
    ar1_conditional_moments,
    ar2_conditional_moments,
    ar2_damped_period,
    ar2_spectral_period,
    forward_pit_ar1,
    forward_pit_ar2,
    validate_ar1,
    validate_ar2,
)
from .bayes import (
    DefaultEvidence,
    GridSpec,
    PosteriorGrid,
    PriorSpec,
    bayes_forward_pit,
    posterior,
    posterior_normal_approx,
    propagate_ar1,
)
from .engine import ForecastRequest, ForecastResult, PitCurve, lifetime_summary, run_forecast
from .errors import (
    BoundaryEvidenceError,
    DomainError,
    InputFormatError,
    LowDefaultWarning,
    PitcastError,
    UnsupportedModeError,
    ValidationError,
)
from .factor import (
    FactorDistribution,
    PortfolioSnapshot,
    barrier_from_ttc,
    estimate_factor,
    factor_from_pit,
    forward_pit,
    pit_conditional,
)
from .normal import NormalMoments, binomial_log_pmf, expected_normal_cdf, std_normal_cdf, std_normal_quantile
from .simulation import (
    SimulatedHistory,
    double_crossing_period,
    simulate_ar1_path,
    simulate_ar2_path,
    simulate_default_history,
)
from .ttc import TransitionMatrix, TtcCurve, project_ttc_curve, validate_matrix

__version__ = "0.1.0"
