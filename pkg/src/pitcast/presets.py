"""Named R-squared (rho) presets.

Range endpoints reflect typical internal-model settings (non-retail 10% to
40%, retail 0.5% to 5%); the fixed values are the regulatory retail
settings for residential mortgages and qualifying revolving exposures. The
PD-dependent regulatory formula is deliberately not provided.
"""

from __future__ import annotations

from .errors import ValidationError
from .factor import check_rho

RHO_PRESETS = {
    "retail-low": 0.005,
    "retail-high": 0.05,
    "nonretail-low": 0.10,
    "nonretail-high": 0.40,
    "residential-mortgage": 0.15,
    "qualifying-revolving": 0.04,
}

# typical ranges for the AR coefficients, used for advisory messages only
AR1_TYPICAL = (0.6, 0.95)
AR2_TYPICAL_A1 = (1.2, 1.4)
AR2_TYPICAL_A2 = (-0.7, -0.5)


def resolve_rho(value) -> float:
    """Accept a number or a preset name."""
    if isinstance(value, str):
        key = value.strip().lower()
        if key in RHO_PRESETS:
            return RHO_PRESETS[key]
        try:
            value = float(key)
        except ValueError:
            raise ValidationError(
                f"rho must be a number or one of the presets {', '.join(sorted(RHO_PRESETS))}; got {value!r}"
            ) from None
    return check_rho(value)
