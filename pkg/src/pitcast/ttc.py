"""Forward TTC PDs from an annual rating transition matrix.

The forward TTC PD for year h is the hazard: probability of defaulting in
year h given survival to the end of year h − 1, read off successive powers
of the transition matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

ROW_SUM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic annual migration matrix; the last grade is default."""

    grades: tuple
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "grades", tuple(str(g) for g in self.grades))
        probs = np.array(self.probs, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def default_grade(self) -> str:
        return self.grades[-1]

    def index(self, grade) -> int:
        try:
            return self.grades.index(str(grade))
        except ValueError:
            raise ValidationError(f"unknown grade {grade!r}; known grades: {', '.join(self.grades)}") from None


@dataclass(frozen=True, eq=False)
class TtcCurve:
    """Forward annual TTC PDs for horizons 1..H."""

    marginal_pds: np.ndarray

    def __post_init__(self):
        pds = np.array(self.marginal_pds, dtype=float).reshape(-1)
        if pds.size == 0:
            raise ValidationError("TTC curve is empty")
        if not np.all((pds > 0) & (pds < 1)):
            bad = int(np.argmax(~((pds > 0) & (pds < 1)))) + 1
            raise DomainError(f"TTC PD at horizon {bad} is {pds[bad - 1]!r}; forward TTC PDs must lie in (0, 1)")
        pds.setflags(write=False)
        object.__setattr__(self, "marginal_pds", pds)

    @classmethod
    def constant(cls, pd: float, horizon_max: int) -> "TtcCurve":
        return cls(np.full(int(horizon_max), float(pd)))

    @property
    def horizons(self) -> np.ndarray:
        return np.arange(1, self.marginal_pds.size + 1)

    def __len__(self):
        return int(self.marginal_pds.size)


def validate_matrix(m: TransitionMatrix) -> TransitionMatrix:
    p = m.probs
    k = len(m.grades)
    if p.ndim != 2 or p.shape != (k, k):
        raise ValidationError(f"transition matrix must be {k}x{k} to match its grades, got shape {p.shape}")
    if len(set(m.grades)) != k:
        raise ValidationError("grade labels must be unique")
    if k < 2:
        raise ValidationError("need at least one live grade plus the default state")
    if not np.all(np.isfinite(p)):
        i, j = np.argwhere(~np.isfinite(p))[0]
        raise ValidationError(f"non-finite entry at row {i} ({m.grades[i]}), column {j} ({m.grades[j]})")
    if np.any(p < 0):
        i, j = np.argwhere(p < 0)[0]
        raise ValidationError(f"negative entry {p[i, j]} at row {i} ({m.grades[i]}), column {j} ({m.grades[j]})")
    sums = p.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
    if bad.size:
        i = bad[0]
        raise ValidationError(f"row {i} ({m.grades[i]}) sums to {sums[i]!r}, not 1")
    if p[-1, -1] != 1.0:
        raise ValidationError(f"default state {m.default_grade!r} must be absorbing (row {k - 1}, column {k - 1} = 1)")
    return m


def cumulative_default_probs(m: TransitionMatrix, grade, horizon_max: int) -> np.ndarray:
    """c_1..c_H: probability of having defaulted within h years from ``grade``."""
    i = m.index(grade)
    out = np.empty(horizon_max)
    row = np.zeros(len(m.grades))
    row[i] = 1.0
    for h in range(horizon_max):
        row = row @ m.probs
        out[h] = row[-1]
    return out


def project_ttc_curve(m: TransitionMatrix, grade, horizon_max: int) -> TtcCurve:
    """Forward TTC PD curve for an obligor currently rated ``grade``."""
    validate_matrix(m)
    if int(horizon_max) != horizon_max or horizon_max < 1:
        raise ValidationError(f"horizon_max must be a positive integer, got {horizon_max}")
    horizon_max = int(horizon_max)
    if m.index(grade) == len(m.grades) - 1:
        raise ValidationError(f"grade {grade!r} is the default state")
    c = cumulative_default_probs(m, grade, horizon_max)
    prev = np.concatenate(([0.0], c[:-1]))
    if np.any(prev >= 1.0):
        h = int(np.argmax(prev >= 1.0)) + 1
        raise DomainError(f"grade {grade!r} has fully defaulted before horizon {h}; no survivors to condition on")
    return TtcCurve((c - prev) / (1.0 - prev))


def transition_power(m: TransitionMatrix, horizon: int) -> np.ndarray:
    """h-year transition matrix by repeated multiplication, without renormalizing."""
    out = np.eye(len(m.grades))
    for _ in range(int(horizon)):
        out = out @ m.probs
    return out
