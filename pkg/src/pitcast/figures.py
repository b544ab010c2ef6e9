"""Plot-ready tables for the seven illustration figures.

Each figure has a fixed parameter set; any of them can be overridden.
Output is reproducible per seed, but any other seed gives a different
realization of the same distribution.
"""

from __future__ import annotations

import warnings

import numpy as np
import pandas as pd

from .ar import Ar1Params, Ar2Params
from .bayes import DefaultEvidence, posterior
from .engine import ForecastRequest, run_forecast
from .errors import BoundaryEvidenceError, LowDefaultWarning, ValidationError
from .factor import PortfolioSnapshot
from .simulation import double_crossing_period, simulate_default_history, simulate_path, upward_crossings

FIGURES = {
    1: dict(kind="path", process=("ar1", 0.8), years=100),
    2: dict(kind="path", process=("ar2", 1.3, -0.65), years=100),
    3: dict(kind="posterior", pd_ttc=0.03, rho=0.15, n=(10, 1000), default_rate=0.20),
    4: dict(kind="forecast", pd_ttc=0.03, rho=0.15, n=100, process=("ar1", 0.8), bayes=True),
    5: dict(kind="forecast", pd_ttc=0.05, rho=0.15, n=100, process=("ar1", 0.8), bayes=True),
    6: dict(kind="forecast", pd_ttc=0.03, rho=0.15, n=10_000, process=("ar2", 1.3, -0.65), bayes=False),
    7: dict(kind="forecast", pd_ttc=0.03, rho=0.03, n=100_000, process=("ar2", 1.3, -0.65), bayes=False),
}
FORECAST_DEFAULTS = dict(history=50, horizon=50)


def make_process(spec) -> Ar1Params | Ar2Params:
    kind, *coef = spec
    if kind == "ar1":
        return Ar1Params(*coef)
    if kind == "ar2":
        return Ar2Params(*coef)
    raise ValidationError(f"unknown process {kind!r}")


def figure_config(figure: int, **overrides) -> dict:
    try:
        cfg = dict(FIGURES[int(figure)])
    except (KeyError, ValueError):
        raise ValidationError(f"unknown figure {figure!r}; choose one of {sorted(FIGURES)}") from None
    if cfg["kind"] == "forecast":
        cfg = {**FORECAST_DEFAULTS, **cfg}
    unknown = set(overrides) - set(cfg) - {"seed"}
    if unknown:
        raise ValidationError(f"figure {figure} has no parameter(s) {sorted(unknown)}")
    cfg.update(overrides)
    return cfg


def _seeds(seed: int, k: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(int(seed)).generate_state(k)]


def _path_table(cfg, seed):
    psi = simulate_path(make_process(cfg["process"]), cfg["years"], seed)
    crossing = np.zeros(psi.size, dtype=int)
    crossing[upward_crossings(psi)] = 1
    df = pd.DataFrame({"year": np.arange(1, psi.size + 1), "psi": psi, "upward_crossing": crossing})
    try:
        df.attrs["double_crossing_period"] = double_crossing_period(psi)
    except ValidationError:
        df.attrs["double_crossing_period"] = float("nan")
    return df


def _posterior_table(cfg):
    frames = []
    for n in cfg["n"]:
        k = int(round(cfg["default_rate"] * n))
        post = posterior(DefaultEvidence(n, k, cfg["pd_ttc"], cfg["rho"]))
        frames.append(
            pd.DataFrame(
                {
                    "n": n,
                    "defaults": k,
                    "psi": post.psi_nodes,
                    "prior": post.prior_densities(),
                    "posterior_exact": post.densities,
                    "posterior_approx": post.approx_densities(),
                }
            )
        )
    return pd.concat(frames, ignore_index=True)


def _snapshot(cfg, defaults):
    return PortfolioSnapshot(np.full(cfg["n"], cfg["pd_ttc"]), int(defaults))


def _forecast_table(cfg, seed):
    proc = make_process(cfg["process"])
    history, horizon = int(cfg["history"]), int(cfg["horizon"])
    path_seed, default_seed = _seeds(seed, 2)
    psi = simulate_path(proc, history + horizon, path_seed)
    sim = simulate_default_history(psi, cfg["pd_ttc"], cfg["rho"], cfg["n"], default_seed)
    years = np.arange(-(history - 1), horizon + 1)
    now = history - 1

    df = pd.DataFrame(
        {
            "year": years,
            "psi": psi,
            "pit_pd": sim.pit_pds,
            "defaults": sim.default_counts,
            "default_rate": sim.default_rates,
            "ttc_pd": cfg["pd_ttc"],
        }
    )
    notes = []
    previous = _snapshot(cfg, sim.default_counts[now - 1]) if isinstance(proc, Ar2Params) else None
    base = dict(
        snapshot=_snapshot(cfg, sim.default_counts[now]),
        rho=cfg["rho"],
        process=proc,
        horizon_max=horizon,
        previous_snapshot=previous,
    )

    simple = np.full(years.size, np.nan)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LowDefaultWarning)
            res = run_forecast(ForecastRequest(**base, mode="point"))
        simple[now + 1 :] = res.summary.portfolio["mean_marginal_pit_pd"].to_numpy()
        df.attrs["psi_hat"] = res.factor.mean
        if res.psi_previous is not None:
            df.attrs["psi_hat_previous"] = res.psi_previous
    except BoundaryEvidenceError as exc:
        notes.append(f"simple forecast unavailable: {exc}")
    df["forecast_simple"] = simple

    if cfg["bayes"]:
        res = run_forecast(ForecastRequest(**base, mode="bayes"))
        bayes = np.full(years.size, np.nan)
        bayes[now + 1 :] = res.summary.portfolio["mean_marginal_pit_pd"].to_numpy()
        df["forecast_bayes"] = bayes
        df.attrs["posterior_mean"] = res.factor.mean
        df.attrs["posterior_variance"] = res.factor.variance
    df.attrs["notes"] = notes
    return df


def replicate_figure(figure: int, seed: int = 0, **overrides) -> pd.DataFrame:
    """Table with the columns needed to redraw ``figure`` (1 to 7).

    Forecast figures (4 to 7) cover years −(history−1)..horizon. Forecast
    columns are filled for years after 0 and use only information up to
    year 0.
    """
    cfg = figure_config(figure, **overrides)
    seed = int(cfg.pop("seed", seed))
    if cfg["kind"] == "path":
        df = _path_table(cfg, seed)
    elif cfg["kind"] == "posterior":
        df = _posterior_table(cfg)
    else:
        df = _forecast_table(cfg, seed)
    df.attrs["figure"] = int(figure)
    df.attrs["seed"] = seed
    return df
