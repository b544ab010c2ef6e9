"""Command-line interface.

    pitcast [--config FILE] SUBCOMMAND [options]

Subcommands: validate-params, estimate-factor, posterior, forecast,
project-ttc, simulate, replicate-figure. Values from ``--config`` (flat
key=value) are used for any flag not given on the command line.

Exit codes: 0 ok, 2 validation, 3 boundary evidence, 4 io, 5 internal.
Errors are printed to stderr as ``error[<category>]: <message>``.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np
import pandas as pd

from . import __version__
from .ar import Ar1Params, Ar2Params, ar2_damped_period, ar2_spectral_period
from .bayes import DefaultEvidence, GridSpec, PriorSpec, posterior
from .engine import ForecastRequest, run_forecast
from .errors import BoundaryEvidenceError, PitcastError, ValidationError
from .factor import DEFAULT_LOW_DEFAULT_THRESHOLD, estimate_factor
from .figures import replicate_figure
from .fileio import (
    read_config,
    read_snapshot,
    read_snapshot_table,
    read_transition_matrix,
    read_ttc_curves,
    write_table,
)
from .presets import AR1_TYPICAL, AR2_TYPICAL_A1, AR2_TYPICAL_A2, resolve_rho
from .simulation import METHODS, double_crossing_period, simulate_default_history, simulate_path
from .ttc import project_ttc_curve

BUILTIN_DEFAULTS = {
    "mode": "point",
    "prior_mean": 0.0,
    "prior_var": 1.0,
    "horizons": 10,
    "grid_nodes": 4001,
    "low_default_threshold": DEFAULT_LOW_DEFAULT_THRESHOLD,
    "seed": 0,
    "method": "binomial",
}
CONFIG_KEYS = {
    "rho": str,
    "ar1": float,
    "ar2": lambda s: [float(x) for x in s.replace(",", " ").split()],
    "mode": str,
    "prior_mean": float,
    "prior_var": float,
    "horizons": int,
    "grid_min": float,
    "grid_max": float,
    "grid_nodes": int,
    "low_default_threshold": int,
    "seed": int,
    "pd_ttc": float,
    "n": int,
    "method": str,
}


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser, *names: str) -> None:
    add = {
        "rho": lambda: p.add_argument("--rho", help="R-squared as a number or preset name"),
        "process": lambda: (
            p.add_argument("--ar1", type=float, metavar="A1"),
            p.add_argument("--ar2", type=float, nargs=2, metavar=("A1", "A2")),
        ),
        "prior": lambda: (
            p.add_argument("--prior-mean", type=float),
            p.add_argument("--prior-var", type=float),
        ),
        "grid": lambda: (
            p.add_argument("--grid-min", type=float),
            p.add_argument("--grid-max", type=float),
            p.add_argument("--grid-nodes", type=int),
        ),
        "horizons": lambda: p.add_argument("--horizons", type=int, help="forecast horizon in years"),
        "seed": lambda: p.add_argument("--seed", type=int),
        "threshold": lambda: p.add_argument("--low-default-threshold", type=int),
    }
    for name in names:
        add[name]()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pitcast", description="Forward point-in-time PD forecasts.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key=value file supplying defaults for flags")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("validate-params", help="check rho and AR coefficients")
    _common(p, "rho", "process")
    p.add_argument("-o", "--output")

    p = sub.add_parser("estimate-factor", help="point estimate of the current factor")
    p.add_argument("--snapshot", required=True)
    _common(p, "rho", "threshold")
    p.add_argument("-o", "--output")

    p = sub.add_parser("posterior", help="grid posterior of the current factor")
    p.add_argument("--snapshot", help="homogeneous snapshot CSV (alternative to --n/--defaults/--pd-ttc)")
    p.add_argument("--n", type=int)
    p.add_argument("--defaults", type=int)
    p.add_argument("--pd-ttc", type=float)
    _common(p, "rho", "prior", "grid")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("forecast", help="forward PIT PD curves for a portfolio")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--previous-snapshot", help="snapshot one year earlier (AR(2) only)")
    p.add_argument("--ttc-curves", help="CSV obligor_id,horizon,ttc_pd of forward TTC PDs")
    p.add_argument("--matrix", help="transition matrix CSV; uses the snapshot's grade column")
    p.add_argument("--mode", choices=("point", "bayes"))
    _common(p, "rho", "process", "horizons", "prior", "grid", "threshold")
    p.add_argument("-o", "--output", required=True, help="portfolio summary CSV")
    p.add_argument("--obligor-output", help="per-obligor curves CSV")

    p = sub.add_parser("project-ttc", help="forward TTC PDs from a transition matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--grade", action="append", help="grade to project (repeatable; default all live grades)")
    _common(p, "horizons")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("simulate", help="simulate a factor path and default history")
    _common(p, "rho", "process", "seed")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--pd-ttc", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("replicate-figure", help="plot-ready CSV for an illustration figure")
    p.add_argument("--figure", type=int, required=True, choices=range(1, 8), metavar="{1..7}")
    _common(p, "seed")
    p.add_argument("--history", type=int, help="simulated years up to and including year 0")
    p.add_argument("--horizons", type=int, help="forecast years after year 0")
    p.add_argument("-o", "--output", required=True)
    return parser


def _apply_config(args: argparse.Namespace) -> None:
    cfg = read_config(args.config) if args.config else {}
    if getattr(args, "ar1", None) is not None or getattr(args, "ar2", None) is not None:
        # a process given on the command line replaces the configured one entirely
        cfg = {k: v for k, v in cfg.items() if k not in ("ar1", "ar2")}
    for key, text in cfg.items():
        if key not in CONFIG_KEYS:
            raise ValidationError(f"unknown config key {key!r}")
        if hasattr(args, key) and getattr(args, key) is None:
            try:
                setattr(args, key, CONFIG_KEYS[key](text))
            except ValueError:
                raise ValidationError(f"config key {key!r}: cannot parse {text!r}") from None
    for key, value in BUILTIN_DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)


# ---------------------------------------------------------------- helpers


def _rho(args, required=True):
    if args.rho is None:
        if required:
            raise ValidationError("--rho is required (flag or config)")
        return None
    return resolve_rho(args.rho)


def _process(args, required=True):
    if args.ar1 is not None and args.ar2 is not None:
        raise ValidationError("give either --ar1 or --ar2, not both")
    if args.ar1 is not None:
        return Ar1Params(args.ar1)
    if args.ar2 is not None:
        if len(args.ar2) != 2:
            raise ValidationError("--ar2 needs two coefficients")
        return Ar2Params(*args.ar2)
    if required:
        raise ValidationError("an AR process is required: --ar1 A1 or --ar2 A1 A2")
    return None


def _prior_and_grid(args):
    prior = PriorSpec(args.prior_mean, args.prior_var)
    default = GridSpec.covering(prior, args.grid_nodes)
    grid = GridSpec(
        default.lower if args.grid_min is None else args.grid_min,
        default.upper if args.grid_max is None else args.grid_max,
        args.grid_nodes,
    )
    return prior, grid


def _advice(proc) -> str:
    if isinstance(proc, Ar1Params):
        lo, hi = AR1_TYPICAL
        return "" if lo <= proc.a1 <= hi else f" (note: a1 outside the typical range {lo}-{hi})"
    ok = AR2_TYPICAL_A1[0] <= proc.a1 <= AR2_TYPICAL_A1[1] and AR2_TYPICAL_A2[0] <= proc.a2 <= AR2_TYPICAL_A2[1]
    return "" if ok else " (note: coefficients outside the typical ranges a1 1.2-1.4, a2 -0.7 to -0.5)"


# ---------------------------------------------------------------- commands


def cmd_validate_params(args):
    rho = _rho(args, required=False)
    proc = _process(args, required=rho is None)
    rows = []
    parts = []
    if rho is not None:
        rows.append(("rho", rho))
        parts.append(f"rho={_fmt(rho)}")
    if isinstance(proc, Ar1Params):
        rows += [("a1", proc.a1), ("innovation_variance", proc.innovation_variance)]
        parts.append(f"ar1 a1={_fmt(proc.a1)} innovation_variance={proc.innovation_variance:.5f}")
    elif isinstance(proc, Ar2Params):
        period = ar2_spectral_period(proc)
        damped = ar2_damped_period(proc)
        rows += [
            ("a1", proc.a1),
            ("a2", proc.a2),
            ("innovation_variance", proc.innovation_variance),
            ("spectral_period", period),
            ("damped_period", damped),
        ]
        parts.append(
            f"ar2 a1={_fmt(proc.a1)} a2={_fmt(proc.a2)} innovation_variance={proc.innovation_variance:.5f} "
            f"spectral_period={period:.2f} damped_period={damped:.2f}"
        )
    if args.output:
        write_table(args.output, pd.DataFrame(rows, columns=["parameter", "value"]))
    print("valid: " + "; ".join(parts) + (_advice(proc) if proc is not None else ""))


def cmd_estimate_factor(args):
    rho = _rho(args)
    snap = read_snapshot(args.snapshot)
    try:
        psi = estimate_factor(snap, rho, low_default_threshold=args.low_default_threshold)
    except BoundaryEvidenceError as exc:
        raise BoundaryEvidenceError(f"{exc} Run `pitcast posterior` instead.") from None
    if args.output:
        write_table(
            args.output,
            pd.DataFrame(
                {"n": [snap.n], "defaults": [snap.defaults], "default_rate": [snap.default_rate], "rho": [rho], "psi_hat": [psi]}
            ),
        )
    print(f"psi_hat={_fmt(psi)} defaults={snap.defaults} n={snap.n} default_rate={_fmt(snap.default_rate)}")


def cmd_posterior(args):
    rho = _rho(args)
    if args.snapshot:
        evidence = DefaultEvidence.from_snapshot(read_snapshot(args.snapshot), rho)
    else:
        if None in (args.n, args.defaults, args.pd_ttc):
            raise ValidationError("give --snapshot, or all of --n, --defaults and --pd-ttc")
        evidence = DefaultEvidence(args.n, args.defaults, args.pd_ttc, rho)
    prior, grid = _prior_and_grid(args)
    post = posterior(evidence, prior, grid)
    write_table(
        args.output,
        pd.DataFrame(
            {
                "psi": post.psi_nodes,
                "prior": post.prior_densities(),
                "posterior": post.densities,
                "posterior_approx": post.approx_densities(),
            }
        ),
    )
    print(
        f"posterior mean={_fmt(post.mean)} variance={_fmt(post.variance)} mode={_fmt(post.mode)} "
        f"max_density_gap={_fmt(post.max_density_gap)} -> {args.output}"
    )


def cmd_forecast(args):
    rho = _rho(args)
    proc = _process(args)
    snap, grades = read_snapshot_table(args.snapshot)
    curves = {}
    if args.matrix:
        if grades is None:
            raise ValidationError("--matrix needs a 'grade' column in the snapshot")
        m = read_transition_matrix(args.matrix)
        by_grade = {g: project_ttc_curve(m, g, args.horizons) for g in sorted(set(grades))}
        curves = {oid: by_grade[g] for oid, g in zip(snap.obligor_ids, grades)}
    if args.ttc_curves:
        curves.update(read_ttc_curves(args.ttc_curves))
    previous = read_snapshot(args.previous_snapshot) if args.previous_snapshot else None
    prior, grid = _prior_and_grid(args)
    req = ForecastRequest(
        snapshot=snap,
        rho=rho,
        process=proc,
        horizon_max=args.horizons,
        mode=args.mode,
        prior=prior,
        ttc_curves=curves or None,
        previous_snapshot=previous,
        grid=grid if args.mode == "bayes" else None,
        low_default_threshold=args.low_default_threshold,
    )
    res = run_forecast(req)
    port = res.summary.portfolio
    write_table(args.output, port)
    if args.obligor_output:
        write_table(args.obligor_output, res.summary.obligors)
    first, last = port["mean_marginal_pit_pd"].iloc[0], port["mean_marginal_pit_pd"].iloc[-1]
    factor = f"psi_hat={_fmt(res.factor.mean)}" if args.mode == "point" else (
        f"posterior mean={_fmt(res.factor.mean)} variance={_fmt(res.factor.variance)}"
    )
    print(
        f"forecast mode={args.mode} {factor} horizons={args.horizons} "
        f"pit[1]={_fmt(first)} pit[{args.horizons}]={_fmt(last)} -> {args.output}"
    )


def cmd_project_ttc(args):
    m = read_transition_matrix(args.matrix)
    grades = args.grade or list(m.grades[:-1])
    frames = []
    for g in grades:
        curve = project_ttc_curve(m, g, args.horizons)
        frames.append(pd.DataFrame({"grade": g, "horizon": curve.horizons, "ttc_pd": curve.marginal_pds}))
    write_table(args.output, pd.concat(frames, ignore_index=True))
    print(f"projected {len(grades)} grade(s) over {args.horizons} horizons -> {args.output}")


def cmd_simulate(args):
    proc = _process(args)
    psi = simulate_path(proc, args.length, args.seed)
    df = pd.DataFrame({"year": np.arange(1, psi.size + 1), "psi": psi})
    if args.pd_ttc is not None or args.n is not None:
        rho = _rho(args)
        if args.pd_ttc is None or args.n is None:
            raise ValidationError("default simulation needs both --pd-ttc and --n")
        sim = simulate_default_history(psi, args.pd_ttc, rho, args.n, args.seed + 1, args.method)
        df["pit_pd"] = sim.pit_pds
        df["defaults"] = sim.default_counts
        df["default_rate"] = sim.default_rates
    write_table(args.output, df)
    try:
        period = f"{double_crossing_period(psi):.3f}"
    except ValidationError:
        period = "n/a"
    print(
        f"simulated {psi.size} years seed={args.seed} mean={_fmt(psi.mean())} variance={_fmt(psi.var())} "
        f"double_crossing_period={period} -> {args.output}"
    )


def cmd_replicate_figure(args):
    overrides = {}
    if args.figure >= 4:
        if args.history is not None:
            overrides["history"] = args.history
        if args.horizons is not None:
            overrides["horizon"] = args.horizons
    df = replicate_figure(args.figure, seed=args.seed, **overrides)
    write_table(args.output, df)
    extra = "; ".join(df.attrs.get("notes", []))
    print(f"figure {args.figure} seed={args.seed} rows={len(df)} -> {args.output}" + (f" ({extra})" if extra else ""))


COMMANDS = {
    "validate-params": cmd_validate_params,
    "estimate-factor": cmd_estimate_factor,
    "posterior": cmd_posterior,
    "forecast": cmd_forecast,
    "project-ttc": cmd_project_ttc,
    "simulate": cmd_simulate,
    "replicate-figure": cmd_replicate_figure,
}


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    old = warnings.showwarning
    warnings.showwarning = _show_warning
    try:
        _apply_config(args)
        COMMANDS[args.command](args)
        return 0
    except PitcastError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        print(f"error[internal]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 5
    finally:
        warnings.showwarning = old


if __name__ == "__main__":
    sys.exit(main())
