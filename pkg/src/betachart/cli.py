"""Command line interface.

Subcommands: ``fit`` (model summary and LR test), ``chart`` (control limits
and signals for the selected chart kinds), ``arl`` (Monte Carlo ARL
curves), and ``scenario-list`` (the built-in simulation presets).

Exit codes: 0 success, 1 data or usage error, 2 convergence failure,
3 simulation failure. ``BETACHART_SEED`` overrides ``--seed``.
"""

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .arl import (
    SCENARIO_PRESETS,
    ShiftSpec,
    arl_curve,
    make_scenario,
    simulate_arl,
)
from .charts import bcc_limits, brcc_limits, detect_signals, rcc_limits
from .dataio import (
    arl_estimates_json,
    build_dataset,
    chart_report,
    read_table,
    write_arl_csv,
    write_chart_csv,
    write_report_json,
)
from .errors import (
    ConvergenceError,
    DataError,
    DomainError,
    SimulationError,
)
from .fit import Dataset, fit_betareg, fit_ols, inference, lr_constant_dispersion

_CHART_NAMES = {"bcc": "BCC", "rcc": "RCC", "brcc": "BRCC", "brcc_c": "BRCC_C"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors, which this CLI reserves
    # for convergence failures; route them to the data-error exit instead.
    def error(self, message):
        raise _UsageError(message)


def _split_csv(text):
    return [part.strip() for part in text.split(",") if part.strip()]


def _parse_grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise DataError("grid must be start:stop:step")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise DataError("grid bounds must be numeric") from None
    if step <= 0 or stop < start:
        raise DataError("grid requires start <= stop and step > 0")
    count = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 10) for i in range(count + 1)]


def _resolve_seed(args):
    env = os.environ.get("BETACHART_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise DataError(
                f"BETACHART_SEED must be an integer, got {env!r}"
            ) from None
    return args.seed


def _fmt_p(p):
    return "<0.0001" if p < 1e-4 else f"{p:.4f}"


def _print_fit(fit, lr, out=sys.stdout):
    rows = inference(fit)
    header = f"{'':14s}{'Estimate':>11s}{'Std. error':>12s}{'z stat':>10s}{'p-value':>10s}"
    for submodel in ("mean", "dispersion"):
        out.write(f"{submodel.capitalize()} submodel\n{header}\n")
        for row in rows:
            if row.submodel != submodel:
                continue
            out.write(
                f"  {row.name:<12s}{row.estimate:>11.4f}{row.std_error:>12.4f}"
                f"{row.z_stat:>10.3f}{_fmt_p(row.p_value):>10s}\n"
            )
    out.write(f"Log-likelihood: {fit.loglik:.4f} "
              f"({fit.iterations} iterations)\n")
    if lr is not None:
        out.write(
            f"LR test for constant dispersion: stat={lr.stat:.4f} "
            f"df={lr.df} p-value={_fmt_p(lr.p_value)}\n"
        )


def _fit_model(args):
    table = read_table(args.input)
    rescale = tuple(args.rescale) if args.rescale else None
    data = build_dataset(
        table,
        args.response,
        _split_csv(args.mean_cols),
        _split_csv(args.disp_cols) if args.disp_cols else [],
        adjust_boundary=args.boundary_adjust,
        rescale=rescale,
    )
    fit = fit_betareg(data, args.mean_link, args.disp_link)
    lr = None
    reduced = None
    if data.s > 1:
        reduced_data = Dataset(
            data.y, data.X, np.ones((data.n, 1)),
            mean_names=data.mean_names, disp_names=("const",))
        reduced = fit_betareg(reduced_data, args.mean_link, args.disp_link)
        lr = lr_constant_dispersion(fit, reduced)
    return data, fit, reduced, lr


def _cmd_fit(args):
    _, fit, _, lr = _fit_model(args)
    _print_fit(fit, lr)
    if args.out_json:
        report = chart_report(
            fit, charts=(), lr_test=lr, seed=_resolve_seed(args),
            created=_now())
        write_report_json(report, args.out_json)
    return 0


def _now():
    return datetime.now(timezone.utc).isoformat()


def _cmd_chart(args):
    data, fit, reduced, lr = _fit_model(args)
    alpha = args.alpha if args.alpha is not None else 1.0 / args.arl0
    kinds = [k.lower() for k in _split_csv(args.charts)]
    results = []
    for kind in kinds:
        if kind not in _CHART_NAMES:
            raise DataError(
                f"unknown chart {kind!r}; choose from {sorted(_CHART_NAMES)}")
        if kind == "bcc":
            results.append(bcc_limits(data.y, alpha))
        elif kind == "rcc":
            results.append(rcc_limits(
                fit_ols(data.X, data.y), data.y, alpha,
                multiplier=args.rcc_multiplier))
        elif kind == "brcc":
            results.append(brcc_limits(fit, data.y, alpha))
        else:
            if reduced is None:
                constant = fit  # dispersion already constant
            else:
                constant = reduced
            results.append(brcc_limits(constant, data.y, alpha,
                                       kind="BRCC_C"))
    _print_fit(fit, lr)
    for res in results:
        signals = detect_signals(res)
        label = ", ".join(str(s) for s in signals) if signals else "none"
        print(f"{res.kind} (alpha={res.alpha:.6g}): signals {label}")
    if args.out_json:
        report = chart_report(fit, charts=results, lr_test=lr,
                              seed=_resolve_seed(args), created=_now())
        write_report_json(report, args.out_json)
    if args.out_csv:
        write_chart_csv(results, args.out_csv)
    if args.out_svg:
        from .plotting import render_chart_svg

        render_chart_svg(results, args.out_svg)
    return 0


def _cmd_arl(args):
    seed = _resolve_seed(args)
    scenario = make_scenario(args.scenario, n=args.n, master_seed=seed)
    charts = []
    for kind in _split_csv(args.charts):
        if kind.lower() not in _CHART_NAMES:
            raise DataError(
                f"unknown chart {kind!r}; choose from {sorted(_CHART_NAMES)}")
        charts.append(_CHART_NAMES[kind.lower()])
    arl0 = 1.0 / args.alpha if args.alpha is not None else args.arl0
    if args.delta_grid:
        grid = _parse_grid(args.delta_grid)
    else:
        grid = [args.delta]
    if args.mode == "runlength":
        if len(grid) != 1 or len(charts) != 1:
            raise DataError(
                "runlength mode handles one chart and one delta per run")
        estimates = [simulate_arl(
            scenario, charts[0], ShiftSpec(args.target, grid[0]), args.reps,
            arl0_target=arl0, workers=args.workers, mode="runlength",
            calibrate=args.calibrate)]
    else:
        estimates = arl_curve(
            scenario, charts, grid, args.reps, arl0_target=arl0,
            target=args.target, workers=args.workers,
            calibrate=args.calibrate)
    print(f"{'chart':8s}{'delta':>8s}{'ARL':>10s}{'mc se':>9s}{'reps':>7s}")
    for est in estimates:
        arl = "inf" if est.capped else f"{est.arl:.2f}"
        se = "inf" if est.capped else f"{est.mc_std_error:.2f}"
        print(f"{est.chart_kind:8s}{est.delta:>8.3f}{arl:>10s}{se:>9s}"
              f"{est.replications:>7d}")
    if args.out_csv:
        write_arl_csv(estimates, args.out_csv)
    if args.out_json:
        with open(args.out_json, "w", encoding="utf-8") as fh:
            json.dump(arl_estimates_json(estimates), fh, indent=2)
            fh.write("\n")
    return 0


def _cmd_scenario_list(args):
    print(f"{'scenario':>8s}  {'beta':28s}{'gamma':28s}{'approx mean':>12s}"
          f"{'approx sigma':>13s}")
    for num in sorted(SCENARIO_PRESETS):
        beta, gamma, mu, sigma = SCENARIO_PRESETS[num]
        print(f"{num:>8d}  {str(beta):28s}{str(gamma):28s}{mu:>12.2f}"
              f"{sigma:>13.3f}")
    return 0


def _add_model_options(sub):
    sub.add_argument("--input", required=True, help="CSV file to analyse")
    sub.add_argument("--response", default="y", help="response column name")
    sub.add_argument("--mean-cols", required=True,
                     help="comma-separated mean covariates (a*b products allowed)")
    sub.add_argument("--disp-cols", default="",
                     help="comma-separated dispersion covariates (empty: intercept only)")
    sub.add_argument("--mean-link", default="logit",
                     choices=["logit", "probit", "cloglog"])
    sub.add_argument("--disp-link", default="logit",
                     choices=["logit", "probit", "cloglog"])
    sub.add_argument("--boundary-adjust", action="store_true",
                     help="compress responses away from 0 and 1")
    sub.add_argument("--rescale", nargs=2, type=float, metavar=("A", "B"),
                     help="rescale responses from [A, B] to [0, 1]")
    sub.add_argument("--seed", type=int, default=0,
                     help="recorded in report metadata")
    sub.add_argument("--out-json", help="write the full report as JSON")


def build_parser():
    parser = _Parser(prog="betachart",
                     description="Beta regression control charts")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p_fit = subs.add_parser("fit", help="fit the beta regression model")
    _add_model_options(p_fit)
    p_fit.set_defaults(func=_cmd_fit)

    p_chart = subs.add_parser("chart", help="compute control limits and signals")
    _add_model_options(p_chart)
    p_chart.add_argument("--charts", default="brcc",
                         help="comma-separated: bcc,rcc,brcc,brcc_c")
    group = p_chart.add_mutually_exclusive_group()
    group.add_argument("--arl0", type=float, default=200.0,
                       help="target in-control ARL (default 200)")
    group.add_argument("--alpha", type=float,
                       help="false-alarm probability (overrides --arl0)")
    p_chart.add_argument("--rcc-multiplier", type=float, default=None,
                         help="RCC sigma multiplier (default: alpha-matched)")
    p_chart.add_argument("--out-csv", help="write per-observation chart rows")
    p_chart.add_argument("--out-svg", help="render the chart as SVG")
    p_chart.set_defaults(func=_cmd_chart)

    p_arl = subs.add_parser("arl", help="Monte Carlo ARL estimation")
    p_arl.add_argument("--scenario", type=int, required=True,
                       help="preset scenario number (1-6)")
    p_arl.add_argument("--n", type=int, default=200, help="sample size")
    p_arl.add_argument("--seed", type=int, default=20260810,
                       help="master seed (BETACHART_SEED overrides)")
    p_arl.add_argument("--charts", default="brcc",
                       help="comma-separated: bcc,rcc,brcc,brcc_c")
    p_arl.add_argument("--reps", type=int, default=2000,
                       help="Monte Carlo replications")
    group = p_arl.add_mutually_exclusive_group()
    group.add_argument("--arl0", type=float, default=200.0)
    group.add_argument("--alpha", type=float)
    p_arl.add_argument("--target", default="mean",
                       choices=["mean", "dispersion"])
    p_arl.add_argument("--delta", type=float, default=0.0,
                       help="single shift on the target linear predictor")
    p_arl.add_argument("--delta-grid", help="shift grid start:stop:step")
    p_arl.add_argument("--workers", type=int, default=1,
                       help="parallel worker processes")
    p_arl.add_argument("--mode", default="pooled",
                       choices=["pooled", "runlength"])
    p_arl.add_argument("--calibrate", action=argparse.BooleanOptionalAction,
                       default=True,
                       help="calibrate each chart's working level to the ARL0 target")
    p_arl.add_argument("--out-csv", help="write the curve table as CSV")
    p_arl.add_argument("--out-json", help="write the curve table as JSON")
    p_arl.set_defaults(func=_cmd_arl)

    p_list = subs.add_parser("scenario-list", help="print simulation presets")
    p_list.set_defaults(func=_cmd_scenario_list)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (DataError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
