"""CSV ingestion, interaction columns, boundary handling, and report output.

The CSV dialect is fixed: comma separated, "." decimal, UTF-8, header row
required. Column specifications may name raw columns or elementwise
products written as "a*b"; an intercept column named "const" is always
prepended to both design matrices.

Responses must end up in [0, 1] after optional interval rescaling; exact
boundary values are compressed away from {0, 1} only when the boundary
adjustment is requested (applied once, it is not idempotent).
"""

import csv
import hashlib
import json
import math
from dataclasses import asdict
from importlib import resources

import numpy as np

from . import __version__
from .charts import detect_signals
from .errors import DataError
from .fit import Dataset, inference

__all__ = [
    "read_table",
    "build_design",
    "build_dataset",
    "boundary_adjust",
    "rescale_interval",
    "tire_fixture_path",
    "sha256_file",
    "TIRE_SHA256",
    "chart_report",
    "write_report_json",
    "write_chart_csv",
    "write_arl_csv",
    "arl_estimates_json",
]

TIRE_SHA256 = "526bb6043857d7e598ce9b89926bbad4233c1d74e72dc47c949de90216857839"

INTERCEPT_NAME = "const"


def tire_fixture_path():
    """Path of the bundled tire manufacturing dataset."""
    return resources.files("betachart.data").joinpath("tire.csv")


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        digest.update(fh.read())
    return digest.hexdigest()


def read_table(path):
    """Parse a CSV file into a mapping of column name to float array."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        columns = {name: [] for name in header}
        if len(columns) != len(header):
            raise DataError(f"{path} has duplicate column names")
        for row_number, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"row {row_number}: expected {len(header)} cells, "
                    f"got {len(row)}"
                )
            for name, cell in zip(header, row):
                try:
                    columns[name].append(float(cell))
                except ValueError:
                    raise DataError(
                        f"row {row_number}: non-numeric value {cell!r} "
                        f"in column {name!r}"
                    ) from None
    if not next(iter(columns.values()), []):
        raise DataError(f"{path} contains no data rows")
    return {name: np.asarray(vals, dtype=np.float64)
            for name, vals in columns.items()}


def _resolve_column(table, spec):
    spec = spec.strip()
    if "*" in spec:
        parts = [p.strip() for p in spec.split("*")]
        col = np.ones_like(next(iter(table.values())))
        for part in parts:
            if part not in table:
                raise DataError(f"unknown column {part!r} in spec {spec!r}")
            col = col * table[part]
        return col
    if spec not in table:
        raise DataError(f"unknown column {spec!r}")
    return table[spec]


def build_design(table, specs):
    """Design matrix for the given column specs, intercept prepended."""
    n = next(iter(table.values())).shape[0]
    cols = [np.ones(n)]
    names = [INTERCEPT_NAME]
    for spec in specs:
        cols.append(_resolve_column(table, spec))
        names.append(spec.strip())
    return np.column_stack(cols), tuple(names)


def boundary_adjust(y, n=None):
    """Compress y toward the interior: (y * (n - 1) + 0.5) / n.

    Maps exact 0 and 1 to interior values. Applying it twice compresses
    twice; callers apply it exactly once at ingestion.
    """
    y = np.asarray(y, dtype=np.float64)
    if n is None:
        n = y.shape[0]
    return (y * (n - 1) + 0.5) / n


def rescale_interval(y, a, b):
    """Map data on [a, b] to the unit interval via (y - a) / (b - a)."""
    if not b > a:
        raise DataError("interval bounds must satisfy a < b")
    return (np.asarray(y, dtype=np.float64) - a) / (b - a)


def build_dataset(table, response, mean_cols, disp_cols,
                  adjust_boundary=False, rescale=None):
    """Assemble a validated Dataset from a parsed table.

    Rescaling (if any) runs first, then the range check, then the optional
    boundary adjustment.
    """
    if response not in table:
        raise DataError(f"unknown response column {response!r}")
    y = table[response]
    if rescale is not None:
        y = rescale_interval(y, *rescale)
    bad = np.nonzero((y < 0.0) | (y > 1.0))[0]
    if bad.size:
        raise DataError(
            f"row {bad[0] + 1}: response {y[bad[0]]!r} outside [0, 1]"
        )
    if adjust_boundary:
        y = boundary_adjust(y)
    X, mean_names = build_design(table, mean_cols)
    Z, disp_names = build_design(table, disp_cols)
    return Dataset(y, X, Z, mean_names=mean_names, disp_names=disp_names)


# ---------------------------------------------------------------------------
# report emission


def chart_report(fit, charts=(), lr_test=None, seed=None, created=None):
    """JSON-serializable report: coefficient table, LR test, chart rows."""
    from ._backend import BACKEND_NAME

    coef_rows = [asdict(row) for row in inference(fit)]
    chart_blocks = []
    for res in charts:
        chart_blocks.append({
            "kind": res.kind,
            "alpha": res.alpha,
            "signals": detect_signals(res),
            "rows": [
                {
                    "t": int(t),
                    "y": float(y),
                    "lcl": float(lcl),
                    "ucl": float(ucl),
                    "signal": bool(sig),
                }
                for t, y, lcl, ucl, sig in zip(
                    res.t, res.y, res.lcl, res.ucl, res.signal)
            ],
        })
    report = {
        "model": {
            "coefficients": coef_rows,
            "loglik": float(fit.loglik),
            "converged": bool(fit.converged),
            "iterations": int(fit.iterations),
            "mean_link": fit.mean_link,
            "disp_link": fit.disp_link,
        },
        "lr_test": None if lr_test is None else {
            "stat": float(lr_test.stat),
            "df": int(lr_test.df),
            "p_value": float(lr_test.p_value),
        },
        "charts": chart_blocks,
        "metadata": {
            "seed": seed,
            "version": __version__,
            "backend": BACKEND_NAME,
            "created": created,
        },
    }
    return report


def write_report_json(report, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from None


def write_chart_csv(charts, path):
    """Stacked per-observation rows for every chart kind."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["kind", "t", "y", "lcl", "ucl", "signal"])
            for res in charts:
                for t, y, lcl, ucl, sig in zip(
                        res.t, res.y, res.lcl, res.ucl, res.signal):
                    writer.writerow([
                        res.kind, int(t), repr(float(y)), repr(float(lcl)),
                        repr(float(ucl)), int(sig),
                    ])
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from None


def _fmt(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return repr(float(value))


def write_arl_csv(estimates, path):
    """Curve table with the fixed column set chart,delta,arl,mc_se,reps."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["chart", "delta", "arl", "mc_se", "reps"])
            for est in estimates:
                writer.writerow([
                    est.chart_kind, _fmt(est.delta), _fmt(est.arl),
                    _fmt(est.mc_std_error), est.replications,
                ])
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from None


def arl_estimates_json(estimates):
    return [asdict(est) for est in estimates]
