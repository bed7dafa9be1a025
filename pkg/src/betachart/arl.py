"""Monte Carlo average run length estimation for the chart families.

A scenario fixes the data-generating beta regression (three mean and three
dispersion coefficients, logit links, uniform covariates held constant for
the whole experiment). Each replication r:

1. draws an in-control sample with a counter-based stream keyed by
   (master_seed, r) and fits the chart's model to it;
2. contributes a held-out in-control sample to the calibration pool, from
   which each chart's working false-alarm level is set so that the
   in-control ARL matches the target (the charts under comparison are
   misspecified to different degrees, so their nominal quantile limits do
   not share an in-control ARL; calibration makes the ARL1 comparison
   fair). ``calibrate=False`` skips this and uses alpha = 1/ARL0 directly;
3. draws one shifted sample per grid point at the same covariates and
   counts exceedances.

The default estimator pools exceedances across replications and reports
ARL = 1 / outside_fraction, which has the same expectation as averaging
geometric run lengths but far lower Monte Carlo variance; a run-length
counting mode is available for cross-validation.

Replications are independent work units keyed by replication index, and
counts aggregate by summation, so results are bit-identical for any worker
count.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import betadist
from ._backend import kernels
from .charts import CHART_KINDS
from .errors import DataError, DomainError, SimulationError
from .fit import ConvergenceError, Dataset, fit_betareg, fit_ols
from .links import get_link

__all__ = [
    "Scenario",
    "ShiftSpec",
    "ArlEstimate",
    "SCENARIO_PRESETS",
    "make_scenario",
    "gen_covariates",
    "scenario_characteristics",
    "simulate_arl",
    "arl_curve",
]

# Data-generating coefficients for the six preset scenarios:
# (beta, gamma, approximate process mean and dispersion).
SCENARIO_PRESETS = {
    1: ((-1.35, 1.00, 1.00), (-1.40, 1.00, -1.25), 0.40, 0.156),
    2: ((-1.35, 1.00, 1.00), (-1.00, -1.10, -1.00), 0.40, 0.099),
    3: ((-1.35, 1.00, 1.00), (-1.15, -1.20, -1.20), 0.40, 0.070),
    4: ((-0.10, -1.35, -1.40), (-1.15, -1.20, -1.20), 0.20, 0.070),
    5: ((1.50, 1.00, -1.00), (-1.15, -1.20, -1.20), 0.80, 0.070),
    6: ((-1.00, -1.50, -1.50), (-1.15, -1.20, -1.20), 0.08, 0.070),
}

_MAX_FAIL_FRACTION = 0.05
_MEAN_SHIFT_RANGE = 0.15
_DISP_SHIFT_RANGE = 0.15

# Stream tags: 0 generates the covariates; FIT/CAL/SCORE offsets keep the
# per-replication fitting, calibration, and scoring draws independent.
_COVARIATE_STREAM = 0
_FIT_BASE = 1
_CAL_BASE = 2 ** 32
_SCORE_BASE = 2 ** 33


@dataclass(frozen=True)
class Scenario:
    """Data-generating parameters of one simulation scenario."""

    beta: tuple
    gamma: tuple
    n: int
    master_seed: int
    mean_link: str = "logit"
    disp_link: str = "logit"
    number: int = 0

    def __post_init__(self):
        if self.n < 50:
            raise DomainError("scenario sample size must be at least 50")
        values = tuple(self.beta) + tuple(self.gamma)
        if not all(math.isfinite(v) for v in values):
            raise DomainError("scenario coefficients must be finite")


@dataclass(frozen=True)
class ShiftSpec:
    """Additive change applied to one linear predictor."""

    target: str
    delta: float

    def __post_init__(self):
        if self.target not in ("mean", "dispersion"):
            raise DomainError("shift target must be 'mean' or 'dispersion'")
        if self.target == "mean" and abs(self.delta) > _MEAN_SHIFT_RANGE:
            raise DomainError(
                f"mean shifts must lie in [-{_MEAN_SHIFT_RANGE}, {_MEAN_SHIFT_RANGE}]"
            )
        if self.target == "dispersion" and not (
                0.0 <= self.delta <= _DISP_SHIFT_RANGE):
            raise DomainError(
                f"dispersion shifts must lie in [0, {_DISP_SHIFT_RANGE}]"
            )


@dataclass(frozen=True)
class ArlEstimate:
    chart_kind: str
    target: str
    delta: float
    arl: float
    mc_std_error: float
    replications: int
    outside_fraction: float
    capped: bool = False
    alpha_used: float = math.nan


def make_scenario(number, n=200, master_seed=20260810):
    """Instantiate one of the six preset scenarios."""
    try:
        beta, gamma, _, _ = SCENARIO_PRESETS[number]
    except KeyError:
        raise DomainError(
            f"unknown scenario {number!r}; presets are {sorted(SCENARIO_PRESETS)}"
        ) from None
    return Scenario(beta=beta, gamma=gamma, n=n, master_seed=master_seed,
                    number=number)


def gen_covariates(n, seed):
    """Standard uniform covariates, fixed for the whole experiment.

    Returns the n x 3 mean and dispersion design matrices, each with an
    intercept column followed by two U(0, 1) columns.
    """
    rng = betadist.philox_stream(seed, _COVARIATE_STREAM)
    u = rng.uniform(size=(n, 4))
    ones = np.ones((n, 1))
    return np.hstack([ones, u[:, :2]]), np.hstack([ones, u[:, 2:]])


def _true_params(scenario, X, Z, shift=None):
    mlink = get_link(scenario.mean_link)
    dlink = get_link(scenario.disp_link)
    eta_mean = X @ np.asarray(scenario.beta)
    eta_disp = Z @ np.asarray(scenario.gamma)
    if shift is not None:
        if shift.target == "mean":
            eta_mean = eta_mean + shift.delta
        else:
            eta_disp = eta_disp + shift.delta
    return mlink.inv(eta_mean), dlink.inv(eta_disp)


def scenario_characteristics(scenario):
    """Average process mean and dispersion over the scenario's covariates."""
    X, Z = gen_covariates(scenario.n, scenario.master_seed)
    mu, sigma = _true_params(scenario, X, Z)
    return float(np.mean(mu)), float(np.mean(sigma))


def _fit_record(chart, y, X, Z, ones, mlink, dlink):
    """Fit the chart's model; return the minimal state needed for scoring."""
    if chart == "BRCC":
        f = fit_betareg(Dataset(y, X, Z), mlink, dlink)
        return f.beta_hat, f.gamma_hat
    if chart == "BRCC_C":
        f = fit_betareg(Dataset(y, X, ones), mlink, dlink)
        return f.beta_hat, f.gamma_hat
    if chart == "BCC":
        f = fit_betareg(Dataset(y, ones, ones), mlink, dlink)
        return f.beta_hat, f.gamma_hat
    if chart == "RCC":
        f = fit_ols(X, y)
        if f.degenerate:
            raise DataError("degenerate OLS fit")
        return f.coef, f.resid_sd
    raise DomainError(f"unknown chart kind {chart!r}")


def _extremity(chart, record, y, X, Z, ones, mlink, dlink):
    """Two-sided tail probability of each point under the chart's fitted
    model. A point signals at working level a exactly when extremity <= a."""
    if chart == "RCC":
        coef, resid_sd = record
        u = kernels.norm_cdf_arr((y - X @ coef) / resid_sd)
    else:
        beta, gamma = record
        Xm = ones if chart == "BCC" else X
        Zm = Z if chart == "BRCC" else ones
        mu = mlink.inv(Xm @ beta)
        sigma = dlink.inv(Zm @ gamma)
        s2 = sigma * sigma
        phi = (1.0 - s2) / s2
        u = kernels.reg_inc_beta_arr(y, mu * phi, (1.0 - mu) * phi)
    return 2.0 * np.minimum(u, 1.0 - u)


def _phase1_block(scenario, charts, keep, start, stop):
    """Fit every chart on replications [start, stop) and pool calibration
    extremities from held-out in-control samples (the ``keep`` smallest per
    chart are retained; keep is sized so the global quantile is exact)."""
    X, Z = gen_covariates(scenario.n, scenario.master_seed)
    ones = np.ones((scenario.n, 1))
    mlink = get_link(scenario.mean_link)
    dlink = get_link(scenario.disp_link)
    mu0, sigma0 = _true_params(scenario, X, Z)
    records = []
    pool = {c: [] for c in charts}
    cal_points = {c: 0 for c in charts}
    failures = {c: 0 for c in charts}
    for rep in range(start, stop):
        rng_fit = betadist.philox_stream(scenario.master_seed, _FIT_BASE + rep)
        y0 = betadist.sample_at(rng_fit, mu0, sigma0)
        rng_cal = betadist.philox_stream(scenario.master_seed, _CAL_BASE + rep)
        y_cal = betadist.sample_at(rng_cal, mu0, sigma0)
        recs = {}
        for chart in charts:
            try:
                recs[chart] = _fit_record(chart, y0, X, Z, ones, mlink, dlink)
            except (ConvergenceError, DataError, np.linalg.LinAlgError):
                recs[chart] = None
                failures[chart] += 1
                continue
            pool[chart].append(
                _extremity(chart, recs[chart], y_cal, X, Z, ones, mlink, dlink))
            cal_points[chart] += scenario.n
        records.append(recs)
    cal_small = {}
    for chart in charts:
        if pool[chart]:
            e = np.sort(np.concatenate(pool[chart]))
            cal_small[chart] = e[:keep]
        else:
            cal_small[chart] = np.empty(0)
    return records, cal_small, cal_points, failures


def _phase3_block(scenario, charts, target, deltas, alpha_w, records, start,
                  stop):
    """Score shifted samples for replications [start, stop) against the
    working levels; returns exceedance counts per chart and delta."""
    X, Z = gen_covariates(scenario.n, scenario.master_seed)
    ones = np.ones((scenario.n, 1))
    mlink = get_link(scenario.mean_link)
    dlink = get_link(scenario.disp_link)
    shifted = [
        _true_params(scenario, X, Z, ShiftSpec(target, d)) for d in deltas
    ]
    counts = {c: np.zeros(len(deltas), dtype=np.int64) for c in charts}
    scored = {c: 0 for c in charts}
    for rep in range(start, stop):
        recs = records[rep - start]
        rng = betadist.philox_stream(scenario.master_seed, _SCORE_BASE + rep)
        for j, (mu1, sigma1) in enumerate(shifted):
            y1 = betadist.sample_at(rng, mu1, sigma1)
            for chart in charts:
                if recs[chart] is None:
                    continue
                e = _extremity(chart, recs[chart], y1, X, Z, ones, mlink,
                               dlink)
                counts[chart][j] += int(np.sum(e <= alpha_w[chart]))
        for chart in charts:
            if recs[chart] is not None:
                scored[chart] += scenario.n
    return counts, scored


def _chunks(reps, workers):
    bounds = np.linspace(0, reps, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _working_alphas(scenario, charts, reps, arl0_target, workers, calibrate):
    """Phase 1: fit records per replication; per-chart working alpha."""
    q = 1.0 / arl0_target
    keep = int(math.ceil(q * reps * scenario.n)) + 16
    jobs = _chunks(reps, workers)
    if len(jobs) <= 1:
        blocks = [_phase1_block(scenario, charts, keep, 0, reps)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_phase1_block, scenario, charts, keep, a, b)
                for a, b in jobs
            ]
            blocks = [f.result() for f in futures]
    records = []
    failures = {c: 0 for c in charts}
    cal_points = {c: 0 for c in charts}
    for recs, _, pts, fails in blocks:
        records.extend(recs)
        for c in charts:
            failures[c] += fails[c]
            cal_points[c] += pts[c]
    for chart in charts:
        if failures[chart] > _MAX_FAIL_FRACTION * reps:
            raise SimulationError(
                f"{failures[chart]} of {reps} replications failed to fit "
                f"the {chart} model"
            )
    alpha_w = {}
    for chart in charts:
        if not calibrate:
            alpha_w[chart] = q
            continue
        merged = np.sort(np.concatenate([b[1][chart] for b in blocks]))
        m = max(0, int(math.ceil(q * cal_points[chart])) - 1)
        alpha_w[chart] = float(merged[m])
    return records, alpha_w, failures


def _run_pooled(scenario, charts, target, deltas, reps, arl0_target, workers,
                calibrate):
    records, alpha_w, failures = _working_alphas(
        scenario, charts, reps, arl0_target, workers, calibrate)
    jobs = _chunks(reps, workers)
    if len(jobs) <= 1:
        blocks = [_phase3_block(scenario, charts, target, deltas, alpha_w,
                                records, 0, reps)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_phase3_block, scenario, charts, target, deltas,
                            alpha_w, records[a:b], a, b)
                for a, b in jobs
            ]
            blocks = [f.result() for f in futures]
    counts = {c: np.zeros(len(deltas), dtype=np.int64) for c in charts}
    scored = {c: 0 for c in charts}
    for bc, bs in blocks:
        for c in charts:
            counts[c] += bc[c]
            scored[c] += bs[c]
    return counts, scored, failures, alpha_w


def _estimates(counts, scored, failures, alpha_w, charts, target, deltas,
               reps):
    out = []
    for chart in charts:
        n_scored = scored[chart]
        used = reps - failures[chart]
        for j, delta in enumerate(deltas):
            p = counts[chart][j] / n_scored if n_scored else 0.0
            if p > 0.0:
                arl = 1.0 / p
                se = math.sqrt(p * (1.0 - p) / n_scored) / (p * p)
                capped = False
            else:
                arl = math.inf
                se = math.inf
                capped = True
            out.append(ArlEstimate(
                chart_kind=chart,
                target=target,
                delta=float(delta),
                arl=arl,
                mc_std_error=se,
                replications=used,
                outside_fraction=float(p),
                capped=capped,
                alpha_used=float(alpha_w[chart]),
            ))
    return out


def _run_lengths(scenario, chart, shift, reps, arl0_target, workers,
                 calibrate):
    """Geometric run-length counting, for cross-validating the pooled
    estimator: shifted observations are drawn in blocks, cycling through
    the fixed covariates, until the first signal or the cap."""
    records, alpha_w, failures = _working_alphas(
        scenario, [chart], reps, arl0_target, workers, calibrate)
    X, Z = gen_covariates(scenario.n, scenario.master_seed)
    ones = np.ones((scenario.n, 1))
    mlink = get_link(scenario.mean_link)
    dlink = get_link(scenario.disp_link)
    mu1, sigma1 = _true_params(scenario, X, Z, shift)
    max_blocks = max(1, int(math.ceil(50.0 * arl0_target / scenario.n)))
    lengths = []
    for rep in range(reps):
        rec = records[rep][chart]
        if rec is None:
            continue
        rng = betadist.philox_stream(scenario.master_seed, _SCORE_BASE + rep)
        run = max_blocks * scenario.n  # censored value if no signal
        for block in range(max_blocks):
            y1 = betadist.sample_at(rng, mu1, sigma1)
            e = _extremity(chart, rec, y1, X, Z, ones, mlink, dlink)
            hits = np.nonzero(e <= alpha_w[chart])[0]
            if hits.size:
                run = block * scenario.n + int(hits[0]) + 1
                break
        lengths.append(run)
    lengths = np.asarray(lengths, dtype=np.float64)
    arl = float(np.mean(lengths))
    se = float(np.std(lengths, ddof=1) / math.sqrt(lengths.size))
    return ArlEstimate(
        chart_kind=chart,
        target=shift.target,
        delta=shift.delta,
        arl=arl,
        mc_std_error=se,
        replications=int(lengths.size),
        outside_fraction=1.0 / arl,
        alpha_used=float(alpha_w[chart]),
    )


def _validate_common(reps, arl0_target, charts):
    if reps < 100:
        raise DomainError("at least 100 replications are required")
    if not arl0_target > 1.0:
        raise DomainError("ARL0 target must exceed 1")
    for chart in charts:
        if chart not in CHART_KINDS:
            raise DomainError(f"unknown chart kind {chart!r}")


def simulate_arl(scenario, chart, shift, reps, arl0_target=200.0,
                 workers=1, mode="pooled", calibrate=True):
    """Estimate the ARL of one chart under one shift.

    ``mode="pooled"`` (default) pools exceedances across replications;
    ``mode="runlength"`` averages explicit run lengths instead.
    """
    _validate_common(reps, arl0_target, [chart])
    if mode == "runlength":
        return _run_lengths(scenario, chart, shift, reps, arl0_target,
                            workers, calibrate)
    if mode != "pooled":
        raise DomainError("mode must be 'pooled' or 'runlength'")
    return arl_curve(scenario, [chart], [shift.delta], reps,
                     arl0_target=arl0_target, target=shift.target,
                     workers=workers, calibrate=calibrate)[0]


def arl_curve(scenario, charts, grid, reps, arl0_target=200.0,
              target="mean", workers=1, calibrate=True):
    """ArlEstimates for every (chart, delta) pair on a shift grid.

    All charts are fitted on the same per-replication samples and score the
    same shifted draws, so comparisons across charts are paired.
    """
    charts = tuple(charts)
    _validate_common(reps, arl0_target, charts)
    deltas = tuple(float(d) for d in grid)
    if not deltas:
        raise DomainError("the shift grid must not be empty")
    for d in deltas:
        ShiftSpec(target, d)  # range validation
    counts, scored, failures, alpha_w = _run_pooled(
        scenario, charts, target, deltas, reps, arl0_target, workers,
        calibrate)
    return _estimates(counts, scored, failures, alpha_w, charts, target,
                      deltas, reps)
