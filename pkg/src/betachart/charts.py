"""Control limit construction for the three chart families.

* BCC: constant beta-quantile limits from a covariate-free beta fit.
* RCC: normal-theory regression chart, fitted values plus/minus a normal
  quantile multiple of the residual standard deviation. Its limits may
  leave (0, 1); that is a property of the method and is reported, not
  clamped.
* BRCC: per-observation beta-quantile limits from fitted (mu_t, sigma_t);
  the constant-dispersion restriction is charted as kind "BRCC_C".

Limits are two-sided at alpha = 1 / ARL0: the lower limit is the alpha/2
quantile and the upper limit the 1 - alpha/2 quantile. A point equal to a
limit counts as a signal (the in-control region is the open interval).
"""

from dataclasses import dataclass

import numpy as np

from . import betadist
from ._backend import kernels
from .errors import DataError, DomainError
from .fit import Dataset, fit_betareg

__all__ = [
    "ChartResult",
    "alpha_from_arl0",
    "bcc_limits",
    "rcc_limits",
    "brcc_limits",
    "detect_signals",
]

CHART_KINDS = ("BCC", "RCC", "BRCC", "BRCC_C")


def alpha_from_arl0(arl0):
    """False-alarm probability for a target in-control average run length."""
    if not arl0 > 1.0:
        raise DomainError("ARL0 target must exceed 1")
    return 1.0 / arl0


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class ChartResult:
    """Per-observation limits and signal flags for one chart kind."""

    kind: str
    alpha: float
    t: np.ndarray
    y: np.ndarray
    lcl: np.ndarray
    ucl: np.ndarray
    signal: np.ndarray

    def __post_init__(self):
        if self.kind not in CHART_KINDS:
            raise DomainError(f"unknown chart kind {self.kind!r}")
        if np.any(self.lcl >= self.ucl):
            raise DataError("lower control limit must stay below the upper one")


def _make_result(kind, alpha, y, lcl, ucl):
    y = np.asarray(y, dtype=np.float64)
    lcl = np.broadcast_to(np.asarray(lcl, dtype=np.float64), y.shape).copy()
    ucl = np.broadcast_to(np.asarray(ucl, dtype=np.float64), y.shape).copy()
    signal = (y <= lcl) | (y >= ucl)
    return ChartResult(
        kind=kind,
        alpha=float(alpha),
        t=np.arange(1, y.shape[0] + 1),
        y=y,
        lcl=lcl,
        ucl=ucl,
        signal=signal,
    )


def bcc_limits(y, alpha):
    """Constant beta-quantile limits from a covariate-free MLE fit."""
    _check_alpha(alpha)
    y = np.asarray(y, dtype=np.float64)
    if np.ptp(y) <= 0.0:
        raise DataError("cannot fit a beta distribution to constant data")
    ones = np.ones((y.shape[0], 1))
    fit = fit_betareg(Dataset(y, ones, ones,
                              mean_names=("const",), disp_names=("const",)))
    mu = float(fit.mu_hat[0])
    sigma = float(fit.sigma_hat[0])
    p = betadist.MuSigma(mu, sigma)
    lcl = betadist.quantile(alpha / 2.0, p)
    ucl = betadist.quantile(1.0 - alpha / 2.0, p)
    return _make_result("BCC", alpha, y, lcl, ucl)


def rcc_limits(ols, y, alpha, multiplier=None):
    """Normal-theory limits: fitted values +/- multiplier * residual sd.

    The multiplier defaults to the alpha-matched two-sided normal quantile
    z_{1 - alpha/2}; pass ``multiplier=3.0`` for the three-sigma convention.
    """
    _check_alpha(alpha)
    if ols.degenerate:
        raise DataError(
            "residual standard deviation is zero; the chart is degenerate"
        )
    w = kernels.norm_ppf(1.0 - alpha / 2.0) if multiplier is None else multiplier
    half = w * ols.resid_sd
    return _make_result("RCC", alpha, y, ols.fitted - half, ols.fitted + half)


def brcc_limits(fit, y, alpha, kind="BRCC"):
    """Per-observation beta-quantile limits from a varying-parameter fit.

    Pass ``kind="BRCC_C"`` when charting a constant-dispersion fit so the
    result is labelled as the restricted chart.
    """
    _check_alpha(alpha)
    if not fit.converged:
        raise DataError("refusing to chart a non-converged fit")
    if kind not in ("BRCC", "BRCC_C"):
        raise DomainError("kind must be 'BRCC' or 'BRCC_C'")
    y = np.asarray(y, dtype=np.float64)
    lcl = betadist.quantile_at(alpha / 2.0, fit.mu_hat, fit.sigma_hat)
    ucl = betadist.quantile_at(1.0 - alpha / 2.0, fit.mu_hat, fit.sigma_hat)
    return _make_result(kind, alpha, y, lcl, ucl)


def detect_signals(chart):
    """1-based observation numbers flagged out of control, ascending."""
    return [int(v) for v in chart.t[chart.signal]]
