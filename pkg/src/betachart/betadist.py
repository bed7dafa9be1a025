"""Beta distribution in shape and mean/dispersion parametrizations.

``ShapePair`` carries the classical (theta1, theta2) shapes; ``MuSigma``
carries the mean mu in (0, 1) and the dispersion sigma in (0, 1), related
through

    theta1 = mu * phi,   theta2 = (1 - mu) * phi,   phi = (1 - sigma^2) / sigma^2

so that E(y) = mu and Var(y) = mu (1 - mu) sigma^2.

Sampling draws the ratio of two gamma variates G1 / (G1 + G2); streams are
counter-based (Philox) and keyed by (master_seed, stream_index) so each
Monte Carlo replication is reproducible regardless of scheduling.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from ._backend import kernels
from .errors import DomainError

__all__ = [
    "ShapePair",
    "MuSigma",
    "to_shape",
    "to_musigma",
    "log_pdf",
    "cdf",
    "quantile",
    "mean_var",
    "sample",
    "log_pdf_at",
    "cdf_at",
    "quantile_at",
    "sample_at",
    "philox_stream",
]


@dataclass(frozen=True)
class ShapePair:
    """Shape parameters of the classical beta density; both positive."""

    theta1: float
    theta2: float

    def __post_init__(self):
        for name in ("theta1", "theta2"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0.0:
                raise DomainError(f"{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class MuSigma:
    """Mean/dispersion parameters, both strictly inside (0, 1)."""

    mu: float
    sigma: float

    def __post_init__(self):
        for name in ("mu", "sigma"):
            v = getattr(self, name)
            if not math.isfinite(v) or not 0.0 < v < 1.0:
                raise DomainError(f"{name} must lie strictly inside (0, 1), got {v!r}")

    @property
    def precision(self):
        """phi = (1 - sigma^2) / sigma^2."""
        s2 = self.sigma * self.sigma
        return (1.0 - s2) / s2


def to_shape(p: MuSigma) -> ShapePair:
    """Convert mean/dispersion parameters to beta shapes."""
    phi = p.precision
    return ShapePair(p.mu * phi, (1.0 - p.mu) * phi)


def to_musigma(s: ShapePair) -> MuSigma:
    """Convert beta shapes to mean/dispersion parameters."""
    total = s.theta1 + s.theta2
    return MuSigma(s.theta1 / total, math.sqrt(1.0 / (1.0 + total)))


def _shapes_at(mu, sigma):
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    phi = (1.0 - sigma * sigma) / (sigma * sigma)
    return mu * phi, (1.0 - mu) * phi


def log_pdf_at(y, mu, sigma):
    """Elementwise beta log density at mean/dispersion arrays."""
    y = np.asarray(y, dtype=np.float64)
    a, b = _shapes_at(mu, sigma)
    return (
        kernels.log_gamma_arr(a + b)
        - kernels.log_gamma_arr(a)
        - kernels.log_gamma_arr(b)
        + (a - 1.0) * np.log(y)
        + (b - 1.0) * np.log1p(-y)
    )


def cdf_at(y, mu, sigma):
    """Elementwise beta CDF at mean/dispersion arrays."""
    a, b = _shapes_at(mu, sigma)
    return kernels.reg_inc_beta_arr(np.asarray(y, dtype=np.float64), a, b)


def quantile_at(alpha, mu, sigma):
    """Elementwise beta quantile at mean/dispersion arrays."""
    a, b = _shapes_at(mu, sigma)
    return kernels.inv_reg_inc_beta_arr(np.asarray(alpha, dtype=np.float64), a, b)


def sample_at(rng, mu, sigma, size=None):
    """Draw beta variates, one per element of the broadcast (mu, sigma)."""
    a, b = _shapes_at(mu, sigma)
    g1 = rng.standard_gamma(a, size=size)
    g2 = rng.standard_gamma(b, size=size)
    return g1 / (g1 + g2)


def log_pdf(y, p: MuSigma) -> float:
    """Log density of the beta distribution at y in (0, 1)."""
    if not 0.0 < y < 1.0:
        raise DomainError(
            "log_pdf requires y strictly inside (0, 1); "
            "adjust boundary observations at ingestion"
        )
    return float(log_pdf_at(y, p.mu, p.sigma))


def cdf(y, p: MuSigma) -> float:
    """Distribution function at y in [0, 1]."""
    s = to_shape(p)
    return specfun.reg_inc_beta(y, s.theta1, s.theta2)


def quantile(alpha, p: MuSigma) -> float:
    """Quantile function: the y with cdf(y, p) == alpha, 0 < alpha < 1."""
    s = to_shape(p)
    return specfun.inv_reg_inc_beta(alpha, s.theta1, s.theta2)


def mean_var(p: MuSigma):
    """Mean and variance implied by mean/dispersion parameters."""
    return p.mu, p.mu * (1.0 - p.mu) * p.sigma * p.sigma


def sample(rng, p: MuSigma, n: int):
    """n i.i.d. beta draws as the ratio of two gamma variates."""
    if n < 1:
        raise DomainError("sample size must be at least 1")
    return sample_at(rng, p.mu, p.sigma, size=n)


def philox_stream(master_seed: int, stream_index: int) -> np.random.Generator:
    """Independent counter-based RNG stream keyed by (seed, stream index)."""
    key = np.array(
        [master_seed & 0xFFFFFFFFFFFFFFFF, stream_index & 0xFFFFFFFFFFFFFFFF],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))
