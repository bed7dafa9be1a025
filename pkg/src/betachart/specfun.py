"""Special functions for the beta distribution.

Thin validating layer over the selected kernel backend. Every function
accepts a python float or a numpy array and returns a matching type.

The regularized incomplete beta uses the continued fraction expansion with
the symmetry switch at x > (a+1)/(a+b+2); its inverse runs a Newton
iteration started at the distribution mean and safeguarded by bisection.
"""

import numpy as np

from ._backend import kernels
from .errors import DomainError

__all__ = ["log_gamma", "digamma", "reg_inc_beta", "inv_reg_inc_beta"]


def _is_scalar(*values):
    return all(np.ndim(v) == 0 for v in values)


def _check_positive(name, value):
    arr = np.asarray(value, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"{name} must be positive and finite")


def log_gamma(x):
    """Natural log of the gamma function for x > 0."""
    _check_positive("x", x)
    if _is_scalar(x):
        return kernels.log_gamma(float(x))
    return kernels.log_gamma_arr(x)


def digamma(x):
    """Logarithmic derivative of the gamma function for x > 0."""
    _check_positive("x", x)
    if _is_scalar(x):
        return kernels.digamma(float(x))
    return kernels.digamma_arr(x)


def reg_inc_beta(x, a, b):
    """Regularized incomplete beta I_x(a, b), the Beta(a, b) CDF at x.

    Parameters
    ----------
    x : float or ndarray in [0, 1]
    a, b : positive floats or ndarrays (broadcast against x)
    """
    _check_positive("a", a)
    _check_positive("b", b)
    xa = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(xa)) or np.any(xa < 0.0) or np.any(xa > 1.0):
        raise DomainError("x must lie in [0, 1]")
    if _is_scalar(x, a, b):
        return kernels.reg_inc_beta(float(x), float(a), float(b))
    return kernels.reg_inc_beta_arr(x, a, b)


def inv_reg_inc_beta(p, a, b):
    """Inverse of ``reg_inc_beta`` in x: the Beta(a, b) quantile at p.

    p must lie strictly inside (0, 1); the endpoints are rejected so that
    callers are forced to clamp tail probabilities explicitly.
    """
    _check_positive("a", a)
    _check_positive("b", b)
    pa = np.asarray(p, dtype=np.float64)
    if not np.all(np.isfinite(pa)) or np.any(pa <= 0.0) or np.any(pa >= 1.0):
        raise DomainError("p must lie strictly inside (0, 1)")
    if _is_scalar(p, a, b):
        return kernels.inv_reg_inc_beta(float(p), float(a), float(b))
    return kernels.inv_reg_inc_beta_arr(p, a, b)
