"""Link functions mapping (0, 1) parameters to the real line and back.

Three kinds are supported: logit, probit, and cloglog. The inverse links
clamp to [CLAMP, 1 - CLAMP] so that downstream beta densities stay finite
during optimizer line searches. All functions accept scalars or arrays.
"""

import numpy as np

from ._backend import kernels
from .errors import DomainError

# Clamp for inverse links; keeps fitted means/dispersions strictly interior.
CLAMP = 1e-12

_SQRT_TWO_PI = np.sqrt(2.0 * np.pi)


def _clamp_unit(p):
    return np.clip(p, CLAMP, 1.0 - CLAMP)


class Logit:
    name = "logit"

    def eval(self, v):
        v = np.asarray(v, dtype=np.float64)
        out = np.log(v / (1.0 - v))
        return float(out) if out.ndim == 0 else out

    def inv(self, eta):
        eta = np.asarray(eta, dtype=np.float64)
        # Evaluate the stable branch on each side to avoid overflow.
        pos = 1.0 / (1.0 + np.exp(-np.abs(eta)))
        out = _clamp_unit(np.where(eta >= 0.0, pos, 1.0 - pos))
        return float(out) if out.ndim == 0 else out

    def inv_deriv(self, eta):
        p = self.inv(eta)
        out = np.asarray(p) * (1.0 - np.asarray(p))
        return float(out) if np.ndim(out) == 0 else out


class Probit:
    name = "probit"

    def eval(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.ndim == 0:
            return kernels.norm_ppf(float(v))
        return kernels.norm_ppf_arr(v)

    def inv(self, eta):
        eta = np.asarray(eta, dtype=np.float64)
        if eta.ndim == 0:
            return float(_clamp_unit(kernels.norm_cdf(float(eta))))
        return _clamp_unit(kernels.norm_cdf_arr(eta))

    def inv_deriv(self, eta):
        eta = np.asarray(eta, dtype=np.float64)
        out = np.exp(-0.5 * eta * eta) / _SQRT_TWO_PI
        return float(out) if out.ndim == 0 else out


class Cloglog:
    name = "cloglog"

    def eval(self, v):
        v = np.asarray(v, dtype=np.float64)
        out = np.log(-np.log1p(-v))
        return float(out) if out.ndim == 0 else out

    def inv(self, eta):
        eta = np.asarray(eta, dtype=np.float64)
        out = _clamp_unit(-np.expm1(-np.exp(eta)))
        return float(out) if out.ndim == 0 else out

    def inv_deriv(self, eta):
        eta = np.asarray(eta, dtype=np.float64)
        out = np.exp(eta - np.exp(eta))
        return float(out) if out.ndim == 0 else out


LINKS = {link.name: link for link in (Logit(), Probit(), Cloglog())}


def get_link(kind):
    """Resolve a link by name (or pass a link object through)."""
    if hasattr(kind, "inv_deriv"):
        return kind
    try:
        return LINKS[kind]
    except KeyError:
        raise ValueError(
            f"unsupported link {kind!r}; expected one of {sorted(LINKS)}"
        ) from None


def _check_unit_open(v):
    arr = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError("link argument must lie strictly inside (0, 1)")


def link_eval(kind, v):
    """Map v in (0, 1) to the real line."""
    _check_unit_open(v)
    return get_link(kind).eval(v)


def link_inv(kind, eta):
    """Map a linear predictor back into (0, 1), clamped away from 0 and 1."""
    return get_link(kind).inv(eta)


def link_inv_deriv(kind, eta):
    """Derivative of ``link_inv`` with respect to eta; strictly positive."""
    return get_link(kind).inv_deriv(eta)
