"""Maximum likelihood estimation for beta regression with varying dispersion.

The response y_t in (0, 1) is beta distributed with mean mu_t and dispersion
sigma_t, both tied to covariates through link functions:

    g(mu_t) = x_t . beta        (k mean coefficients)
    h(sigma_t) = z_t . gamma    (s dispersion coefficients)

Estimation maximizes the exact log-likelihood by BFGS ascent with the
analytic score and a backtracking line search; any trial point with a
non-finite likelihood is rejected. Standard errors come from the observed
information (numerical Hessian of the analytic score at the optimum).

Also provides the ordinary least squares fit used by the normal-theory
comparison chart and the likelihood ratio test for constant dispersion.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import ConvergenceError, DataError, DesignError
from .links import get_link

__all__ = [
    "ModelSpec",
    "Dataset",
    "FittedBetaReg",
    "FittedOLS",
    "LrTestResult",
    "CoefRow",
    "loglik",
    "score",
    "fit_betareg",
    "inference",
    "lr_constant_dispersion",
    "fit_ols",
    "predict_mu_sigma",
    "chi2_sf",
]

_BOUNDARY_TOL = 1e-10
_GRAD_TOL = 1e-6
_LOGLIK_RELTOL = 1e-10
_MAX_ITER = 500


@dataclass(frozen=True)
class ModelSpec:
    """Column names and links defining the two submodels."""

    mean_cols: list
    disp_cols: list
    mean_link: str = "logit"
    disp_link: str = "logit"

    def __post_init__(self):
        if len(self.mean_cols) < 1 or len(self.disp_cols) < 1:
            raise DesignError("each submodel needs at least one column")
        get_link(self.mean_link)
        get_link(self.disp_link)


@dataclass(frozen=True)
class Dataset:
    """Response vector with the two design matrices, validated on creation."""

    y: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    mean_names: tuple = ()
    disp_names: tuple = ()

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        Z = np.ascontiguousarray(self.Z, dtype=np.float64)
        if y.ndim != 1 or X.ndim != 2 or Z.ndim != 2:
            raise DataError("y must be a vector, X and Z matrices")
        n = y.shape[0]
        if X.shape[0] != n or Z.shape[0] != n:
            raise DataError("design matrices must have one row per observation")
        if np.any(y <= _BOUNDARY_TOL) or np.any(y >= 1.0 - _BOUNDARY_TOL):
            raise DataError(
                "responses must lie strictly inside (0, 1); "
                "apply the boundary adjustment at ingestion first"
            )
        k, s = X.shape[1], Z.shape[1]
        if n <= k + s:
            raise DesignError(
                f"need more than k + s = {k + s} observations, got {n}"
            )
        if np.linalg.matrix_rank(X) < k:
            raise DesignError("mean design matrix is rank deficient")
        if np.linalg.matrix_rank(Z) < s:
            raise DesignError("dispersion design matrix is rank deficient")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Z", Z)
        mean_names = tuple(self.mean_names) or tuple(
            f"x{i}" for i in range(1, k + 1))
        disp_names = tuple(self.disp_names) or tuple(
            f"z{i}" for i in range(1, s + 1))
        if len(mean_names) != k or len(disp_names) != s:
            raise DataError("column name lists must match design dimensions")
        object.__setattr__(self, "mean_names", mean_names)
        object.__setattr__(self, "disp_names", disp_names)

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def k(self):
        return self.X.shape[1]

    @property
    def s(self):
        return self.Z.shape[1]


@dataclass(frozen=True)
class FittedBetaReg:
    """MLE result: coefficients, covariance, and per-observation parameters."""

    beta_hat: np.ndarray
    gamma_hat: np.ndarray
    loglik: float
    vcov: np.ndarray
    mu_hat: np.ndarray
    sigma_hat: np.ndarray
    converged: bool
    iterations: int
    mean_link: str = "logit"
    disp_link: str = "logit"
    mean_names: tuple = ()
    disp_names: tuple = ()

    @property
    def params(self):
        return np.concatenate([self.beta_hat, self.gamma_hat])

    @property
    def std_errors(self):
        return np.sqrt(np.diag(self.vcov))


@dataclass(frozen=True)
class FittedOLS:
    """Least squares fit for the normal-theory comparison chart."""

    coef: np.ndarray
    resid_sd: float
    fitted: np.ndarray

    @property
    def degenerate(self):
        """True when the residual standard deviation collapsed to zero."""
        return self.resid_sd <= 0.0


@dataclass(frozen=True)
class LrTestResult:
    stat: float
    df: int
    p_value: float


@dataclass(frozen=True)
class CoefRow:
    submodel: str
    name: str
    estimate: float
    std_error: float
    z_stat: float
    p_value: float


def _mu_sigma(beta, gamma, data, mean_link, disp_link):
    mu = mean_link.inv(data.X @ beta)
    sigma = disp_link.inv(data.Z @ gamma)
    return mu, sigma


def loglik(beta, gamma, data, mean_link="logit", disp_link="logit"):
    """Sum of per-observation beta log densities under the linked submodels."""
    mean_link, disp_link = get_link(mean_link), get_link(disp_link)
    mu, sigma = _mu_sigma(np.asarray(beta, float), np.asarray(gamma, float),
                          data, mean_link, disp_link)
    s2 = sigma * sigma
    phi = (1.0 - s2) / s2
    a = mu * phi
    b = (1.0 - mu) * phi
    terms = (
        kernels.log_gamma_arr(phi)
        - kernels.log_gamma_arr(a)
        - kernels.log_gamma_arr(b)
        + (a - 1.0) * np.log(data.y)
        + (b - 1.0) * np.log1p(-data.y)
    )
    return float(np.sum(terms))


def score(beta, gamma, data, mean_link="logit", disp_link="logit"):
    """Analytic gradient of ``loglik`` in (beta, gamma) order."""
    mean_link, disp_link = get_link(mean_link), get_link(disp_link)
    beta = np.asarray(beta, float)
    gamma = np.asarray(gamma, float)
    eta_mean = data.X @ beta
    eta_disp = data.Z @ gamma
    mu = mean_link.inv(eta_mean)
    sigma = disp_link.inv(eta_disp)
    s2 = sigma * sigma
    phi = (1.0 - s2) / s2
    a = mu * phi
    b = (1.0 - mu) * phi

    ystar = np.log(data.y) - np.log1p(-data.y)
    dig_a = kernels.digamma_arr(a)
    dig_b = kernels.digamma_arr(b)
    mustar = dig_a - dig_b

    dl_dmu = phi * (ystar - mustar)
    dl_dphi = (
        mu * (ystar - mustar)
        + np.log1p(-data.y)
        - dig_b
        + kernels.digamma_arr(phi)
    )
    dmu_deta = mean_link.inv_deriv(eta_mean)
    dphi_dsigma = -2.0 / (sigma * s2)
    dsigma_deta = disp_link.inv_deriv(eta_disp)

    g_beta = data.X.T @ (dl_dmu * dmu_deta)
    g_gamma = data.Z.T @ (dl_dphi * dphi_dsigma * dsigma_deta)
    return np.concatenate([g_beta, g_gamma])


def _start_values(data, mean_link, disp_link):
    """OLS on the link scale for beta; moment-matched dispersion intercept."""
    y_shrunk = np.clip(data.y, 1e-6, 1.0 - 1e-6)
    target = mean_link.eval(y_shrunk)
    beta0, *_ = np.linalg.lstsq(data.X, target, rcond=None)
    resid = target - data.X @ beta0
    dof = max(data.n - data.k, 1)
    s2_link = float(resid @ resid) / dof

    eta = data.X @ beta0
    mu0 = mean_link.inv(eta)
    dmu = mean_link.inv_deriv(eta)
    var_y = s2_link * dmu * dmu
    sig2 = var_y / (mu0 * (1.0 - mu0))
    sigma0 = math.sqrt(min(max(float(np.mean(sig2)), 1e-4), 0.9))
    gamma0 = np.zeros(data.s)
    gamma0[_intercept_index(data.Z)] = disp_link.eval(sigma0)
    return beta0, gamma0


def _intercept_index(Z):
    """Index of a constant column, falling back to the first column."""
    for j in range(Z.shape[1]):
        col = Z[:, j]
        if np.all(col == col[0]) and col[0] != 0.0:
            return j
    return 0


def _score_hessian(theta, data, mlink, dlink):
    """Hessian of the log-likelihood by central differences of the score."""
    k = data.k
    dim = theta.shape[0]
    H = np.empty((dim, dim))
    for i in range(dim):
        h = 1e-5 * max(1.0, abs(theta[i]))
        up = theta.copy()
        up[i] += h
        dn = theta.copy()
        dn[i] -= h
        g_up = score(up[:k], up[k:], data, mlink, dlink)
        g_dn = score(dn[:k], dn[k:], data, mlink, dlink)
        H[:, i] = (g_up - g_dn) / (2.0 * h)
    return 0.5 * (H + H.T)


def fit_betareg(data, mean_link="logit", disp_link="logit",
                max_iter=_MAX_ITER):
    """Fit the beta regression by Newton ascent with the analytic score.

    Search directions come from the observed information (numerical Hessian
    of the analytic score); a backtracking line search guarantees ascent and
    rejects any trial point with a non-finite log-likelihood. Near the
    optimum the likelihood gain per step drops below double-precision
    resolution, so the line search then accepts steps that do not measurably
    decrease the likelihood but do shrink the score norm.

    Parameters
    ----------
    data : Dataset
    mean_link, disp_link : str or link object
    max_iter : iteration cap before a ConvergenceError is raised

    Returns
    -------
    FittedBetaReg with ``converged`` True; non-convergence raises a
    ConvergenceError carrying the last iterate.
    """
    mlink, dlink = get_link(mean_link), get_link(disp_link)
    k, s = data.k, data.s

    def f_g(theta):
        beta, gamma = theta[:k], theta[k:]
        ll = loglik(beta, gamma, data, mlink, dlink)
        if not math.isfinite(ll):
            return -math.inf, None
        g = score(beta, gamma, data, mlink, dlink)
        if not np.all(np.isfinite(g)):
            return -math.inf, None
        return ll, g

    beta0, gamma0 = _start_values(data, mlink, dlink)
    theta = np.concatenate([beta0, gamma0])
    ll, g = f_g(theta)
    if not math.isfinite(ll):
        raise ConvergenceError("log-likelihood not finite at starting values")

    iterations = 0
    converged = False
    rel_change = math.inf
    while iterations < max_iter:
        gmax = float(np.max(np.abs(g)))
        if gmax < _GRAD_TOL and rel_change < _LOGLIK_RELTOL:
            converged = True
            break
        H = _score_hessian(theta, data, mlink, dlink)
        d = None
        try:
            d = np.linalg.solve(-H, g)
        except np.linalg.LinAlgError:
            pass
        if d is None or float(g @ d) <= 0.0 or not np.all(np.isfinite(d)):
            # Fall back to a gradient step scaled by the stiffest curvature.
            scale = max(float(np.max(np.abs(np.diag(H)))), 1.0)
            d = g / scale
        slope = float(g @ d)
        resol = 64.0 * np.finfo(float).eps * max(1.0, abs(ll))
        step = 1.0
        accepted = None
        while step > 1e-20:
            cand = theta + step * d
            ll_c, g_c = f_g(cand)
            if math.isfinite(ll_c):
                if ll_c >= ll + 1e-4 * step * slope:
                    accepted = (cand, ll_c, g_c)
                    break
                # Sub-resolution regime: require the score norm to shrink
                # while the likelihood stays put within rounding.
                if (1e-4 * step * slope <= resol and ll_c >= ll - resol
                        and g_c is not None
                        and float(np.max(np.abs(g_c))) < gmax):
                    accepted = (cand, ll_c, g_c)
                    break
            step *= 0.5
        if accepted is None:
            # No improvement representable in double precision.
            converged = gmax < _GRAD_TOL
            break
        iterations += 1
        theta_new, ll_new, g_new = accepted
        rel_change = abs(ll_new - ll) / max(1.0, abs(ll_new))
        theta, ll, g = theta_new, ll_new, g_new

    if not converged:
        raise ConvergenceError(
            f"beta regression did not converge after {iterations} iterations "
            f"(max |score| = {np.max(np.abs(g)):.3g})",
            last={"theta": theta, "loglik": ll, "iterations": iterations,
                  "max_abs_score": float(np.max(np.abs(g)))},
        )

    f = -ll
    beta_hat, gamma_hat = theta[:k].copy(), theta[k:].copy()
    vcov = _observed_vcov(theta, data, mlink, dlink)
    mu_hat, sigma_hat = _mu_sigma(beta_hat, gamma_hat, data, mlink, dlink)
    return FittedBetaReg(
        beta_hat=beta_hat,
        gamma_hat=gamma_hat,
        loglik=-f,
        vcov=vcov,
        mu_hat=mu_hat,
        sigma_hat=sigma_hat,
        converged=converged,
        iterations=iterations,
        mean_link=mlink.name,
        disp_link=dlink.name,
        mean_names=data.mean_names,
        disp_names=data.disp_names,
    )


def _observed_vcov(theta, data, mlink, dlink):
    """Inverse negative Hessian, by central differences of the analytic score."""
    H = _score_hessian(theta, data, mlink, dlink)
    try:
        vcov = np.linalg.inv(-H)
    except np.linalg.LinAlgError:
        raise ConvergenceError(
            "observed information matrix is singular at the optimum",
            last={"theta": theta},
        ) from None
    if np.any(np.diag(vcov) < -1e-8):
        raise ConvergenceError(
            "observed information is not positive definite at the optimum",
            last={"theta": theta},
        )
    return vcov


def predict_mu_sigma(fit, X, Z):
    """Per-observation (mu, sigma) implied by a frozen fit on new covariates."""
    mlink, dlink = get_link(fit.mean_link), get_link(fit.disp_link)
    X = np.asarray(X, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    return mlink.inv(X @ fit.beta_hat), dlink.inv(Z @ fit.gamma_hat)


def _norm_sf2(z):
    """Two-sided normal p-value for a z statistic."""
    return math.erfc(abs(z) / math.sqrt(2.0))


def inference(fit):
    """Coefficient table: estimate, standard error, z statistic, p-value."""
    rows = []
    se = fit.std_errors
    k = fit.beta_hat.shape[0]
    names = list(fit.mean_names) + list(fit.disp_names)
    submodels = ["mean"] * k + ["dispersion"] * fit.gamma_hat.shape[0]
    for i, est in enumerate(fit.params):
        if est == 0.0:
            z = 0.0
        elif se[i] > 0.0:
            z = est / se[i]
        else:
            z = math.copysign(math.inf, est)
        rows.append(CoefRow(
            submodel=submodels[i],
            name=names[i],
            estimate=float(est),
            std_error=float(se[i]),
            z_stat=float(z),
            p_value=float(_norm_sf2(z)),
        ))
    return rows


def lr_constant_dispersion(full, reduced):
    """Likelihood ratio test of constant dispersion.

    ``full`` is the varying-dispersion fit, ``reduced`` the same mean
    submodel with a dispersion intercept only. The statistic is
    2 (loglik_full - loglik_reduced), asymptotically chi-square with
    s - 1 degrees of freedom.
    """
    if reduced.gamma_hat.shape[0] != 1:
        raise DataError("reduced model must have a dispersion intercept only")
    if full.beta_hat.shape[0] != reduced.beta_hat.shape[0] or \
            tuple(full.mean_names) != tuple(reduced.mean_names):
        raise DataError("full and reduced fits must share the mean submodel")
    df = full.gamma_hat.shape[0] - 1
    if df < 1:
        raise DataError("full model has no dispersion covariates to test")
    stat = 2.0 * (full.loglik - reduced.loglik)
    if stat < -1e-8:
        raise DataError(
            "reduced log-likelihood exceeds the full one; fits are inconsistent"
        )
    stat = max(stat, 0.0)
    return LrTestResult(stat=stat, df=df, p_value=chi2_sf(stat, df))


def fit_ols(X, y):
    """Least squares via the normal equations, with df-corrected residual sd.

    A response exactly linear in X yields resid_sd == 0; the result is
    flagged degenerate and rejected later by the chart construction.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    if n <= p:
        raise DesignError(f"need more than {p} observations for OLS, got {n}")
    if np.linalg.matrix_rank(X) < p:
        raise DesignError("design matrix is rank deficient")
    xtx = X.T @ X
    coef = np.linalg.solve(xtx, X.T @ y)
    fitted = X @ coef
    rss = float(np.sum((y - fitted) ** 2))
    return FittedOLS(coef=coef, resid_sd=math.sqrt(rss / (n - p)), fitted=fitted)


# ---------------------------------------------------------------------------
# chi-square upper tail via the regularized incomplete gamma


def _gamma_p_series(a, x):
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(500):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    return total * math.exp(-x + a * math.log(x) - kernels.log_gamma(a))


def _gamma_q_cf(a, x):
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delt = d * c
        h *= delt
        if abs(delt - 1.0) < 1e-16:
            break
    return h * math.exp(-x + a * math.log(x) - kernels.log_gamma(a))


def chi2_sf(x, df):
    """Upper-tail probability of the chi-square distribution."""
    if x < 0 or df <= 0:
        raise DataError("chi2_sf requires x >= 0 and df > 0")
    if x == 0.0:
        return 1.0
    a = 0.5 * df
    xs = 0.5 * x
    if xs < a + 1.0:
        return 1.0 - _gamma_p_series(a, xs)
    return _gamma_q_cf(a, xs)
