"""Pure numpy implementation of the numerical kernels.

This is the fallback selected when the compiled extension is unavailable
(or when ``BETACHART_BACKEND=pure`` is set). It implements the same API as
``_corekernels``: scalar special functions plus elementwise array variants
used by the fitting and charting hot paths.

Algorithms: Lanczos series for log-gamma, shifted asymptotic series for
digamma, the modified Lentz continued fraction for the regularized
incomplete beta (with the usual symmetry switch), bracketed Newton for its
inverse, and the Wichura AS 241 rational approximation for the normal
quantile.
"""

import math

import numpy as np

from ..errors import ConvergenceError

NAME = "pure"

_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)

# Lanczos g=7, n=9 coefficients.
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

# Asymptotic series for digamma, coefficients of w = 1/x^2 after shifting
# the argument above _DIGAMMA_SHIFT.
_DIGAMMA_SHIFT = 8.0
_DIGAMMA_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
)

_CF_EPS = 3.0e-16
_CF_TINY = 1.0e-300
_CF_MAX_ITER = 1000
_INV_MAX_ITER = 200
_INV_FTOL = 1.0e-13


def log_gamma(x):
    return math.lgamma(x)


def log_gamma_arr(x):
    x = np.asarray(x, dtype=np.float64)
    # Lanczos loses accuracy near the x -> 0 edge; shift up via the
    # recurrence ln G(x) = ln G(x+1) - ln x there.
    small = x < 0.5
    z = np.where(small, x, x - 1.0)
    s = np.full_like(z, _LANCZOS[0])
    for i, c in enumerate(_LANCZOS[1:], start=1):
        s += c / (z + i)
    t = z + 7.5
    val = _HALF_LOG_TWO_PI + (z + 0.5) * np.log(t) - t + np.log(s)
    return np.where(small, val - np.log(np.where(small, x, 1.0)), val)


def digamma(x):
    acc = 0.0
    while x < _DIGAMMA_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    w = 1.0 / (x * x)
    ser = 0.0
    for c in reversed(_DIGAMMA_COEFFS):
        ser = w * (c + ser)
    return acc + math.log(x) - 0.5 / x - ser


def digamma_arr(x):
    x = np.asarray(x, dtype=np.float64)
    acc = np.zeros_like(x)
    xx = x.copy()
    for _ in range(int(_DIGAMMA_SHIFT)):
        low = xx < _DIGAMMA_SHIFT
        if not low.any():
            break
        acc[low] -= 1.0 / xx[low]
        xx[low] += 1.0
    w = 1.0 / (xx * xx)
    ser = np.zeros_like(xx)
    for c in reversed(_DIGAMMA_COEFFS):
        ser = w * (c + ser)
    return acc + np.log(xx) - 0.5 / xx - ser


def _betacf_arr(a, b, x):
    """Continued fraction for the incomplete beta, modified Lentz, elementwise."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    np.copyto(d, _CF_TINY, where=np.abs(d) < _CF_TINY)
    d = 1.0 / d
    h = d.copy()
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        np.copyto(d, _CF_TINY, where=np.abs(d) < _CF_TINY)
        c = 1.0 + aa / c
        np.copyto(c, _CF_TINY, where=np.abs(c) < _CF_TINY)
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        np.copyto(d, _CF_TINY, where=np.abs(d) < _CF_TINY)
        c = 1.0 + aa / c
        np.copyto(c, _CF_TINY, where=np.abs(c) < _CF_TINY)
        d = 1.0 / d
        delt = d * c
        h *= delt
        if np.all(np.abs(delt - 1.0) < _CF_EPS):
            return h
    raise ConvergenceError(
        "incomplete beta continued fraction did not converge "
        f"within {_CF_MAX_ITER} iterations"
    )


def reg_inc_beta_arr(x, a, b):
    x, a, b = np.broadcast_arrays(
        np.asarray(x, dtype=np.float64),
        np.asarray(a, dtype=np.float64),
        np.asarray(b, dtype=np.float64),
    )
    out = np.empty_like(x)
    at_zero = x <= 0.0
    at_one = x >= 1.0
    out[at_zero] = 0.0
    out[at_one] = 1.0
    interior = ~(at_zero | at_one)
    if not interior.any():
        return out

    xi, ai, bi = x[interior], a[interior], b[interior]
    # Symmetry switch keeps the continued fraction in its fast region.
    swap = xi > (ai + 1.0) / (ai + bi + 2.0)
    xs = np.where(swap, 1.0 - xi, xi)
    asw = np.where(swap, bi, ai)
    bsw = np.where(swap, ai, bi)
    log_bt = (
        log_gamma_arr(asw + bsw)
        - log_gamma_arr(asw)
        - log_gamma_arr(bsw)
        + asw * np.log(xs)
        + bsw * np.log1p(-xs)
    )
    res = np.exp(log_bt) * _betacf_arr(asw, bsw, xs) / asw
    out[interior] = np.where(swap, 1.0 - res, res)
    return out


def reg_inc_beta(x, a, b):
    return float(reg_inc_beta_arr(np.array([x]), np.array([a]), np.array([b]))[0])


def inv_reg_inc_beta_arr(p, a, b):
    p, a, b = np.broadcast_arrays(
        np.asarray(p, dtype=np.float64),
        np.asarray(a, dtype=np.float64),
        np.asarray(b, dtype=np.float64),
    )
    log_beta = log_gamma_arr(a) + log_gamma_arr(b) - log_gamma_arr(a + b)
    lo = np.zeros_like(p)
    hi = np.ones_like(p)
    x = np.clip(a / (a + b), 1e-12, 1.0 - 1e-12)
    done = np.zeros(p.shape, dtype=bool)
    for _ in range(_INV_MAX_ITER):
        f = reg_inc_beta_arr(x, a, b) - p
        above = (f > 0.0) & ~done
        below = (f <= 0.0) & ~done
        hi[above] = x[above]
        lo[below] = x[below]
        newly = np.abs(f) <= _INV_FTOL
        # A collapsed bracket means x is resolved to adjacent doubles.
        newly |= (hi - lo) <= np.spacing(lo)
        done |= newly
        if done.all():
            return x
        log_pdf = (a - 1.0) * np.log(x) + (b - 1.0) * np.log1p(-x) - log_beta
        xn = x - f * np.exp(-log_pdf)
        bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
        xn[bad] = 0.5 * (lo[bad] + hi[bad])
        x = np.where(done, x, xn)
    raise ConvergenceError(
        f"inverse incomplete beta did not converge within {_INV_MAX_ITER} iterations"
    )


def inv_reg_inc_beta(p, a, b):
    return float(inv_reg_inc_beta_arr(np.array([p]), np.array([a]), np.array([b]))[0])


def norm_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def norm_cdf_arr(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    out.reshape(-1)[:] = [
        0.5 * math.erfc(-v / math.sqrt(2.0)) for v in x.reshape(-1)
    ]
    return out


# AS 241 (PPND16) coefficients for the normal quantile.
_PPND_A = (
    3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
    1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
    3.3430575583588128105e4, 2.5090809287301226727e3,
)
_PPND_B = (
    1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
    5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
    2.8729085735721942674e4, 5.2264952788528545610e3,
)
_PPND_C = (
    1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
    3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4,
)
_PPND_D = (
    1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
    6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
    5.47593808499534494600e-4, 1.05075007164441684324e-9,
)
_PPND_E = (
    6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7,
)
_PPND_F = (
    1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15,
)


def _poly(coeffs, r):
    acc = 0.0 * r
    for c in reversed(coeffs):
        acc = acc * r + c
    return acc


def norm_ppf_arr(p):
    p = np.asarray(p, dtype=np.float64)
    q = p - 0.5
    out = np.empty_like(p)
    central = np.abs(q) <= 0.425
    if central.any():
        r = 0.180625 - q[central] * q[central]
        out[central] = q[central] * _poly(_PPND_A, r) / _poly(_PPND_B, r)
    tails = ~central
    if tails.any():
        qt = q[tails]
        r = np.where(qt < 0.0, p[tails], 1.0 - p[tails])
        r = np.sqrt(-np.log(r))
        near = r <= 5.0
        val = np.where(
            near,
            _poly(_PPND_C, np.where(near, r, 0.0) - 1.6)
            / _poly(_PPND_D, np.where(near, r, 0.0) - 1.6),
            _poly(_PPND_E, np.where(near, 0.0, r) - 5.0)
            / _poly(_PPND_F, np.where(near, 0.0, r) - 5.0),
        )
        out[tails] = np.where(qt < 0.0, -val, val)
    return out


def norm_ppf(p):
    return float(norm_ppf_arr(np.array([p]))[0])
