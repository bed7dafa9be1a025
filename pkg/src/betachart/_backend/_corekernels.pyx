# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled numerical kernels.

Same surface as the pure backend: log-gamma, digamma, regularized
incomplete beta and its inverse, normal cdf/quantile, each as a scalar
function and an elementwise array variant. The array variants release the
GIL and loop in C; log-gamma and the normal cdf come straight from libm.
"""

import numpy as np

from ..errors import ConvergenceError

from libc.math cimport (
    lgamma as c_lgamma,
    log,
    log1p,
    exp,
    fabs,
    sqrt,
    erfc,
    isfinite,
    NAN,
)

NAME = "compiled"

cdef double DIGAMMA_SHIFT = 8.0
cdef double CF_EPS = 3.0e-16
cdef double CF_TINY = 1.0e-300
cdef int CF_MAX_ITER = 1000
cdef int INV_MAX_ITER = 200
cdef double INV_FTOL = 1.0e-13


cdef double _digamma(double x) noexcept nogil:
    cdef double acc = 0.0, w, ser
    while x < DIGAMMA_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    w = 1.0 / (x * x)
    ser = w * (1.0 / 12.0 + w * (-1.0 / 120.0 + w * (1.0 / 252.0 + w * (
        -1.0 / 240.0 + w * (1.0 / 132.0 + w * (-691.0 / 32760.0))))))
    return acc + log(x) - 0.5 / x - ser


cdef double _betacf(double a, double b, double x) noexcept nogil:
    # Modified Lentz evaluation of the incomplete beta continued fraction.
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, delt
    cdef int m, m2
    if fabs(d) < CF_TINY:
        d = CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < CF_TINY:
            d = CF_TINY
        c = 1.0 + aa / c
        if fabs(c) < CF_TINY:
            c = CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < CF_TINY:
            d = CF_TINY
        c = 1.0 + aa / c
        if fabs(c) < CF_TINY:
            c = CF_TINY
        d = 1.0 / d
        delt = d * c
        h *= delt
        if fabs(delt - 1.0) < CF_EPS:
            return h
    return NAN


cdef double _betainc(double x, double a, double b) noexcept nogil:
    cdef double log_bt, res
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    if x > (a + 1.0) / (a + b + 2.0):
        res = _betainc(1.0 - x, b, a)
        if res != res:
            return NAN
        return 1.0 - res
    log_bt = (c_lgamma(a + b) - c_lgamma(a) - c_lgamma(b)
              + a * log(x) + b * log1p(-x))
    res = _betacf(a, b, x)
    if res != res:
        return NAN
    return exp(log_bt) * res / a


cdef double _betaincinv(double p, double a, double b) noexcept nogil:
    cdef double log_beta = c_lgamma(a) + c_lgamma(b) - c_lgamma(a + b)
    cdef double lo = 0.0, hi = 1.0
    cdef double x = a / (a + b)
    cdef double f, log_pdf, xn
    cdef int it
    if x < 1e-12:
        x = 1e-12
    elif x > 1.0 - 1e-12:
        x = 1.0 - 1e-12
    for it in range(INV_MAX_ITER):
        f = _betainc(x, a, b) - p
        if f != f:
            return NAN
        if f > 0.0:
            hi = x
        else:
            lo = x
        if fabs(f) <= INV_FTOL or hi - lo <= lo * 2.3e-16:
            return x
        log_pdf = (a - 1.0) * log(x) + (b - 1.0) * log1p(-x) - log_beta
        xn = x - f * exp(-log_pdf)
        if not isfinite(xn) or xn <= lo or xn >= hi:
            xn = 0.5 * (lo + hi)
        x = xn
    return NAN


cdef double _norm_cdf(double x) noexcept nogil:
    return 0.5 * erfc(-x / sqrt(2.0))


# AS 241 (PPND16) rational approximation for the standard normal quantile.
cdef double _norm_ppf(double p) noexcept nogil:
    cdef double q = p - 0.5
    cdef double r, num, den, val
    if fabs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
            + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
            + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
            + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
            + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
            + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
            + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = sqrt(-log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
            + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
            + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
            + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
            + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
            + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
            + 2.05319162663775882187e0) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
            + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
            + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
            + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
            + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
            + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
            + 5.99832206555887937690e-1) * r + 1.0)
    val = num / den
    if q < 0.0:
        return -val
    return val


def log_gamma(double x):
    return c_lgamma(x)


def digamma(double x):
    return _digamma(x)


def reg_inc_beta(double x, double a, double b):
    cdef double res = _betainc(x, a, b)
    if res != res:
        raise ConvergenceError(
            "incomplete beta continued fraction did not converge "
            f"within {CF_MAX_ITER} iterations"
        )
    return res


def inv_reg_inc_beta(double p, double a, double b):
    cdef double res = _betaincinv(p, a, b)
    if res != res:
        raise ConvergenceError(
            f"inverse incomplete beta did not converge within {INV_MAX_ITER} iterations"
        )
    return res


def norm_cdf(double x):
    return _norm_cdf(x)


def norm_ppf(double p):
    return _norm_ppf(p)


cdef _as_c_double(object x):
    return np.ascontiguousarray(x, dtype=np.float64)


def log_gamma_arr(x):
    arr = _as_c_double(x)
    out = np.empty_like(arr)
    cdef double[::1] xv = arr.reshape(-1)
    cdef double[::1] ov = out.reshape(-1)
    cdef Py_ssize_t i, n = xv.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = c_lgamma(xv[i])
    return out


def digamma_arr(x):
    arr = _as_c_double(x)
    out = np.empty_like(arr)
    cdef double[::1] xv = arr.reshape(-1)
    cdef double[::1] ov = out.reshape(-1)
    cdef Py_ssize_t i, n = xv.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = _digamma(xv[i])
    return out


def reg_inc_beta_arr(x, a, b):
    xb, ab, bb = np.broadcast_arrays(
        _as_c_double(x), _as_c_double(a), _as_c_double(b))
    out = np.empty(xb.shape, dtype=np.float64)
    cdef double[::1] xv = np.ascontiguousarray(xb).reshape(-1)
    cdef double[::1] av = np.ascontiguousarray(ab).reshape(-1)
    cdef double[::1] bv = np.ascontiguousarray(bb).reshape(-1)
    cdef double[::1] ov = out.reshape(-1)
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef bint failed = False
    with nogil:
        for i in range(n):
            ov[i] = _betainc(xv[i], av[i], bv[i])
            if ov[i] != ov[i]:
                failed = True
                break
    if failed:
        raise ConvergenceError(
            "incomplete beta continued fraction did not converge "
            f"within {CF_MAX_ITER} iterations"
        )
    return out


def inv_reg_inc_beta_arr(p, a, b):
    pb, ab, bb = np.broadcast_arrays(
        _as_c_double(p), _as_c_double(a), _as_c_double(b))
    out = np.empty(pb.shape, dtype=np.float64)
    cdef double[::1] pv = np.ascontiguousarray(pb).reshape(-1)
    cdef double[::1] av = np.ascontiguousarray(ab).reshape(-1)
    cdef double[::1] bv = np.ascontiguousarray(bb).reshape(-1)
    cdef double[::1] ov = out.reshape(-1)
    cdef Py_ssize_t i, n = pv.shape[0]
    cdef bint failed = False
    with nogil:
        for i in range(n):
            ov[i] = _betaincinv(pv[i], av[i], bv[i])
            if ov[i] != ov[i]:
                failed = True
                break
    if failed:
        raise ConvergenceError(
            f"inverse incomplete beta did not converge within {INV_MAX_ITER} iterations"
        )
    return out


def norm_cdf_arr(x):
    arr = _as_c_double(x)
    out = np.empty_like(arr)
    cdef double[::1] xv = arr.reshape(-1)
    cdef double[::1] ov = out.reshape(-1)
    cdef Py_ssize_t i, n = xv.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = _norm_cdf(xv[i])
    return out


def norm_ppf_arr(p):
    arr = _as_c_double(p)
    out = np.empty_like(arr)
    cdef double[::1] pv = arr.reshape(-1)
    cdef double[::1] ov = out.reshape(-1)
    cdef Py_ssize_t i, n = pv.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = _norm_ppf(pv[i])
    return out
