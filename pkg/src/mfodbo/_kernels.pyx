# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of ``mfodbo._pykernels``; see that module for semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, exp, sqrt, cos, sin, floor, M_PI, M_E, isinf, isfinite

cnp.import_array()

NAME = "cython"

cdef double Q_ELECTRON = 1.60217646e-19
cdef double K_BOLTZMANN = 1.3806503e-23
cdef double EXP_GUARD = 700.0
cdef double SCHWEFEL_OFFSET = 418.9828872724338


cdef inline double _clip(double x, double lo, double hi) nogil:
    if x < lo:
        x = lo
    if x > hi:
        x = hi
    return x


def clamp(const double[::1] x, const double[::1] lo, const double[::1] hi):
    cdef Py_ssize_t j, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for j in range(n):
        o[j] = _clip(x[j], lo[j], hi[j])
    return out


def roll(const double[::1] x, const double[::1] xprev, const double[::1] worst,
         double ak, double b, const double[::1] lo, const double[::1] hi):
    cdef Py_ssize_t j, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for j in range(n):
        o[j] = _clip(x[j] + ak * xprev[j] + b * fabs(x[j] - worst[j]), lo[j], hi[j])
    return out


def fo_roll(const double[:, ::1] hist, const double[::1] weights, const double[::1] xprev,
            const double[::1] worst, double ak, double b,
            const double[::1] lo, const double[::1] hi):
    cdef Py_ssize_t j, k, n = hist.shape[1], m = weights.shape[0]
    cdef double acc
    out = np.empty(n)
    cdef double[::1] o = out
    for j in range(n):
        acc = weights[0] * hist[0, j]
        for k in range(1, m):
            acc = acc + weights[k] * hist[k, j]
        o[j] = _clip(acc + ak * xprev[j] + b * fabs(hist[0, j] - worst[j]), lo[j], hi[j])
    return out


def dance(const double[::1] x, const double[::1] xprev, double tan_theta,
          const double[::1] lo, const double[::1] hi):
    cdef Py_ssize_t j, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for j in range(n):
        o[j] = _clip(x[j] + tan_theta * fabs(x[j] - xprev[j]), lo[j], hi[j])
    return out


def brood(const double[::1] xstar, const double[::1] x, const double[::1] lstar,
          const double[::1] ustar, const double[::1] b1, const double[::1] b2,
          const double[::1] lo, const double[::1] hi):
    cdef Py_ssize_t j, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for j in range(n):
        o[j] = _clip(xstar[j] + b1[j] * (x[j] - lstar[j]) + b2[j] * (x[j] - ustar[j]),
                     lo[j], hi[j])
    return out


def forage(const double[::1] x, const double[::1] lb, const double[::1] ub,
           double c1, double c2, const double[::1] lo, const double[::1] hi):
    cdef Py_ssize_t j, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for j in range(n):
        o[j] = _clip(x[j] + c1 * (x[j] - lb[j]) + c2 * (x[j] - ub[j]), lo[j], hi[j])
    return out


def steal(const double[::1] xb, const double[::1] xstar, const double[::1] x, double d,
          const double[::1] g, const double[::1] lo, const double[::1] hi):
    cdef Py_ssize_t j, n = x.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for j in range(n):
        o[j] = _clip(xb[j] + d * g[j] * (fabs(x[j] - xstar[j]) + fabs(x[j] - xb[j])),
                     lo[j], hi[j])
    return out


def perturb(const double[::1] xb, double xi, const double[::1] chaos,
            const double[::1] lo, const double[::1] hi):
    cdef Py_ssize_t j, n = xb.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for j in range(n):
        o[j] = _clip(xb[j] + xi * chaos[j], lo[j], hi[j])
    return out


# -- benchmark objectives ---------------------------------------------------

def sphere(const double[::1] x):
    cdef Py_ssize_t j
    cdef double s = 0.0
    for j in range(x.shape[0]):
        s += x[j] * x[j]
    return s


def rosenbrock(const double[::1] x):
    cdef Py_ssize_t j
    cdef double s = 0.0, a, c
    for j in range(x.shape[0] - 1):
        a = x[j + 1] - x[j] * x[j]
        c = x[j] - 1.0
        s += 100.0 * a * a + c * c
    return s


def rastrigin(const double[::1] x):
    cdef Py_ssize_t j, n = x.shape[0]
    cdef double s = 0.0
    for j in range(n):
        s += x[j] * x[j] - 10.0 * cos(2.0 * M_PI * x[j])
    return 10.0 * n + s


def ackley(const double[::1] x):
    cdef Py_ssize_t j, n = x.shape[0]
    cdef double s1 = 0.0, s2 = 0.0
    for j in range(n):
        s1 += x[j] * x[j]
        s2 += cos(2.0 * M_PI * x[j])
    s1 /= n
    s2 /= n
    return -20.0 * exp(-0.2 * sqrt(s1)) - exp(s2) + 20.0 + M_E


def griewank(const double[::1] x):
    cdef Py_ssize_t j
    cdef double s = 0.0, p = 1.0
    for j in range(x.shape[0]):
        s += x[j] * x[j]
        p *= cos(x[j] / sqrt(j + 1.0))
    return 1.0 + s / 4000.0 - p


def schwefel(const double[::1] x):
    cdef Py_ssize_t j, n = x.shape[0]
    cdef double s = 0.0
    for j in range(n):
        s += x[j] * sin(sqrt(fabs(x[j])))
    return SCHWEFEL_OFFSET * n - s


# -- photovoltaic residuals -------------------------------------------------

cdef inline double _diode(double isd_ua, double a, double temp, double n) nogil:
    cdef double c = Q_ELECTRON / (temp * n * K_BOLTZMANN)
    cdef double arg = a * c
    if arg > EXP_GUARD:
        arg = EXP_GUARD
    return (isd_ua * 1e-6) * (exp(arg) - 1.0)


def sdm_residuals(const double[::1] p, const double[::1] v, const double[::1] i, double temp):
    cdef Py_ssize_t r, n = v.shape[0]
    cdef double a
    out = np.empty(n)
    cdef double[::1] o = out
    for r in range(n):
        a = i[r] * p[2] + v[r]
        o[r] = p[0] - _diode(p[1], a, temp, p[4]) - a / p[3] - i[r]
    return out


def ddm_residuals(const double[::1] p, const double[::1] v, const double[::1] i, double temp):
    cdef Py_ssize_t r, n = v.shape[0]
    cdef double a
    out = np.empty(n)
    cdef double[::1] o = out
    for r in range(n):
        a = i[r] * p[2] + v[r]
        o[r] = (p[0] - _diode(p[1], a, temp, p[4]) - _diode(p[5], a, temp, p[6])
                - a / p[3] - i[r])
    return out


def module_residuals(const double[::1] p, const double[::1] v, const double[::1] i,
                     double temp, double ns, double np_):
    cdef Py_ssize_t r, n = v.shape[0]
    cdef double a
    out = np.empty(n)
    cdef double[::1] o = out
    for r in range(n):
        # same term order as the cell model, so N_s = N_p = 1 reproduces it exactly
        a = (i[r] / np_) * p[2] + v[r] / ns
        o[r] = p[0] * np_ - _diode(p[1], a, temp, p[4]) * np_ - a / (p[3] / np_) - i[r]
    return out


cdef double _rms(double[::1] f):
    cdef Py_ssize_t r, n = f.shape[0]
    cdef double s = 0.0, m = 0.0, out
    for r in range(n):
        s += f[r] * f[r]
    out = sqrt(s / n)
    if isinf(out):
        for r in range(n):
            if not isfinite(f[r]):
                return out
            if fabs(f[r]) > m:
                m = fabs(f[r])
        s = 0.0
        for r in range(n):
            s += (f[r] / m) * (f[r] / m)
        out = m * sqrt(s / n)
    return out


def rms(const double[::1] f):
    return _rms(np.array(f))


def sdm_rmse(const double[::1] p, const double[::1] v, const double[::1] i, double temp):
    return _rms(sdm_residuals(p, v, i, temp))


def ddm_rmse(const double[::1] p, const double[::1] v, const double[::1] i, double temp):
    return _rms(ddm_residuals(p, v, i, temp))


def module_rmse(const double[::1] p, const double[::1] v, const double[::1] i,
                double temp, double ns, double np_):
    return _rms(module_residuals(p, v, i, temp, ns, np_))


# -- chaotic sequences ------------------------------------------------------

def folc_weights(double v, Py_ssize_t length):
    cdef Py_ssize_t s
    out = np.empty(max(length, 1))
    cdef double[::1] c = out
    c[0] = 1.0
    for s in range(1, length):
        c[s] = c[s - 1] * (s - 1 + v) / s
    return out


def folc_sequence(double x0, double mu, double v, Py_ssize_t length):
    out = np.empty(length)
    if length == 0:
        return out
    cdef double[::1] y = out
    cdef double[::1] c = folc_weights(v, length)
    g_arr = np.empty(length)
    cdef double[::1] g = g_arr
    cdef Py_ssize_t t, j
    cdef double acc, raw, f
    y[0] = x0
    g[0] = x0 * (1.0 - x0)
    with nogil:
        for t in range(1, length):
            acc = 0.0
            for j in range(t):
                acc += c[t - 1 - j] * g[j]
            raw = x0 + mu * acc
            f = raw - floor(raw)
            if f == 0.0:
                f = y[t - 1]
            y[t] = f
            g[t] = f * (1.0 - f)
    return out
