"""numpy implementations of the numerical kernels.

Every function here has a twin of the same name and signature in the
compiled ``_kernels`` extension. Position-update kernels evaluate each
coordinate with the same operation order as the compiled versions, so the
two backends produce bit-identical positions; reductions (objective sums,
the FOLC memory sum) agree only to rounding.
"""
import math

import numpy as np

Q_ELECTRON = 1.60217646e-19
K_BOLTZMANN = 1.3806503e-23
EXP_GUARD = 700.0

NAME = "python"


# -- position updates -------------------------------------------------------

def clamp(x, lo, hi):
    return np.minimum(hi, np.maximum(lo, x))


def roll(x, xprev, worst, ak, b, lo, hi):
    return clamp(x + ak * xprev + b * np.abs(x - worst), lo, hi)


def fo_roll(hist, weights, xprev, worst, ak, b, lo, hi):
    acc = weights[0] * hist[0]
    for k in range(1, weights.shape[0]):
        acc = acc + weights[k] * hist[k]
    return clamp(acc + ak * xprev + b * np.abs(hist[0] - worst), lo, hi)


def dance(x, xprev, tan_theta, lo, hi):
    return clamp(x + tan_theta * np.abs(x - xprev), lo, hi)


def brood(xstar, x, lstar, ustar, b1, b2, lo, hi):
    return clamp(xstar + b1 * (x - lstar) + b2 * (x - ustar), lo, hi)


def forage(x, lb, ub, c1, c2, lo, hi):
    return clamp(x + c1 * (x - lb) + c2 * (x - ub), lo, hi)


def steal(xb, xstar, x, d, g, lo, hi):
    return clamp(xb + d * g * (np.abs(x - xstar) + np.abs(x - xb)), lo, hi)


def perturb(xb, xi, chaos, lo, hi):
    return clamp(xb + xi * chaos, lo, hi)


# -- benchmark objectives ---------------------------------------------------

def sphere(x):
    return float(np.dot(x, x))


def rosenbrock(x):
    a = x[1:] - x[:-1] * x[:-1]
    c = x[:-1] - 1.0
    return float(np.sum(100.0 * a * a + c * c))


def rastrigin(x):
    return float(10.0 * x.shape[0] + np.sum(x * x - 10.0 * np.cos(2.0 * math.pi * x)))


def ackley(x):
    n = x.shape[0]
    s1 = np.dot(x, x) / n
    s2 = np.sum(np.cos(2.0 * math.pi * x)) / n
    return float(-20.0 * math.exp(-0.2 * math.sqrt(s1)) - math.exp(s2) + 20.0 + math.e)


def griewank(x):
    idx = np.sqrt(np.arange(1, x.shape[0] + 1, dtype=float))
    return float(1.0 + np.dot(x, x) / 4000.0 - np.prod(np.cos(x / idx)))


SCHWEFEL_OFFSET = 418.9828872724338


def schwefel(x):
    return float(SCHWEFEL_OFFSET * x.shape[0] - np.sum(x * np.sin(np.sqrt(np.abs(x)))))


# -- photovoltaic residuals -------------------------------------------------

def _diode(isd_ua, a, temp, n):
    c = Q_ELECTRON / (temp * n * K_BOLTZMANN)
    arg = np.minimum(a * c, EXP_GUARD)
    return (isd_ua * 1e-6) * (np.exp(arg) - 1.0)


def sdm_residuals(p, v, i, temp):
    iph, isd, rs, rsh, n = p[0], p[1], p[2], p[3], p[4]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a = i * rs + v
        return iph - _diode(isd, a, temp, n) - a / rsh - i


def ddm_residuals(p, v, i, temp):
    iph, isd1, rs, rsh, n1, isd2, n2 = p[0], p[1], p[2], p[3], p[4], p[5], p[6]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a = i * rs + v
        return iph - _diode(isd1, a, temp, n1) - _diode(isd2, a, temp, n2) - a / rsh - i


def module_residuals(p, v, i, temp, ns, np_):
    iph, isd, rs, rsh, n = p[0], p[1], p[2], p[3], p[4]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a = (i / np_) * rs + v / ns
        return iph * np_ - _diode(isd, a, temp, n) * np_ - a / (rsh / np_) - i


def rms(f):
    with np.errstate(over="ignore", invalid="ignore"):
        out = math.sqrt(float(np.dot(f, f)) / f.shape[0])
    if math.isinf(out) and np.all(np.isfinite(f)):
        s = float(np.max(np.abs(f)))
        g = f / s
        out = s * math.sqrt(float(np.dot(g, g)) / f.shape[0])
    return out


def sdm_rmse(p, v, i, temp):
    return rms(sdm_residuals(p, v, i, temp))


def ddm_rmse(p, v, i, temp):
    return rms(ddm_residuals(p, v, i, temp))


def module_rmse(p, v, i, temp, ns, np_):
    return rms(module_residuals(p, v, i, temp, ns, np_))


# -- chaotic sequences ------------------------------------------------------

def folc_weights(v, length):
    """Gamma(s+v) / (Gamma(v) Gamma(s+1)) for s < length, by recurrence."""
    c = np.empty(max(length, 1))
    c[0] = 1.0
    for s in range(1, length):
        c[s] = c[s - 1] * (s - 1 + v) / s
    return c


def folc_sequence(x0, mu, v, length):
    out = np.empty(length)
    if length == 0:
        return out
    c = folc_weights(v, length)
    rc = c[::-1].copy()
    g = np.empty(length)
    out[0] = x0
    g[0] = x0 * (1.0 - x0)
    for t in range(1, length):
        # running sum, left to right, like the compiled loop (a BLAS dot would
        # reorder it, and the map amplifies the difference)
        raw = x0 + mu * float(np.cumsum(rc[length - t:] * g[:t])[-1])
        y = raw - math.floor(raw)
        if y == 0.0:
            y = out[t - 1]
        out[t] = y
        g[t] = y * (1.0 - y)
    return out
