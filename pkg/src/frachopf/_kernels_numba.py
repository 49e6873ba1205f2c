"""Numba-jit kernel lane: explicit loops over point rows.

Must stay numerically in lockstep with ``_kernels_numpy``; the test
suite asserts cross-lane agreement on seeded inputs.
"""

import math

import numpy as np
from numba import njit

from ._codes import (
    CONST, GAUSSIAN, BUBBLE, DEGENERATE, X1GAUSS, LINEAR_X1, HALFCIRCLE,
    POWBUMP, W_DIRECT,
)


@njit(cache=True, inline="always")
def _field_value(code, par, y):
    n = y.shape[0]
    if code == CONST:
        return par[0]
    if code == GAUSSIAN:
        s2 = 0.0
        for i in range(n):
            d = y[i] - par[2 + i]
            s2 += d * d
        return par[0] * math.exp(-s2 / (par[1] * par[1]))
    if code == BUBBLE:
        s = par[0]
        s2 = 0.0
        for i in range(n):
            d = y[i] - par[2 + i]
            s2 += d * d
        return (s / (s * s + s2)) ** par[1]
    if code == DEGENERATE:
        s2 = 0.0
        for i in range(n):
            s2 += y[i] * y[i]
        return y[0] ** 3 * math.exp(-s2 / (par[0] * par[0]))
    if code == X1GAUSS:
        s2 = 0.0
        for i in range(n):
            s2 += y[i] * y[i]
        return par[0] * y[0] * math.exp(-s2 / (par[1] * par[1]))
    if code == LINEAR_X1:
        return y[0]
    if code == HALFCIRCLE:
        v = 1.0 - y[0] * y[0]
        return math.sqrt(v) if v > 0.0 else 0.0
    if code == POWBUMP:
        s2 = 0.0
        for i in range(n):
            s2 += y[i] * y[i]
        return par[0] * y[0] ** (-par[1]) * math.exp(-s2 / (par[2] * par[2]))
    return np.nan


@njit(cache=True, inline="always")
def _w_value(mode, code, par, lam, y, tmp):
    if mode == W_DIRECT:
        return _field_value(code, par, y)
    for i in range(y.shape[0]):
        tmp[i] = y[i]
    tmp[0] = 2.0 * lam - y[0]
    return _field_value(code, par, tmp) - _field_value(code, par, y)


@njit(cache=True)
def field_rows(code, par, P):
    m = P.shape[0]
    out = np.empty(m)
    for r in range(m):
        out[r] = _field_value(code, par, P[r])
    return out


@njit(cache=True)
def w_rows(mode, code, par, lam, P):
    m = P.shape[0]
    out = np.empty(m)
    tmp = np.empty(P.shape[1])
    for r in range(m):
        out[r] = _w_value(mode, code, par, lam, P[r], tmp)
    return out


@njit(cache=True)
def pair_kernel_rows(mode, code, par, lam, x, wx, Y, beta):
    m = Y.shape[0]
    n = Y.shape[1]
    out = np.empty(m)
    tmp = np.empty(n)
    for r in range(m):
        r2 = 0.0
        r02 = 0.0
        for i in range(n):
            d = Y[r, i] - x[i]
            r2 += d * d
        d0 = -Y[r, 0] - x[0]
        r02 = d0 * d0
        for i in range(1, n):
            d = Y[r, i] - x[i]
            r02 += d * d
        kern = r2 ** (-0.5 * beta) - r02 ** (-0.5 * beta)
        out[r] = kern * (wx - _w_value(mode, code, par, lam, Y[r], tmp))
    return out


@njit(cache=True)
def near_ball_rows(mode, code, par, lam, x, wx, Z, beta):
    m = Z.shape[0]
    n = Z.shape[1]
    out = np.empty(m)
    yp = np.empty(n)
    ym = np.empty(n)
    tmp = np.empty(n)
    for r in range(m):
        r2 = 0.0
        for i in range(n):
            z = Z[r, i]
            r2 += z * z
            yp[i] = x[i] + z
            ym[i] = x[i] - z
        wp = _w_value(mode, code, par, lam, yp, tmp)
        wm = _w_value(mode, code, par, lam, ym, tmp)
        sym = (2.0 * wx - wp - wm) / (2.0 * r2 ** (0.5 * beta))
        dp = -yp[0] - x[0]
        rp2 = dp * dp
        dm = -ym[0] - x[0]
        rm2 = dm * dm
        for i in range(1, n):
            d = yp[i] - x[i]
            rp2 += d * d
            d = ym[i] - x[i]
            rm2 += d * d
        out[r] = sym - 0.5 * (rp2 ** (-0.5 * beta) * (wx - wp)
                              + rm2 ** (-0.5 * beta) * (wx - wm))
    return out


@njit(cache=True)
def sym_diff_rows(code, par, x, ux, Z, beta):
    m = Z.shape[0]
    n = Z.shape[1]
    out = np.empty(m)
    yp = np.empty(n)
    ym = np.empty(n)
    for r in range(m):
        r2 = 0.0
        for i in range(n):
            z = Z[r, i]
            r2 += z * z
            yp[i] = x[i] + z
            ym[i] = x[i] - z
        up = _field_value(code, par, yp)
        um = _field_value(code, par, ym)
        out[r] = (2.0 * ux - up - um) / (2.0 * r2 ** (0.5 * beta))
    return out


@njit(cache=True)
def inv_dist_rows(x, V, beta):
    m = V.shape[0]
    n = V.shape[1]
    out = np.empty(m)
    for r in range(m):
        r2 = 0.0
        for i in range(n):
            d = V[r, i] - x[i]
            r2 += d * d
        out[r] = r2 ** (-0.5 * beta)
    return out
