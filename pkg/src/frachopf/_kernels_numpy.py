"""Pure-numpy kernel lane.

Reference implementations of the hot integrand evaluations.  The numba
lane in ``_kernels_numba`` mirrors these row for row; cross-lane
agreement is pinned by tests.  All functions take points as (m, n)
float64 arrays and return (m,) values.
"""

import numpy as np

from . import _codes as C


def field_rows(code, par, P):
    P = np.atleast_2d(P)
    if code == C.CONST:
        return np.full(P.shape[0], par[0])
    if code == C.GAUSSIAN:
        d = P - par[2:2 + P.shape[1]]
        return par[0] * np.exp(-np.sum(d * d, axis=1) / (par[1] * par[1]))
    if code == C.BUBBLE:
        s = par[0]
        d = P - par[2:2 + P.shape[1]]
        return (s / (s * s + np.sum(d * d, axis=1))) ** par[1]
    if code == C.DEGENERATE:
        w2 = par[0] * par[0]
        return P[:, 0] ** 3 * np.exp(-np.sum(P * P, axis=1) / w2)
    if code == C.X1GAUSS:
        return par[0] * P[:, 0] * np.exp(-np.sum(P * P, axis=1) / (par[1] * par[1]))
    if code == C.LINEAR_X1:
        return P[:, 0].copy()
    if code == C.HALFCIRCLE:
        return np.sqrt(np.maximum(1.0 - P[:, 0] ** 2, 0.0))
    if code == C.POWBUMP:
        return par[0] * P[:, 0] ** (-par[1]) * np.exp(-np.sum(P * P, axis=1) / (par[2] * par[2]))
    raise ValueError(f"unknown field code {code}")


def _reflected(P, lam):
    Q = P.copy()
    Q[:, 0] = 2.0 * lam - P[:, 0]
    return Q


def w_rows(mode, code, par, lam, P):
    P = np.atleast_2d(P)
    if mode == C.W_DIRECT:
        return field_rows(code, par, P)
    return field_rows(code, par, _reflected(P, lam)) - field_rows(code, par, P)


def pair_kernel_rows(mode, code, par, lam, x, wx, Y, beta):
    """(|x-y|^-beta - |x-y0|^-beta) * (w(x) - w(y)), y0 the reflection of y about y1 = 0."""
    Y = np.atleast_2d(Y)
    d = Y - x
    r2 = np.sum(d * d, axis=1)
    d0 = _reflected(Y, 0.0) - x
    r02 = np.sum(d0 * d0, axis=1)
    kern = r2 ** (-0.5 * beta) - r02 ** (-0.5 * beta)
    return kern * (wx - w_rows(mode, code, par, lam, Y))


def near_ball_rows(mode, code, par, lam, x, wx, Z, beta):
    """Integrand of the kernel-difference integral on a ball centered at x.

    Both the singular near kernel and the smooth reflected kernel are
    paired over +-z, so the result is even in z and factor-2 radial lifts
    stay exact.
    """
    Z = np.atleast_2d(Z)
    r2 = np.sum(Z * Z, axis=1)
    Yp = x + Z
    Ym = x - Z
    wp = w_rows(mode, code, par, lam, Yp)
    wm = w_rows(mode, code, par, lam, Ym)
    sym = (2.0 * wx - wp - wm) / (2.0 * r2 ** (0.5 * beta))
    dp = _reflected(Yp, 0.0) - x
    dm = _reflected(Ym, 0.0) - x
    far_p = np.sum(dp * dp, axis=1) ** (-0.5 * beta)
    far_m = np.sum(dm * dm, axis=1) ** (-0.5 * beta)
    return sym - 0.5 * (far_p * (wx - wp) + far_m * (wx - wm))


def sym_diff_rows(code, par, x, ux, Z, beta):
    """(2 u(x) - u(x+z) - u(x-z)) / (2 |z|^beta)."""
    Z = np.atleast_2d(Z)
    r2 = np.sum(Z * Z, axis=1)
    up = field_rows(code, par, x + Z)
    um = field_rows(code, par, x - Z)
    return (2.0 * ux - up - um) / (2.0 * r2 ** (0.5 * beta))


def inv_dist_rows(x, V, beta):
    V = np.atleast_2d(V)
    d = V - x
    return np.sum(d * d, axis=1) ** (-0.5 * beta)
