"""Adaptive panel quadrature over mapped parameter rectangles.

Every integral in the package is expressed as a list of *charts*: smooth
maps from the unit interval/square into the physical domain, carrying the
Jacobian.  Panels are refined greedily by a two-order Gauss-Legendre error
estimate until the summed estimate clears the tolerance or the evaluation
budget runs out.  The integrand is evaluated in batches of points, which is
where the numba/numpy kernel lanes plug in.
"""

import heapq
import itertools
from dataclasses import dataclass, field

import numpy as np

ORDER_LO_1D, ORDER_HI_1D = 8, 16
ORDER_LO_2D, ORDER_HI_2D = 6, 12

_RULES = {}


def gauss_rule(k: int):
    if k not in _RULES:
        x, w = np.polynomial.legendre.leggauss(k)
        _RULES[k] = (x, w)
    return _RULES[k]


@dataclass
class QuadSpec:
    """Tolerances and budget for one (possibly singular) integral."""

    inner_radius: float = 0.1
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    max_evals: int = 10_000_000
    far_cutoff: float = 50.0

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_evals < 1000:
            raise ValueError("max_evals must be at least 1e3")
        if self.inner_radius <= 0 or self.far_cutoff <= 0:
            raise ValueError("radii must be positive")


@dataclass
class QuadratureResult:
    value: float
    error_estimate: float
    evals: int
    converged: bool = True

    def __add__(self, other):
        if isinstance(other, QuadratureResult):
            return QuadratureResult(
                self.value + other.value,
                self.error_estimate + other.error_estimate,
                self.evals + other.evals,
                self.converged and other.converged,
            )
        return NotImplemented

    __radd__ = None


@dataclass
class Chart:
    """Smooth map [0,1]^dim -> R^n with Jacobian; breakpoints pre-split panels."""

    dim: int
    map_fn: object  # (m, dim) param rows -> (points (m, n), jacobian (m,))
    breakpoints: tuple = field(default_factory=tuple)  # per-dim interior knots


def interval_chart(a: float, b: float, breakpoints=()) -> Chart:
    a, b = float(a), float(b)
    scale = b - a

    def map_fn(T):
        y = a + scale * T[:, 0]
        return y[:, None], np.full(T.shape[0], scale)

    interior = tuple(sorted((t - a) / scale for t in breakpoints if a < t < b))
    return Chart(1, map_fn, (interior,))


def _tensor_value(chart, integrand, lo, hi, order):
    x, w = gauss_rule(order)
    half = 0.5 * (np.asarray(hi) - np.asarray(lo))
    mid = 0.5 * (np.asarray(hi) + np.asarray(lo))
    if chart.dim == 1:
        T = (mid[0] + half[0] * x)[:, None]
        W = w * half[0]
    else:
        s = mid[0] + half[0] * x
        t = mid[1] + half[1] * x
        S, Tt = np.meshgrid(s, t, indexing="ij")
        T = np.column_stack([S.ravel(), Tt.ravel()])
        W = np.multiply.outer(w, w).ravel() * (half[0] * half[1])
    pts, jac = chart.map_fn(T)
    vals = integrand(np.ascontiguousarray(pts))
    return float(np.dot(W * jac, vals)), T.shape[0]


def _eval_panel(chart, integrand, lo, hi):
    o_lo = ORDER_LO_1D if chart.dim == 1 else ORDER_LO_2D
    o_hi = ORDER_HI_1D if chart.dim == 1 else ORDER_HI_2D
    v0, m0 = _tensor_value(chart, integrand, lo, hi, o_lo)
    v1, m1 = _tensor_value(chart, integrand, lo, hi, o_hi)
    return v1, abs(v1 - v0), m0 + m1


_MIN_WIDTH = 1e-12


def integrate_charts(charts, integrand, spec: QuadSpec,
                     rel_tol=None, abs_tol=None, max_evals=None) -> QuadratureResult:
    """Adaptively integrate ``integrand`` over the union of charts."""
    rel = spec.rel_tol if rel_tol is None else rel_tol
    abst = spec.abs_tol if abs_tol is None else abs_tol
    budget = spec.max_evals if max_evals is None else max_evals

    panels = {}
    heap = []
    counter = itertools.count()
    evals = 0
    run_value = 0.0
    run_err = 0.0

    def push(ci, lo, hi):
        nonlocal evals, run_value, run_err
        v, e, m = _eval_panel(charts[ci], integrand, lo, hi)
        evals += m
        key = next(counter)
        panels[key] = (ci, lo, hi, v, e)
        run_value += v
        run_err += e
        if max(h - l for l, h in zip(lo, hi)) > _MIN_WIDTH:
            heapq.heappush(heap, (-e, key))

    for ci, ch in enumerate(charts):
        grids = []
        for d in range(ch.dim):
            bps = ch.breakpoints[d] if d < len(ch.breakpoints) else ()
            grids.append([0.0] + list(bps) + [1.0])
        for cell in itertools.product(*(zip(g[:-1], g[1:]) for g in grids)):
            lo = tuple(c[0] for c in cell)
            hi = tuple(c[1] for c in cell)
            push(ci, lo, hi)

    while heap and evals < budget:
        if run_err <= max(abst, rel * abs(run_value)):
            break
        _, key = heapq.heappop(heap)
        if key not in panels:
            continue  # already split
        ci, lo, hi, v, e = panels.pop(key)
        run_value -= v
        run_err -= e
        d = int(np.argmax([h - l for l, h in zip(lo, hi)]))
        mid = 0.5 * (lo[d] + hi[d])
        lo2 = list(lo)
        hi2 = list(hi)
        lo2[d], hi2[d] = mid, mid
        push(ci, lo, tuple(hi2))
        push(ci, tuple(lo2), hi)

    # exact final sums (the running totals accumulate float drift)
    value = float(sum(p[3] for p in panels.values()))
    err = float(sum(p[4] for p in panels.values()))
    converged = err <= max(abst, rel * abs(value))
    return QuadratureResult(value, err, evals, converged)


def geometric_edges(r0: float, r1: float, ratio: float = 2.0):
    """Shell edges r0 < ... < r1 growing geometrically."""
    edges = [r0]
    r = r0
    while r * ratio < r1:
        r *= ratio
        edges.append(r)
    edges.append(r1)
    return edges
