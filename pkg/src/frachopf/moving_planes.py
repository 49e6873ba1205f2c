"""Moving-planes driver: certify reflection dominance and locate the limit plane.

Given a scalar field u, the difference w_lam(y) = u(reflection of y) - u(y)
is tracked over a truncated grid on the half-space right of each plane
position.  Sliding the plane left for as long as the grid minimum stays
nonnegative locates the limiting position lambda_o by bisection; the
one-sided slope of w at the plane is the boundary check.
"""

from dataclasses import dataclass, field

import numpy as np

from .fields import AntiSymmetricField, ScalarField, make_w
from .geometry import as_point


class NoStartingPlane(RuntimeError):
    """The dominance certificate fails already at the right-most plane."""


@dataclass
class PlaneScanConfig:
    lambda_hi: float
    lambda_lo: float
    extent: float        # box size L covering the scan region
    spacing: float       # grid step h
    tolerance: float = 1e-6

    def __post_init__(self):
        if not self.lambda_hi > self.lambda_lo:
            raise ValueError("lambda_hi must exceed lambda_lo")
        if self.spacing <= 0 or self.extent <= 0:
            raise ValueError("spacing and extent must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")

    def validate_for(self, u: ScalarField):
        if self.extent < 10.0 * u.length_scale:
            raise ValueError("extent must cover at least 10 length scales")


@dataclass
class MovingPlaneReport:
    entries: list = field(default_factory=list)   # dicts: lambda, min, argmin, grad_norm
    lambda_o: float | None = None
    hopf_slopes: list = field(default_factory=list)
    truncation_note: str | None = None


def suggested_extent(u: ScalarField, tolerance: float, cap: float = 400.0):
    """Box size putting |u| below tolerance/10 outside, per decay metadata.

    Returns (extent, note); the note records when the cap truncates a
    heavy-tailed field, in which case exterior minima below the tolerance
    scale are missed by construction.
    """
    if u.support_radius is not None:
        need = 2.2 * u.support_radius
    elif np.isfinite(u.decay_exponent) and u.decay_exponent > 0:
        need = (10.0 * u.decay_scale / tolerance) ** (1.0 / u.decay_exponent)
    else:
        need = cap
    extent = max(10.0 * u.length_scale, min(need, cap))
    note = None
    if need > cap:
        note = (f"decay envelope reaches tolerance/10 only at {need:.3g}; "
                f"box truncated at {cap:.3g}, exterior minima below the "
                "tolerance scale are missed")
    return extent, note


def _grid(lam: float, config: PlaneScanConfig, n: int) -> np.ndarray:
    h = config.spacing
    m = int(np.ceil(config.extent / h))
    ax1 = lam + h * np.arange(1, m + 1)
    if n == 1:
        return ax1[:, None]
    axt = h * np.arange(-(m // 2), m // 2 + 1)
    mesh = np.meshgrid(ax1, *([axt] * (n - 1)), indexing="ij")
    return np.column_stack([g.ravel() for g in mesh])


def _descend(w: AntiSymmetricField, p0, val0, step: float, max_steps: int = 200):
    cur = np.array(p0, dtype=float)
    val = val0
    n = cur.size
    for _ in range(max_steps):
        cand = np.tile(cur, (2 * n, 1))
        for i in range(n):
            cand[2 * i, i] += step
            cand[2 * i + 1, i] -= step
        cand = cand[cand[:, 0] > w.plane]
        if cand.size == 0:
            break
        vals = w(cand)
        k = int(np.argmin(vals))
        if vals[k] < val:
            val = float(vals[k])
            cur = cand[k]
        else:
            break
    return val, cur


def min_scan(u: ScalarField, lam: float, config: PlaneScanConfig):
    """Grid minimum of w_lam over the truncated half-space, with refinement."""
    config.validate_for(u)
    w = make_w(u, lam)
    pts = _grid(lam, config, u.n)
    vals = w(pts)
    k = int(np.argmin(vals))
    val, arg = _descend(w, pts[k], float(vals[k]), config.spacing / 10.0)
    return val, arg


def find_lambda_o(u: ScalarField, config: PlaneScanConfig,
                  report: MovingPlaneReport | None = None) -> float:
    """Bisection for the left-most plane with a certified nonnegative minimum.

    The certificate at a trial plane also samples three positions above it;
    failure at lambda_hi raises :class:`NoStartingPlane`.
    """
    config.validate_for(u)
    rep = report if report is not None else MovingPlaneReport()

    def certified(lam):
        probes = [lam]
        if config.lambda_hi > lam:
            probes += [lam + k * (config.lambda_hi - lam) / 4.0 for k in (1, 2, 3)]
        ok = True
        for mu in probes:
            val, arg = min_scan(u, mu, config)
            w = make_w(u, mu)
            gnorm = float(np.linalg.norm(w.grad_at(arg)))
            rep.entries.append({"lambda": mu, "min": val, "argmin": tuple(arg),
                                "grad_norm": gnorm})
            if val < -config.tolerance:
                ok = False
                break
        return ok

    if not certified(config.lambda_hi):
        raise NoStartingPlane(
            f"minimum below -tolerance at lambda_hi = {config.lambda_hi}")

    lo, hi = config.lambda_lo, config.lambda_hi
    if certified(lo):
        rep.lambda_o = lo
        return lo
    target = config.spacing / 4.0
    while hi - lo > target:
        mid = 0.5 * (lo + hi)
        if certified(mid):
            hi = mid
        else:
            lo = mid
    rep.lambda_o = 0.5 * (lo + hi)
    return rep.lambda_o


def hopf_slope_check(w: AntiSymmetricField, plane_points, h: float) -> np.ndarray:
    """One-sided slope (w(lam + h, x') - 0) / h at points on the plane.

    w vanishes on the plane by anti-symmetry, so the difference quotient
    uses only the interior value.  Positivity is the caller's assertion.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    slopes = []
    for p in plane_points:
        p = as_point(p)
        if abs(p[0] - w.plane) > 1e-12:
            raise ValueError("slope points must sit on the plane")
        q = p.copy()
        q[0] = w.plane + h
        slopes.append(w.at(q) / h)
    return np.array(slopes)
