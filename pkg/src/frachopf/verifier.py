"""Reconstruction of the sign argument along a shrinking-distance scan.

For an anti-symmetric field that is pinned flat at the plane (value,
first and second normal derivatives all zero), the half-space integral of
the paired kernel at x = (delta, 0, ...) must eventually go below
``-(c1/2) delta`` for a fitted constant c1 > 0 extracted from the witness
box, while the reflected-kernel tail term scales like delta^(3-alpha).
The scan measures every region integral over a decreasing delta grid,
fits the constants and slopes, and renders one verdict per estimate.
"""

from dataclasses import dataclass, field

import numpy as np

from .fields import AntiSymmetricField, CoefficientField
from .geometry import RegionParams, default_eta
from .halfspace import i1_region_integral, i2_tail_factor, region_map
from .integrate import QuadSpec, QuadratureResult
from .quadrature import check_alpha, normalization_constant

ESTIMATE_IDS = ("E1_D", "E2_A", "E3_B", "E4_AB", "E5_E", "KEY_E", "KEY_E1",
                "CONTRADICTION")

PREDICTED_FORMS = {
    "E1_D": "<= -c1*delta, c1 > 0 stable in delta and epsilon",
    "E2_A": "|.| <= c2*max(eps^(2-a), delta^(2-a), delta)*delta",
    "E3_B": "|.| <= c3*eps^(2-a)*delta",
    "E4_AB": "|.| <= (c1/4)*delta",
    "E5_E": "|.| <= (c1/4)*delta",
    "KEY_E": "total <= -(c1/2)*delta",
    "KEY_E1": "tail term = O(delta^(3-a)): fitted slope >= 3-a-0.2",
    "CONTRADICTION": "operator value + c*w <= -(c1/4)*delta below delta*",
}


@dataclass(frozen=True)
class EstimateSpec:
    estimate_id: str
    predicted_form: str

    def __post_init__(self):
        if self.estimate_id not in ESTIMATE_IDS:
            raise ValueError(f"unknown estimate id {self.estimate_id!r}")
        if self.predicted_form != PREDICTED_FORMS[self.estimate_id]:
            raise ValueError("predicted form does not match the catalog")


def estimate_catalog():
    return [EstimateSpec(eid, PREDICTED_FORMS[eid]) for eid in ESTIMATE_IDS]


@dataclass
class ScanRow:
    delta: float
    eta: float
    x: tuple
    w_at_x: float
    regions: dict          # D, A, B, Omega, E -> QuadratureResult
    total: QuadratureResult
    i2_factor: float
    i2_term: float
    flap: float            # Cna * (total + i2_term)
    cw_term: float
    additivity_gap: float
    converged: bool


@dataclass
class DecompositionReport:
    n: int
    alpha: float
    epsilon: float
    R: float
    eta_rule: str
    field_name: str
    coefficient_name: str
    rows: list = field(default_factory=list)
    offaxis: list = field(default_factory=list)

    def converged_rows(self):
        return [r for r in self.rows if r.converged]


@dataclass
class EstimateVerdict:
    estimate_id: str
    passed: bool
    vacuous: bool = False
    details: dict = field(default_factory=dict)


@dataclass
class VerifyOutcome:
    verdicts: list
    fitted: dict
    overall: bool
    vacuous: bool

    def verdict(self, estimate_id) -> EstimateVerdict:
        for v in self.verdicts:
            if v.estimate_id == estimate_id:
                return v
        raise KeyError(estimate_id)


@dataclass
class ContradictionVerdict:
    passed: bool
    inconclusive: bool
    delta_star: float | None
    c1: float | None
    margins: list
    hypothesis_ok: bool
    degenerate_ok: bool
    diagnostics: dict


def _scan_row(w, alpha, epsilon, R, delta, spec, coeff):
    params = RegionParams(delta, epsilon, R, default_eta(delta))
    n = w.n
    x = np.zeros(n)
    x[0] = delta
    regions = region_map(w, x, alpha, params, spec)
    total = i1_region_integral(w, x, alpha, "Sigma", spec)
    wx = w.at(x)
    i2f = i2_tail_factor(n, alpha, delta)
    i2_term = 2.0 * wx * i2f
    cna = normalization_constant(n, alpha)
    flap = cna * (total.value + i2_term)
    cw = coeff.at(x) * wx if coeff is not None else 0.0
    part_sum = sum(regions[k].value for k in ("A", "B", "Omega", "E"))
    converged = total.converged and all(r.converged for r in regions.values())
    return ScanRow(delta, params.eta, tuple(x), wx, regions, total, i2f,
                   i2_term, flap, cw, abs(part_sum - total.value), converged)


def delta_scan(w: AntiSymmetricField, alpha: float, epsilon: float, R: float,
               delta_grid, spec: QuadSpec | None = None,
               coefficient: CoefficientField | None = None,
               jobs: int = 1, offaxis: bool = True) -> DecompositionReport:
    """Region integrals at x = (delta, 0, ...) over a decreasing delta grid.

    The floor height follows eta = delta/2; epsilon and R stay fixed.
    Non-converged quadrature flags its row and the scan continues.
    """
    alpha = check_alpha(alpha)
    spec = spec or QuadSpec()
    deltas = [float(d) for d in delta_grid]
    if len(deltas) < 6:
        raise ValueError("the scan needs at least 6 delta values")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta grid must be strictly decreasing")
    if deltas[0] > 0.5 * epsilon:
        raise ValueError("largest delta must stay below epsilon/2")

    report = DecompositionReport(
        w.n, alpha, epsilon, R, "eta = delta/2", w.name,
        coefficient.name if coefficient is not None else "none")

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as ex:
            report.rows = list(ex.map(
                lambda d: _scan_row(w, alpha, epsilon, R, d, spec, coefficient),
                deltas))
    else:
        report.rows = [_scan_row(w, alpha, epsilon, R, d, spec, coefficient)
                       for d in deltas]

    if offaxis and w.n >= 2:
        d = deltas[-1]
        for shift in (0.3 * epsilon, -0.17 * epsilon):
            x = np.zeros(w.n)
            x[0] = d
            x[1] = shift
            tot = i1_region_integral(w, x, alpha, "Sigma", spec)
            report.offaxis.append({
                "x": tuple(x), "total": tot.value, "error": tot.error_estimate,
                "negative": bool(tot.value < 0.0),
            })
    return report


class FitSignChange(ValueError):
    """Raised when a log-log fit is requested across a sign change."""

    def __init__(self, signs):
        self.signs = signs
        super().__init__(f"values change sign across the grid: {signs}")


def fit_exponent(points):
    """Least-squares slope of log|value| against log(delta).

    Returns (slope, intercept, confidence) with confidence the maximum
    absolute residual of the fit.
    """
    pts = [(float(d), float(v)) for d, v in points]
    if len(pts) < 4:
        raise ValueError("need at least 4 points to fit an exponent")
    values = np.array([v for _, v in pts])
    if np.any(values == 0.0):
        raise ValueError("cannot fit a power law through zero values")
    signs = np.sign(values)
    if not np.all(signs == signs[0]):
        raise FitSignChange([int(s) for s in signs])
    lx = np.log([d for d, _ in pts])
    ly = np.log(np.abs(values))
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    residual = ly - (slope * lx + intercept)
    return float(slope), float(intercept), float(np.max(np.abs(residual)))


def _ratio_stable(values, tol=0.25):
    lo, hi = min(values), max(values)
    mid = np.mean(values)
    return bool(mid != 0.0 and (hi - lo) / abs(mid) <= tol)


def verify_estimates(report: DecompositionReport, alpha: float,
                     params: RegionParams | None = None) -> VerifyOutcome:
    """Render one verdict per estimate from a finished scan."""
    alpha = check_alpha(alpha)
    eps = report.epsilon
    rows = report.converged_rows()
    if len(rows) < 6:
        raise ValueError("need at least 6 converged scan rows")
    rows = sorted(rows, key=lambda r: -r.delta)
    last3 = rows[-3:]

    scale = max(max(abs(r.total.value) for r in rows),
                max(abs(r.w_at_x) for r in rows))
    if scale < 1e-250:
        verdicts = [EstimateVerdict(eid, False, vacuous=True,
                                    details={"note": "all quantities vanish"})
                    for eid in ESTIMATE_IDS if eid != "CONTRADICTION"]
        return VerifyOutcome(verdicts, {}, False, True)

    fitted = {}
    verdicts = []

    # witness box: strictly negative with a stable linear-rate constant
    c1_hats = [-r.regions["D"].value / r.delta for r in rows]
    neg_ok = all(r.regions["D"].value < 0.0 for r in rows)
    stable = _ratio_stable(c1_hats[-3:])
    c1 = float(np.mean(c1_hats[-3:]))
    fitted["c1"] = c1
    fitted["c1_per_row"] = c1_hats
    verdicts.append(EstimateVerdict(
        "E1_D", bool(neg_ok and stable and c1 > 0.0),
        details={"c1": c1, "all_negative": neg_ok, "stable_25pct": stable}))

    # slab next to the plane: bounded constant against the three-branch factor,
    # certified by the measured decay rate |A| = O(delta) or faster
    def a_factor(d):
        return max(eps ** (2.0 - alpha), d ** (2.0 - alpha), d) * d

    def a_branch(d):
        vals = {"eps^(2-a)": eps ** (2.0 - alpha),
                "delta^(2-a)": d ** (2.0 - alpha), "delta": d}
        return max(vals, key=vals.get)

    def _bound_verdict(eid, values, factor_fn, const_key, extra=None):
        hats = [abs(v) / factor_fn(r.delta) for v, r in zip(values, rows)]
        const = max(hats)
        fitted[const_key] = const
        # the O(delta) claim is asymptotic: fit on the smallest scanned deltas
        k = max(4, len(rows) // 2)
        try:
            slope, _, _ = fit_exponent(
                [(r.delta, v) for v, r in zip(values[-k:], rows[-k:]) if v != 0.0])
            slope_ok = slope >= 0.8
        except (FitSignChange, ValueError):
            # sign changes or exact zeros mean the term is already negligible
            slope, slope_ok = None, all(abs(v) <= 1e3 * spec_floor for v in values)
        details = {const_key: const, "slope": slope}
        if extra:
            details.update(extra)
        verdicts.append(EstimateVerdict(eid, bool(slope_ok), details=details))

    spec_floor = 1e-250 * scale
    _bound_verdict("E2_A", [r.regions["A"].value for r in rows], a_factor, "c2",
                   extra={"active_branch": [a_branch(r.delta) for r in last3]})
    _bound_verdict("E3_B", [r.regions["B"].value for r in rows],
                   lambda d: eps ** (2.0 - alpha) * d, "c3")

    # combined slab+buffer and far-field smallness against c1/4
    ab_ok = all(abs(r.regions["A"].value + r.regions["B"].value)
                <= 0.25 * c1 * r.delta for r in last3)
    verdicts.append(EstimateVerdict("E4_AB", bool(ab_ok and c1 > 0),
                                    details={"bound": "c1/4 * delta"}))
    e_ok = all(abs(r.regions["E"].value) <= 0.25 * c1 * r.delta for r in last3)
    verdicts.append(EstimateVerdict("E5_E", bool(e_ok and c1 > 0),
                                    details={"bound": "c1/4 * delta"}))

    # combined sign bound on every converged row
    key_ok = all(r.total.value <= -0.5 * c1 * r.delta for r in rows)
    verdicts.append(EstimateVerdict(
        "KEY_E", bool(key_ok and c1 > 0),
        details={"margins": [(-0.5 * c1 * r.delta) - r.total.value for r in rows]}))

    # tail-term slope
    try:
        slope, intercept, conf = fit_exponent(
            [(r.delta, r.i2_term) for r in rows])
        slope_ok = slope >= 3.0 - alpha - 0.2
        fitted["i2_slope"] = slope
        fitted["i2_slope_confidence"] = conf
        verdicts.append(EstimateVerdict(
            "KEY_E1", bool(slope_ok),
            details={"slope": slope, "required": 3.0 - alpha - 0.2,
                     "confidence": conf}))
    except (FitSignChange, ValueError) as exc:
        verdicts.append(EstimateVerdict("KEY_E1", False,
                                        details={"fit_error": str(exc)}))

    overall = all(v.passed for v in verdicts)
    return VerifyOutcome(verdicts, fitted, overall, False)


def _degeneracy_check(w, h=1e-4, tol=1e-6):
    """First and second normal derivatives at the plane, by one-sided stencils."""
    n = w.n
    x0 = np.zeros(n)

    def at(t):
        p = x0.copy()
        p[0] = t
        return w.at(p)

    d1 = (at(h) - at(0.0)) / h
    d2 = (at(2 * h) - 2 * at(h) + at(0.0)) / (h * h)
    scale = max(abs(w.decay_scale), 1.0)
    # anti-symmetry makes d2 vanish for any smooth w; the discriminating
    # quantity is d1, with d2 kept as an O(h)-level sanity bound
    return abs(d1) <= tol * scale and abs(d2) <= 100.0 * h * scale, d1, d2


def contradiction_check(w: AntiSymmetricField, coefficient: CoefficientField | None,
                        alpha: float, delta_grid, spec: QuadSpec | None = None,
                        epsilon: float = 0.25, R: float = 4.0,
                        report: DecompositionReport | None = None) -> ContradictionVerdict:
    """Search for the threshold below which the equation cannot hold.

    Passing means: the coefficient respects the sampled boundary-growth
    hypothesis, the field is pinned flat at the plane, and the measured
    operator value plus c*w stays below -(c1/4)*delta for every scanned
    delta below a reported threshold delta*.
    """
    alpha = check_alpha(alpha)
    deltas = sorted((float(d) for d in delta_grid), reverse=True)

    degenerate_ok, d1, d2 = _degeneracy_check(w)

    if coefficient is None:
        hypothesis_ok = True
        kappas = [0.0 for _ in deltas]
    else:
        kappas = list(coefficient.boundary_rate(deltas))
        finite = [k for k in kappas if np.isfinite(k)]
        if not finite:
            hypothesis_ok = False
        else:
            hypothesis_ok = (kappas[-1] < 0.5 * kappas[0] + 1e-30
                             or max(finite) < 1e-14)

    if report is None:
        report = delta_scan(w, alpha, epsilon, R, deltas, spec, coefficient)
    rows = sorted(report.converged_rows(), key=lambda r: -r.delta)

    diagnostics = {
        "plane_first_derivative": d1, "plane_second_derivative": d2,
        "kappa": kappas, "n_converged": len(rows),
    }
    if len(rows) < 4:
        return ContradictionVerdict(False, True, None, None, [], hypothesis_ok,
                                    degenerate_ok,
                                    dict(diagnostics, reason="too few converged rows"))

    c1_hats = [-r.regions["D"].value / r.delta for r in rows]
    c1 = float(np.mean(c1_hats[-3:]))
    margins = []
    for r in rows:
        lhs = r.flap + r.cw_term
        margins.append({"delta": r.delta, "lhs": lhs,
                        "bound": -0.25 * c1 * r.delta,
                        "holds": bool(lhs <= -0.25 * c1 * r.delta)})
    diagnostics["c1_per_row"] = c1_hats

    if c1 <= 0 or not degenerate_ok or not hypothesis_ok:
        reason = ("coefficient violates the boundary-growth hypothesis"
                  if not hypothesis_ok else
                  "field is not pinned flat at the plane" if not degenerate_ok
                  else "witness-box constant is not positive")
        return ContradictionVerdict(False, True, None, c1, margins,
                                    hypothesis_ok, degenerate_ok,
                                    dict(diagnostics, reason=reason))

    delta_star = None
    for k, m in enumerate(margins):
        if all(mm["holds"] for mm in margins[k:]):
            delta_star = m["delta"]
            break
    if delta_star is None:
        return ContradictionVerdict(False, True, None, c1, margins,
                                    hypothesis_ok, degenerate_ok,
                                    dict(diagnostics,
                                         reason="no threshold found within the grid"))
    return ContradictionVerdict(True, False, delta_star, c1, margins,
                                hypothesis_ok, degenerate_ok, diagnostics)


def geometric_delta_grid(delta_max: float, ratio: float, count: int):
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    if count < 6:
        raise ValueError("need at least 6 scan points")
    return [delta_max * ratio ** k for k in range(count)]


def headline_config(n: int, alpha: float) -> dict:
    """Calibrated desk-scale scan parameters per (n, alpha).

    The buffer-cylinder constant grows as alpha -> 2, so the slab width
    epsilon that makes the combined slab+buffer term beat c1/4 shrinks; a
    wider witness bump raises c1 and keeps epsilon at sane scales.  The
    absolute tolerance tracks the size of the scanned integrals.
    """
    alpha = check_alpha(alpha)
    if alpha < 1.0:
        eps = 0.125 if n == 1 else 0.08
        return {"width": 1.0, "epsilon": eps, "R": 4.0,
                "delta_max": 0.16 * eps, "ratio": 0.66, "count": 8,
                "abs_tol": 1e-12 if n > 1 else 1e-9}
    return {"width": 2.5, "epsilon": 1e-3, "R": 4.0,
            "delta_max": 5e-5, "ratio": 0.66, "count": 8,
            "abs_tol": 1e-13}
