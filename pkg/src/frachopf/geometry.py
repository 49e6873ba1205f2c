"""Half-space geometry: reflections and the five-region partition.

Points are plain float64 arrays with the convention ``y = (y1, y')``:
the first coordinate is normal to the reflection plane, the remaining
n-1 coordinates are tangential.  For a fixed evaluation point at
distance ``delta`` from the plane, the half-space ``y1 > 0`` splits into

* ``A``     - slab next to the plane containing the evaluation point:
              ``0 <= y1 <= 2*delta``, ``|y'| < epsilon``;
* ``B``     - buffer cylinder ``2*delta <= y1 <= epsilon``, ``|y'| < epsilon``;
* ``OMEGA`` - bulk of the ball of radius ``R`` above the floor ``y1 > eta``,
              minus A and B;
* ``E``     - everything else (thin floor strip plus the far field);

with ``D = [1, 2] x {|y'| <= 1}`` a fixed witness box inside OMEGA.
Boundary ties are broken by the priority A > B > OMEGA > E.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import qmc


def as_point(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("a point is a 1-D array with at least one coordinate")
    return p


def reflect(p, lam: float) -> np.ndarray:
    """Mirror image of p across the plane y1 = lam."""
    q = as_point(p).copy()
    q[0] = 2.0 * lam - q[0]
    return q


def reflect_rows(P: np.ndarray, lam: float) -> np.ndarray:
    Q = np.array(P, dtype=float, copy=True)
    Q[:, 0] = 2.0 * lam - Q[:, 0]
    return Q


class RegionLabel(Enum):
    A = "A"
    B = "B"
    OMEGA = "Omega"
    E = "E"


@dataclass(frozen=True)
class RegionParams:
    """Partition geometry (delta, epsilon, R, eta).

    The admissibility constraints make the region algebra literally true:
    2*delta <= epsilon keeps A and B disjoint (up to their shared face),
    epsilon <= 1/2 and R >= 4 put the witness box D inside OMEGA, and
    eta <= delta keeps the OMEGA floor below the evaluation point.
    """

    delta: float
    epsilon: float
    R: float
    eta: float

    def __post_init__(self):
        if not (self.delta > 0 and self.epsilon > 0 and self.R > 0 and self.eta > 0):
            raise ValueError("all region parameters must be positive")
        if not 2.0 * self.delta <= self.epsilon:
            raise ValueError("need 2*delta <= epsilon")
        if not self.epsilon <= 0.5:
            raise ValueError("need epsilon <= 1/2")
        if not self.R >= 4.0:
            raise ValueError("need R >= 4")
        if not self.eta <= self.delta:
            raise ValueError("need eta <= delta")


def default_eta(delta: float) -> float:
    """Floor height tied to delta so it vanishes in the small-delta limit."""
    return 0.5 * delta


def make_region_params(delta, epsilon, R, eta=None) -> RegionParams:
    return RegionParams(delta, epsilon, R, default_eta(delta) if eta is None else eta)


def _tangential_norm(P: np.ndarray) -> np.ndarray:
    if P.shape[1] == 1:
        return np.zeros(P.shape[0])
    return np.sqrt(np.sum(P[:, 1:] ** 2, axis=1))


def in_core_box(P: np.ndarray) -> np.ndarray:
    """Membership in the witness box D = {1 <= y1 <= 2, |y'| <= 1}."""
    P = np.atleast_2d(P)
    return (P[:, 0] >= 1.0) & (P[:, 0] <= 2.0) & (_tangential_norm(P) <= 1.0)


def region_predicates(P: np.ndarray, params: RegionParams):
    """Raw A/B/OMEGA membership before tie-breaking (E is the complement)."""
    P = np.atleast_2d(P)
    y1 = P[:, 0]
    yt = _tangential_norm(P)
    rad = np.sqrt(np.sum(P * P, axis=1))
    in_a = (y1 <= 2.0 * params.delta) & (yt < params.epsilon)
    in_b = (y1 >= 2.0 * params.delta) & (y1 <= params.epsilon) & (yt < params.epsilon)
    in_omega = (rad < params.R) & (y1 > params.eta) & ~(in_a | in_b)
    return in_a, in_b, in_omega


def classify_rows(P: np.ndarray, params: RegionParams) -> np.ndarray:
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if np.any(P[:, 0] <= 0.0):
        raise ValueError("classification is defined on the open half-space y1 > 0")
    in_a, in_b, in_omega = region_predicates(P, params)
    out = np.full(P.shape[0], RegionLabel.E, dtype=object)
    out[in_omega] = RegionLabel.OMEGA
    out[in_b] = RegionLabel.B
    out[in_a] = RegionLabel.A
    return out


def classify(p, params: RegionParams) -> RegionLabel:
    return classify_rows(as_point(p)[None, :], params)[0]


@dataclass
class PartitionReport:
    counts: dict
    samples: int
    multi_label_points: list
    strip_all_e: bool
    volume_checks: list  # (region, expected_fraction, observed, sigma, ok)

    @property
    def ok(self) -> bool:
        return (not self.multi_label_points) and self.strip_all_e and all(
            c[4] for c in self.volume_checks
        )


def partition_check(params: RegionParams, samples: int, seed: int, n: int = 2) -> PartitionReport:
    """Sample the half-space ball of radius 2R and audit the partition.

    Draws seeded scrambled-Sobol points, verifies every sample matches at
    most one raw predicate, that the floor strip {0 < y1 <= eta} inside the
    ball (outside A) lands in E, and that sampled A/B frequencies agree with
    the closed-form box volumes within 3 sigma (n <= 2).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sob = qmc.Sobol(d=n, scramble=True, seed=seed)
    raw = sob.random(int(2 ** np.ceil(np.log2(max(samples * 3, 8)))))
    lo = np.array([0.0] + [-2.0 * params.R] * (n - 1))
    hi = np.array([2.0 * params.R] * n)
    pts = lo + raw * (hi - lo)
    keep = (np.sqrt(np.sum(pts * pts, axis=1)) < 2.0 * params.R) & (pts[:, 0] > 0)
    pts = pts[keep][:samples]

    in_a, in_b, in_omega = region_predicates(pts, params)
    nmatch = in_a.astype(int) + in_b.astype(int) + in_omega.astype(int)
    multi = [tuple(pt) for pt in pts[nmatch > 1]]

    labels = classify_rows(pts, params)
    counts = {lab: int(np.sum(labels == lab)) for lab in RegionLabel}
    counts["D"] = int(np.sum(in_core_box(pts)))

    # floor strip must be E: probe deterministic strip points inside the ball
    t = np.linspace(0.05, 0.95, 41)
    strip = np.zeros((t.size, n))
    strip[:, 0] = params.eta * t
    if n > 1:
        # keep clear of A: tangential norm beyond epsilon, inside the ball
        strip[:, 1] = params.epsilon + t * (0.9 * params.R - params.epsilon)
        strip_all_e = bool(np.all(classify_rows(strip, params) == RegionLabel.E))
    else:
        # n = 1 has no floor strip outside A; vacuously true
        strip_all_e = True

    volume_checks = []
    if n <= 2:
        cross = (2.0 * params.epsilon) ** (n - 1)
        vol_a = 2.0 * params.delta * cross
        vol_b = (params.epsilon - 2.0 * params.delta) * cross
        vol_domain = 2.0 * params.R if n == 1 else 0.5 * np.pi * (2.0 * params.R) ** 2
        m = pts.shape[0]
        for name, vol, cnt in (("A", vol_a, counts[RegionLabel.A]),
                               ("B", vol_b, counts[RegionLabel.B])):
            frac = vol / vol_domain
            sigma = np.sqrt(m * frac * (1.0 - frac))
            ok = abs(cnt - m * frac) <= 3.0 * sigma + 1.0
            volume_checks.append((name, frac, cnt / m, sigma / m, bool(ok)))

    return PartitionReport(counts, pts.shape[0], multi, strip_all_e, volume_checks)
