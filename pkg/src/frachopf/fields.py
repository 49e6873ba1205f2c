"""Evaluatable scalar fields, anti-symmetric fields, and coefficient fields.

A field evaluates on (m, n) arrays of points and carries the metadata the
integrators need: a decay envelope ``|u(y)| <= C (1+|y|)^(-p)`` (or a
numerical support radius for super-exponentially decaying profiles), a
length scale, and a smoothness tag.  Catalog fields also carry an integer
descriptor so the jit kernel lane can evaluate them inside hot loops; see
``_codes``.
"""

import math
import re

import numpy as np

from . import _codes as C
from . import _kernels_numpy as _np_lane
from .geometry import as_point, reflect_rows

SMOOTHNESS_ORDER = {"C0": 0, "C1": 1, "C2": 2, "C3": 3, "Cinf": 99}


class ScalarField:
    """A function R^n -> R with evaluation metadata.

    ``eval_vec`` maps an (m, n) float64 array to (m,) values.  When
    ``descriptor`` is set the field belongs to the closed catalog and hot
    loops evaluate it through the active kernel lane instead.
    """

    def __init__(self, n, eval_vec, name="field", descriptor=None,
                 decay_exponent=0.0, decay_scale=1.0, length_scale=1.0,
                 smoothness="Cinf", support_radius=None, grad_vec=None):
        self.n = int(n)
        self.eval_vec = eval_vec
        self.name = name
        self.descriptor = descriptor  # (code, par) or None
        self.decay_exponent = float(decay_exponent)
        self.decay_scale = float(decay_scale)
        self.length_scale = float(length_scale)
        self.smoothness = smoothness
        self.support_radius = support_radius
        self.grad_vec = grad_vec

    def __call__(self, P):
        P = np.atleast_2d(np.asarray(P, dtype=float))
        return self.eval_vec(P)

    def at(self, p) -> float:
        return float(self(as_point(p)[None, :])[0])

    def grad_at(self, p) -> np.ndarray:
        """Gradient, analytic when provided, else O(h^2) central differences."""
        p = as_point(p)
        if self.grad_vec is not None:
            return self.grad_vec(p[None, :])[0]
        h = 1e-4 * (1.0 + np.linalg.norm(p))
        g = np.empty(self.n)
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = h
            g[i] = (self.at(p + e) - self.at(p - e)) / (2.0 * h)
        return g

    def scaled(self, factor: float) -> "ScalarField":
        """The field y -> u(factor * y) (loses the jit descriptor)."""
        f = float(factor)
        grow = max(1.0, 1.0 / abs(f))
        return ScalarField(
            self.n, lambda P, u=self.eval_vec: u(f * P),
            name=f"{self.name}@scale{f}",
            decay_exponent=self.decay_exponent,
            decay_scale=self.decay_scale * grow ** self.decay_exponent
            if np.isfinite(self.decay_exponent) else self.decay_scale,
            length_scale=self.length_scale / abs(f),
            smoothness=self.smoothness,
            support_radius=None if self.support_radius is None else self.support_radius / abs(f),
        )

    def __add__(self, other):
        if isinstance(other, ScalarField):
            if other.n != self.n:
                raise ValueError("dimension mismatch")
            return ScalarField(
                self.n,
                lambda P, a=self.eval_vec, b=other.eval_vec: a(P) + b(P),
                name=f"{self.name}+{other.name}",
                decay_exponent=min(self.decay_exponent, other.decay_exponent),
                decay_scale=self.decay_scale + other.decay_scale,
                length_scale=max(self.length_scale, other.length_scale),
                smoothness=min(self.smoothness, other.smoothness, key=SMOOTHNESS_ORDER.get),
                support_radius=None if (self.support_radius is None or other.support_radius is None)
                else max(self.support_radius, other.support_radius),
            )
        return NotImplemented

    def __mul__(self, scalar):
        a = float(scalar)
        return ScalarField(
            self.n, lambda P, u=self.eval_vec: a * u(P),
            name=f"{a}*{self.name}",
            decay_exponent=self.decay_exponent,
            decay_scale=abs(a) * self.decay_scale,
            length_scale=self.length_scale,
            smoothness=self.smoothness,
            support_radius=self.support_radius,
        )

    __rmul__ = __mul__

    def __repr__(self):
        return f"<ScalarField {self.name} n={self.n}>"


class AntiSymmetricField(ScalarField):
    """A field with w(reflect(y, plane)) = -w(y).

    ``wdesc = (mode, code, par, plane)`` lets the kernel lanes evaluate w
    without Python callbacks: mode 0 means the coded field is w itself,
    mode 1 means w = u(reflect(y, plane)) - u(y) for a coded base u.
    """

    def __init__(self, n, eval_vec, plane, name="w", wdesc=None, base=None, **kw):
        desc = None
        if wdesc is not None and wdesc[0] == C.W_DIRECT:
            desc = (wdesc[1], wdesc[2])
        super().__init__(n, eval_vec, name=name, descriptor=desc, **kw)
        self.plane = float(plane)
        self.wdesc = wdesc
        self.base = base


# numerical support of exp(-r^2/s^2): below 1e-300 past ~26.3 s
_GAUSS_SUPPORT = math.sqrt(300.0 * math.log(10.0))

_DIRS_CACHE = {}


def _probe_directions(n, m=24):
    if n == 1:
        return np.array([[1.0], [-1.0]])
    key = (n, m)
    if key not in _DIRS_CACHE:
        rng = np.random.default_rng(20240817)
        d = rng.normal(size=(m, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        _DIRS_CACHE[key] = np.vstack([np.eye(n), -np.eye(n), d])
    return _DIRS_CACHE[key]


def estimate_decay_scale(eval_vec, n, p, r_max, safety=1.25) -> float:
    """Numerically bound C in |u(y)| <= C (1+|y|)^(-p) over radial probes."""
    dirs = _probe_directions(n)
    radii = np.concatenate([[0.0], np.logspace(-2, np.log10(max(r_max, 1.0)), 48)])
    best = 0.0
    for r in radii:
        vals = np.abs(eval_vec(r * dirs))
        best = max(best, float(np.max(vals)) * (1.0 + r) ** p)
    return safety * best


def constant_field(n, value) -> ScalarField:
    par = np.array([float(value)])
    return ScalarField(
        n, lambda P: _np_lane.field_rows(C.CONST, par, P),
        name=f"constant({value})", descriptor=(C.CONST, par),
        decay_exponent=0.0, decay_scale=abs(float(value)), length_scale=1.0)


def linear_x1(n) -> ScalarField:
    par = np.zeros(0)
    return ScalarField(
        n, lambda P: _np_lane.field_rows(C.LINEAR_X1, par, P),
        name="linear_x1", descriptor=(C.LINEAR_X1, par),
        decay_exponent=0.0, decay_scale=np.inf, length_scale=1.0)


def _center_array(center, n):
    c = np.zeros(n)
    if center is not None:
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if center.size == 1:
            c[0] = center[0]
        elif center.size == n:
            c[:] = center
        else:
            raise ValueError("center must be a scalar or an n-vector")
    return c


def gaussian(n, center=None, scale=1.0, amp=1.0) -> ScalarField:
    if scale <= 0:
        raise ValueError("scale must be positive")
    c = _center_array(center, n)
    par = np.concatenate([[float(amp), float(scale)], c])
    return ScalarField(
        n, lambda P: _np_lane.field_rows(C.GAUSSIAN, par, P),
        name=f"gaussian(scale={scale})", descriptor=(C.GAUSSIAN, par),
        decay_exponent=np.inf, decay_scale=abs(amp), length_scale=scale,
        support_radius=float(np.linalg.norm(c)) + _GAUSS_SUPPORT * scale)


def standard_bubble(n, alpha, center=None, scale=1.0) -> ScalarField:
    """Radial profile (s / (s^2 + |y-c|^2))^((n-alpha)/2), decay n - alpha."""
    if not ((0.0 < alpha < 2.0 <= n) or (n == 1 and 0.0 < alpha < 1.0)):
        raise ValueError(f"invalid bubble parameters n={n}, alpha={alpha}")
    if scale <= 0:
        raise ValueError("scale must be positive")
    c = _center_array(center, n)
    q = 0.5 * (n - alpha)
    par = np.concatenate([[float(scale), q], c])
    ev = lambda P: _np_lane.field_rows(C.BUBBLE, par, P)
    p = n - alpha
    return ScalarField(
        n, ev, name=f"standard_bubble(alpha={alpha})", descriptor=(C.BUBBLE, par),
        decay_exponent=p,
        decay_scale=estimate_decay_scale(ev, n, p, 1e6 * scale),
        length_scale=scale)


def halfcircle() -> ScalarField:
    """u(y) = sqrt(max(1 - y^2, 0)) on the line; compactly supported."""
    par = np.zeros(0)
    return ScalarField(
        1, lambda P: _np_lane.field_rows(C.HALFCIRCLE, par, P),
        name="halfcircle", descriptor=(C.HALFCIRCLE, par),
        decay_exponent=np.inf, decay_scale=1.0, length_scale=1.0,
        smoothness="C0", support_radius=1.0)


def make_w(u: ScalarField, lam: float) -> AntiSymmetricField:
    """w(y) = u(reflect(y, lam)) - u(y); anti-symmetric by construction."""
    lam = float(lam)

    def ev(P, base=u.eval_vec, lam=lam):
        return base(reflect_rows(P, lam)) - base(P)

    wdesc = None
    if u.descriptor is not None:
        wdesc = (C.W_REFLECT, u.descriptor[0], u.descriptor[1], lam)
    if u.support_radius is not None:
        support = u.support_radius + 2.0 * abs(lam)
        p, scale = np.inf, u.decay_scale
    else:
        support = None
        p = u.decay_exponent
        scale = estimate_decay_scale(ev, u.n, p, 1e6 * u.length_scale) \
            if np.isfinite(p) and p > 0 else 2.0 * u.decay_scale
    return AntiSymmetricField(
        u.n, ev, lam, name=f"make_w({u.name},lam={lam})", wdesc=wdesc, base=u,
        decay_exponent=p, decay_scale=scale, length_scale=u.length_scale,
        smoothness=u.smoothness, support_radius=support)


def degenerate_w(n, width=1.0) -> AntiSymmetricField:
    """w = y1^3 * bump(|y|), pinned flat at the plane.

    Positive on the half-space, anti-symmetric about y1 = 0, with first and
    second normal derivatives exactly zero on the plane and w growing like
    the cube of the distance to it.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    par = np.array([float(width)])
    return AntiSymmetricField(
        n, lambda P: _np_lane.field_rows(C.DEGENERATE, par, P),
        0.0, name=f"degenerate_w(width={width})",
        wdesc=(C.W_DIRECT, C.DEGENERATE, par, 0.0),
        decay_exponent=np.inf, decay_scale=width ** 3, length_scale=width,
        support_radius=_GAUSS_SUPPORT * width * 1.5)


def x1_gaussian(n, scale=1.0, amp=1.0) -> AntiSymmetricField:
    """w = y1 * exp(-|y|^2 / scale^2): strictly positive slope at the plane."""
    par = np.array([float(amp), float(scale)])
    return AntiSymmetricField(
        n, lambda P: _np_lane.field_rows(C.X1GAUSS, par, P),
        0.0, name="x1_gaussian", wdesc=(C.W_DIRECT, C.X1GAUSS, par, 0.0),
        decay_exponent=np.inf, decay_scale=abs(amp) * scale, length_scale=scale,
        support_radius=_GAUSS_SUPPORT * scale * 1.5)


class CoefficientField:
    """Zeroth-order coefficient with a sampled boundary growth rate."""

    def __init__(self, n, eval_vec, name="c"):
        self.n = int(n)
        self.eval_vec = eval_vec
        self.name = name

    def __call__(self, P):
        return self.eval_vec(np.atleast_2d(np.asarray(P, dtype=float)))

    def at(self, p) -> float:
        return float(self(as_point(p)[None, :])[0])

    def boundary_rate(self, deltas, extent=2.0, samples=33) -> np.ndarray:
        """kappa(delta) = delta^2 * sup |c| sampled on the slab y1 = delta."""
        deltas = np.asarray(deltas, dtype=float)
        out = np.empty(deltas.size)
        for k, d in enumerate(deltas):
            pts = np.zeros((samples, self.n))
            pts[:, 0] = d
            if self.n > 1:
                pts[:, 1] = np.linspace(-extent, extent, samples)
            vals = np.abs(self(pts))
            out[k] = d * d * float(np.max(vals[np.isfinite(vals)], initial=0.0))
        return out


def zero_coefficient(n) -> CoefficientField:
    return CoefficientField(n, lambda P: np.zeros(P.shape[0]), name="zero")


def power_bump_coefficient(n, amp=1.0, power=0.5, scale=1.0) -> CoefficientField:
    """c = amp * y1^(-power) * exp(-|y|^2/scale^2) on the half-space."""
    par = np.array([float(amp), float(power), float(scale)])
    return CoefficientField(
        n, lambda P: _np_lane.field_rows(C.POWBUMP, par, P),
        name=f"power_bump(amp={amp},power={power})")


def coefficient_from_equation(w: AntiSymmetricField, flap_w, floor=1e-12):
    """c = -flap_w / w where |w| clears the floor; excluded points reported.

    ``flap_w`` maps (m, n) points to fractional-Laplacian values of w.
    Returns (CoefficientField, probe) where probe(P) gives (values, excluded).
    """

    def probe(P):
        P = np.atleast_2d(np.asarray(P, dtype=float))
        wv = w(P)
        excluded = np.abs(wv) < floor
        vals = np.full(P.shape[0], np.nan)
        ok = ~excluded
        if np.any(ok):
            vals[ok] = -np.asarray(flap_w(P[ok]), dtype=float) / wv[ok]
        return vals, excluded

    field = CoefficientField(w.n, lambda P: probe(P)[0], name=f"c_from({w.name})")
    return field, probe


# ---------------------------------------------------------------------------
# catalog parsing: string identifiers used by the CLI config
# ---------------------------------------------------------------------------

_SPEC_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*(?:\((.*)\))?\s*$", re.S)


def _split_args(argstr):
    parts, depth, cur = [], 0, []
    for ch in argstr:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def parse_field(spec: str, n: int):
    """Build a catalog field from an identifier like ``degenerate_w(width=1.0)``."""
    m = _SPEC_RE.match(spec)
    if not m:
        raise ValueError(f"malformed field spec: {spec!r}")
    name, argstr = m.group(1), m.group(2) or ""
    kwargs = {}
    for part in _split_args(argstr):
        if "=" not in part:
            raise ValueError(f"field arguments must be key=value, got {part!r}")
        key, val = part.split("=", 1)
        key, val = key.strip(), val.strip()
        if _SPEC_RE.match(val) and not re.match(r"^[-+0-9.eE]+$", val):
            kwargs[key] = parse_field(val, n)
        else:
            kwargs[key] = float(val)

    if name == "constant":
        return constant_field(n, kwargs.get("value", 1.0))
    if name == "gaussian":
        return gaussian(n, center=kwargs.get("center"), scale=kwargs.get("scale", 1.0),
                        amp=kwargs.get("amp", 1.0))
    if name == "standard_bubble":
        return standard_bubble(n, kwargs["alpha"], center=kwargs.get("center"),
                               scale=kwargs.get("scale", 1.0))
    if name == "degenerate_w":
        return degenerate_w(n, width=kwargs.get("width", 1.0))
    if name == "x1_gaussian":
        return x1_gaussian(n, scale=kwargs.get("scale", 1.0), amp=kwargs.get("amp", 1.0))
    if name == "halfcircle":
        if n != 1:
            raise ValueError("halfcircle is one-dimensional")
        return halfcircle()
    if name == "linear_x1":
        return linear_x1(n)
    if name == "make_w":
        base = kwargs.get("base")
        if not isinstance(base, ScalarField):
            raise ValueError("make_w needs base=<field spec>")
        return make_w(base, kwargs.get("lam", 0.0))
    raise ValueError(f"unknown field identifier {name!r}")
