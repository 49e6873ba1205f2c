"""Plain-text run configuration: INI sections of key=value pairs.

Unknown sections or keys are rejected so configs stay in lockstep with the
code; every module-level invariant is re-validated at load time.
"""

import configparser
import io
from dataclasses import dataclass, field

import numpy as np

from .fields import parse_field
from .integrate import QuadSpec
from .moving_planes import PlaneScanConfig
from .quadrature import check_alpha

_KNOWN = {
    "run": {"n", "alpha", "field", "seed", "jobs"},
    "quad": {"inner_radius", "rel_tol", "abs_tol", "max_evals", "far_cutoff"},
    "regions": {"epsilon", "R", "eta_rule"},
    "scan": {"delta_max", "ratio", "count"},
    "coefficient": {"kind"},
    "eval": {"points", "mode"},
    "oracle": {"count", "rel_contract"},
    "moving_plane": {"u_field", "lambda_lo", "lambda_hi", "extent", "spacing",
                     "tolerance", "slope_points", "slope_h"},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n: int = 1
    alpha: float = 0.5
    field_id: str = "degenerate_w(width=1.0)"
    seed: int = 0
    jobs: int = 1
    quad: QuadSpec = field(default_factory=QuadSpec)
    epsilon: float = 0.125
    R: float = 4.0
    eta_rule: str = "half_delta"
    delta_max: float = 0.02
    ratio: float = 0.66
    count: int = 8
    coefficient_kind: str = "zero"
    eval_points: list = field(default_factory=list)
    eval_mode: str = "plain"
    oracle_count: int = 20
    oracle_rel_contract: float = 1e-3
    mp_u_field: str = "standard_bubble(alpha=0.5)"
    mp_lambda_lo: float = -2.0
    mp_lambda_hi: float = 2.0
    mp_extent: float = 16.0
    mp_spacing: float = 0.05
    mp_tolerance: float = 1e-6
    mp_slope_points: list = field(default_factory=list)
    mp_slope_h: float = 1e-3
    raw_text: str = ""

    def field_obj(self):
        return parse_field(self.field_id, self.n)

    def u_field_obj(self):
        return parse_field(self.mp_u_field, self.n)

    def coefficient_obj(self):
        from .fields import CoefficientField, power_bump_coefficient, zero_coefficient

        kind = self.coefficient_kind.strip()
        if kind == "zero":
            return zero_coefficient(self.n)
        if kind.startswith("power_bump"):
            import re

            kwargs = {}
            m = re.match(r"power_bump\((.*)\)\s*$", kind)
            if m and m.group(1).strip():
                for part in m.group(1).split(","):
                    k, v = part.split("=")
                    kwargs[k.strip()] = float(v)
            return power_bump_coefficient(self.n, **kwargs)
        raise ConfigError(f"unknown coefficient kind {kind!r}")

    def plane_scan_config(self):
        return PlaneScanConfig(self.mp_lambda_hi, self.mp_lambda_lo,
                               self.mp_extent, self.mp_spacing, self.mp_tolerance)

    def delta_grid(self):
        from .verifier import geometric_delta_grid

        return geometric_delta_grid(self.delta_max, self.ratio, self.count)


def _parse_points(text: str, dim: int):
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        coords = [float(tok) for tok in chunk.replace(",", " ").split()]
        if len(coords) != dim:
            raise ConfigError(
                f"point {chunk!r} has {len(coords)} coordinates, expected {dim}")
        pts.append(coords)
    return pts


def load_config(path_or_text, overrides=None) -> RunConfig:
    """Parse and validate a config file (or literal text)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str
    if "\n" in str(path_or_text) or "=" in str(path_or_text):
        text = str(path_or_text)
    else:
        with open(path_or_text) as fh:
            text = fh.read()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    for section in parser.sections():
        if section not in _KNOWN:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _KNOWN[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    cfg = RunConfig(raw_text=text)
    try:
        g = parser["run"] if parser.has_section("run") else {}
        cfg.n = int(g.get("n", cfg.n))
        cfg.alpha = float(g.get("alpha", cfg.alpha))
        cfg.field_id = g.get("field", cfg.field_id)
        cfg.seed = int(g.get("seed", cfg.seed))
        cfg.jobs = int(g.get("jobs", cfg.jobs))

        q = parser["quad"] if parser.has_section("quad") else {}
        cfg.quad = QuadSpec(
            inner_radius=float(q.get("inner_radius", 0.1)),
            rel_tol=float(q.get("rel_tol", 1e-6)),
            abs_tol=float(q.get("abs_tol", 1e-9)),
            max_evals=int(float(q.get("max_evals", 1e7))),
            far_cutoff=float(q.get("far_cutoff", 50.0)),
        )

        r = parser["regions"] if parser.has_section("regions") else {}
        cfg.epsilon = float(r.get("epsilon", cfg.epsilon))
        cfg.R = float(r.get("R", cfg.R))
        cfg.eta_rule = r.get("eta_rule", cfg.eta_rule)

        s = parser["scan"] if parser.has_section("scan") else {}
        cfg.delta_max = float(s.get("delta_max", cfg.delta_max))
        cfg.ratio = float(s.get("ratio", cfg.ratio))
        cfg.count = int(s.get("count", cfg.count))

        if parser.has_section("coefficient"):
            cfg.coefficient_kind = parser["coefficient"].get("kind", "zero")
        if parser.has_section("eval"):
            e = parser["eval"]
            cfg.eval_points = _parse_points(e.get("points", ""), cfg.n)
            cfg.eval_mode = e.get("mode", "plain")
        if parser.has_section("oracle"):
            o = parser["oracle"]
            cfg.oracle_count = int(o.get("count", cfg.oracle_count))
            cfg.oracle_rel_contract = float(o.get("rel_contract", cfg.oracle_rel_contract))
        if parser.has_section("moving_plane"):
            mp = parser["moving_plane"]
            cfg.mp_u_field = mp.get("u_field", cfg.mp_u_field)
            cfg.mp_lambda_lo = float(mp.get("lambda_lo", cfg.mp_lambda_lo))
            cfg.mp_lambda_hi = float(mp.get("lambda_hi", cfg.mp_lambda_hi))
            cfg.mp_extent = float(mp.get("extent", cfg.mp_extent))
            cfg.mp_spacing = float(mp.get("spacing", cfg.mp_spacing))
            cfg.mp_tolerance = float(mp.get("tolerance", cfg.mp_tolerance))
            # tangential coordinates of plane points; n = 1 has none
            raw_slopes = mp.get("slope_points", "")
            if cfg.n == 1:
                cfg.mp_slope_points = [[]]
            else:
                cfg.mp_slope_points = _parse_points(raw_slopes, cfg.n - 1) \
                    or [[0.0] * (cfg.n - 1)]
            cfg.mp_slope_h = float(mp.get("slope_h", cfg.mp_slope_h))
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc

    if overrides:
        for key, val in overrides.items():
            if val is not None:
                setattr(cfg, key, val)

    # cross-validate module invariants up front
    check_alpha(cfg.alpha)
    if cfg.n < 1:
        raise ConfigError("dimension must be >= 1")
    if cfg.eta_rule != "half_delta":
        raise ConfigError("only the half_delta floor rule is implemented")
    if not (0.0 < cfg.ratio < 1.0):
        raise ConfigError("scan ratio must lie in (0, 1)")
    if cfg.count < 6:
        raise ConfigError("scan needs at least 6 points")
    if cfg.delta_max > 0.5 * cfg.epsilon:
        raise ConfigError("delta_max must stay below epsilon/2")
    if not (2.0 * cfg.delta_max <= cfg.epsilon <= 0.5 and cfg.R >= 4.0):
        raise ConfigError("region parameters violate admissibility")
    try:
        cfg.field_obj()
    except ValueError as exc:
        raise ConfigError(f"bad field spec: {exc}") from exc
    return cfg


def manifest_text(cfg: RunConfig, command: str, seed: int, wall_time: float,
                  outputs: list) -> str:
    import numba
    import scipy

    from . import __version__
    from . import backend

    buf = io.StringIO()
    buf.write("# run manifest\n")
    buf.write(f"command = {command}\n")
    buf.write(f"seed = {seed}\n")
    buf.write(f"package_version = {__version__}\n")
    buf.write(f"numpy_version = {np.__version__}\n")
    buf.write(f"scipy_version = {scipy.__version__}\n")
    buf.write(f"numba_version = {numba.__version__}\n")
    buf.write(f"kernel_backend = {backend.backend_name()}\n")
    buf.write(f"wall_time_s = {wall_time:.3f}\n")
    for out in outputs:
        buf.write(f"output = {out}\n")
    buf.write("\n# config echo\n")
    for line in cfg.raw_text.splitlines():
        buf.write(f"# {line}\n")
    return buf.getvalue()
