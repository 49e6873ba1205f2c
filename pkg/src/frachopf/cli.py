"""Command-line harness: eval | verify-hopf | moving-plane | oracle-check.

Exit codes: 0 pass, 1 contract violation, 2 config error, 3 vacuous,
4 numerical non-convergence, 5 no starting plane.  Every run writes a
manifest next to its CSV outputs; identical config and seed produce
byte-identical CSVs (the manifest carries the wall time and versions).
"""

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config, manifest_text
from .fields import AntiSymmetricField
from .halfspace import decomposition_identity_check
from .moving_planes import (MovingPlaneReport, NoStartingPlane, find_lambda_o,
                            hopf_slope_check, make_w)
from .quadrature import frac_laplacian_batch, oracle_check
from .verifier import contradiction_check, delta_scan, verify_estimates

EXIT_PASS = 0
EXIT_CONTRACT = 1
EXIT_CONFIG = 2
EXIT_VACUOUS = 3
EXIT_NONCONVERGED = 4
EXIT_NO_START = 5


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _finish(cfg: RunConfig, out: Path, command: str, seed: int, t0: float,
            outputs, code: int) -> int:
    (out / "manifest.txt").write_text(
        manifest_text(cfg, command, seed, time.time() - t0, outputs)
        + f"exit_code = {code}\n")
    return code


def cmd_eval(cfg: RunConfig, out: Path, seed: int) -> int:
    t0 = time.time()
    field = cfg.field_obj()
    outputs = []
    if cfg.eval_mode == "plain":
        if not cfg.eval_points:
            print("no evaluation points configured", file=sys.stderr)
            return EXIT_CONFIG
        results = frac_laplacian_batch(field, cfg.eval_points, cfg.alpha,
                                       cfg.quad, jobs=cfg.jobs)
        header = [f"x{i+1}" for i in range(cfg.n)] + ["value", "error_estimate", "evals"]
        rows = [list(p) + [r.value, r.error_estimate, r.evals]
                for p, r in zip(cfg.eval_points, results)]
        write_csv(out / "eval.csv", header, rows)
        outputs.append("eval.csv")
        code = EXIT_PASS if all(r.converged for r in results) else EXIT_NONCONVERGED
    elif cfg.eval_mode == "oracle":
        rows = oracle_check(field, cfg.alpha, cfg.oracle_count, seed, cfg.quad,
                            cfg.oracle_rel_contract)
        header = ([f"x{i+1}" for i in range(cfg.n)]
                  + ["value", "error_estimate", "evals", "oracle", "gap", "bound", "ok"])
        table = [list(r["x"]) + [r["quadrature"], 0.0, r["evals"], r["oracle"],
                                 r["gap"], r["bound"], r["ok"]] for r in rows]
        write_csv(out / "eval.csv", header, table)
        outputs.append("eval.csv")
        code = EXIT_PASS if all(r["ok"] for r in rows) else EXIT_CONTRACT
    elif cfg.eval_mode == "identity":
        if not isinstance(field, AntiSymmetricField):
            print("identity mode needs an anti-symmetric field", file=sys.stderr)
            return EXIT_CONFIG
        if not cfg.eval_points:
            print("no evaluation points configured", file=sys.stderr)
            return EXIT_CONFIG
        reports = [decomposition_identity_check(field, p, cfg.alpha, cfg.quad)
                   for p in cfg.eval_points]
        header = ["x", "region", "I1_value", "I1_error", "I2_factor",
                  "w_at_x", "lhs", "rhs", "gap"]
        write_csv(out / "identity.csv", header,
                  [[r.csv_row()[k] for k in header] for r in reports])
        outputs.append("identity.csv")
        code = EXIT_PASS if all(r.ok for r in reports) else EXIT_CONTRACT
    else:
        print(f"unknown eval mode {cfg.eval_mode!r}", file=sys.stderr)
        return EXIT_CONFIG
    return _finish(cfg, out, "eval", seed, t0, outputs, code)


def cmd_verify_hopf(cfg: RunConfig, out: Path, seed: int) -> int:
    t0 = time.time()
    w = cfg.field_obj()
    if not isinstance(w, AntiSymmetricField):
        print("verify-hopf needs an anti-symmetric field", file=sys.stderr)
        return EXIT_CONFIG
    coeff = cfg.coefficient_obj()
    grid = cfg.delta_grid()
    report = delta_scan(w, cfg.alpha, cfg.epsilon, cfg.R, grid, cfg.quad,
                        coefficient=coeff, jobs=cfg.jobs)

    header = ["delta", "D", "A", "B", "Omega", "E", "total", "I2_term", "cw_term"]
    rows = [[r.delta, r.regions["D"].value, r.regions["A"].value,
             r.regions["B"].value, r.regions["Omega"].value,
             r.regions["E"].value, r.total.value, r.i2_term, r.cw_term]
            for r in report.rows]
    write_csv(out / "scan.csv", header, rows)
    outputs = ["scan.csv", "verdict.json"]

    bad_rows = [r.delta for r in report.rows if not r.converged]
    verdict = {"rows": len(report.rows), "non_converged_deltas": bad_rows}
    code = EXIT_PASS
    try:
        outcome = verify_estimates(report, cfg.alpha)
        contra = contradiction_check(w, coeff, cfg.alpha, grid, cfg.quad,
                                     cfg.epsilon, cfg.R, report=report)
        verdict.update({
            "vacuous": outcome.vacuous,
            "estimates": {v.estimate_id: {"passed": v.passed, **v.details}
                          for v in outcome.verdicts},
            "fitted": outcome.fitted,
            "contradiction": {
                "passed": contra.passed, "inconclusive": contra.inconclusive,
                "delta_star": contra.delta_star, "c1": contra.c1,
                "hypothesis_ok": contra.hypothesis_ok,
                "degenerate_ok": contra.degenerate_ok,
                "margins": contra.margins,
            },
            "offaxis": report.offaxis,
        })
        if outcome.vacuous:
            code = EXIT_VACUOUS
        elif bad_rows:
            code = EXIT_NONCONVERGED
        elif not (outcome.overall and contra.passed):
            code = EXIT_CONTRACT
    except ValueError as exc:
        verdict["error"] = str(exc)
        code = EXIT_NONCONVERGED if bad_rows else EXIT_CONTRACT

    (out / "verdict.json").write_text(
        json.dumps(verdict, indent=2, sort_keys=True, default=float) + "\n")
    return _finish(cfg, out, "verify-hopf", seed, t0, outputs, code)


def cmd_moving_plane(cfg: RunConfig, out: Path, seed: int) -> int:
    t0 = time.time()
    u = cfg.u_field_obj()
    mp_cfg = cfg.plane_scan_config()
    rep = MovingPlaneReport()
    try:
        lam_o = find_lambda_o(u, mp_cfg, rep)
    except NoStartingPlane as exc:
        print(f"no starting plane: {exc}", file=sys.stderr)
        (out / "plane_scan.csv").write_text("")
        _finish(cfg, out, "moving-plane", seed, t0, ["plane_scan.csv"], EXIT_NO_START)
        return EXIT_NO_START

    header = ["lambda", "min"] + [f"argmin{i+1}" for i in range(cfg.n)]
    rows = [[e["lambda"], e["min"], *e["argmin"]] for e in rep.entries]
    path = out / "plane_scan.csv"
    write_csv(path, header, rows)
    with open(path, "a", newline="\n") as fh:
        fh.write(f"# lambda_o = {repr(float(lam_o))}\n")

    lam_slope = lam_o + mp_cfg.spacing
    w = make_w(u, lam_slope)
    pts = [[lam_slope] + list(t) for t in (cfg.mp_slope_points or [[0.0] * (cfg.n - 1)])]
    slopes = hopf_slope_check(w, pts, cfg.mp_slope_h)
    rep.hopf_slopes = list(slopes)
    write_csv(out / "slopes.csv",
              [f"x{i+1}" for i in range(cfg.n)] + ["slope"],
              [list(p) + [s] for p, s in zip(pts, slopes)])
    return _finish(cfg, out, "moving-plane", seed, t0,
                   ["plane_scan.csv", "slopes.csv"], EXIT_PASS)


def cmd_oracle_check(cfg: RunConfig, out: Path, seed: int) -> int:
    t0 = time.time()
    field = cfg.field_obj()
    rows = oracle_check(field, cfg.alpha, cfg.oracle_count, seed, cfg.quad,
                        cfg.oracle_rel_contract)
    header = ([f"x{i+1}" for i in range(cfg.n)]
              + ["quadrature", "oracle", "gap", "bound", "ok"])
    write_csv(out / "oracle.csv", header,
              [list(r["x"]) + [r["quadrature"], r["oracle"], r["gap"],
                               r["bound"], r["ok"]] for r in rows])
    code = EXIT_PASS if all(r["ok"] for r in rows) else EXIT_CONTRACT
    return _finish(cfg, out, "oracle-check", seed, t0, ["oracle.csv"], code)


_COMMANDS = {
    "eval": cmd_eval,
    "verify-hopf": cmd_verify_hopf,
    "moving-plane": cmd_moving_plane,
    "oracle-check": cmd_oracle_check,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="frachopf",
                                 description="fractional-Laplacian verification harness")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the INI config")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--jobs", type=int, default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.jobs is not None:
            overrides["jobs"] = args.jobs
        cfg = load_config(args.config, overrides)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return _COMMANDS[args.command](cfg, out, cfg.seed)


if __name__ == "__main__":
    sys.exit(main())
