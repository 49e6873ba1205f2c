import json

import pytest

from frachopf.cli import main

HOPF_INI = """
[run]
n = 1
alpha = 0.5
field = degenerate_w(width=1.0)
seed = 42

[regions]
epsilon = 0.125
R = 4.0

[scan]
delta_max = 0.02
ratio = 0.66
count = 8
"""

EVAL_INI = """
[run]
n = 1
alpha = 0.5
field = gaussian(scale=1.0)
seed = 3

[eval]
points = 0.3 ; 0.9 ; 1.4
mode = plain
"""


def run_cli(tmp_path, name, text, command, sub="out", extra=()):
    cfg = tmp_path / f"{name}.ini"
    cfg.write_text(text)
    out = tmp_path / sub
    return main([command, "--config", str(cfg), "--out", str(out), *extra]), out


class TestEval:
    def test_plain_eval_writes_rows(self, tmp_path):
        code, out = run_cli(tmp_path, "ev", EVAL_INI, "eval")
        assert code == 0
        lines = (out / "eval.csv").read_text().strip().splitlines()
        assert lines[0] == "x1,value,error_estimate,evals"
        assert len(lines) == 4
        assert (out / "manifest.txt").exists()

    def test_invalid_alpha_is_config_error(self, tmp_path):
        code, _ = run_cli(tmp_path, "bad", EVAL_INI.replace("alpha = 0.5", "alpha = 2.5"),
                          "eval")
        assert code == 2

    def test_unknown_key_rejected(self, tmp_path):
        code, _ = run_cli(tmp_path, "bad2",
                          EVAL_INI.replace("seed = 3", "seed = 3\nbogus = 1"),
                          "eval")
        assert code == 2

    def test_duplicate_section_rejected(self, tmp_path):
        code, _ = run_cli(tmp_path, "bad4", EVAL_INI + "\n[run]\nseed = 4\n", "eval")
        assert code == 2

    def test_unknown_section_rejected(self, tmp_path):
        code, _ = run_cli(tmp_path, "bad3", EVAL_INI + "\n[mystery]\nx = 1\n", "eval")
        assert code == 2

    def test_oracle_mode_appends_gap_columns(self, tmp_path):
        text = EVAL_INI.replace("mode = plain", "mode = oracle") + "\n[oracle]\ncount = 5\n"
        code, out = run_cli(tmp_path, "evo", text, "eval")
        assert code == 0
        header = (out / "eval.csv").read_text().splitlines()[0]
        assert header.endswith("oracle,gap,bound,ok")

    def test_identity_mode(self, tmp_path):
        text = EVAL_INI.replace("gaussian(scale=1.0)", "x1_gaussian()") \
                       .replace("points = 0.3 ; 0.9 ; 1.4", "points = 0.4 ; 0.8")
        text = text.replace("mode = plain", "mode = identity")
        code, out = run_cli(tmp_path, "evi", text, "eval")
        assert code == 0
        header = (out / "identity.csv").read_text().splitlines()[0]
        assert header == "x,region,I1_value,I1_error,I2_factor,w_at_x,lhs,rhs,gap"


class TestVerifyHopf:
    def test_headline_run_passes(self, tmp_path):
        code, out = run_cli(tmp_path, "hopf", HOPF_INI, "verify-hopf")
        assert code == 0
        lines = (out / "scan.csv").read_text().splitlines()
        assert lines[0] == "delta,D,A,B,Omega,E,total,I2_term,cw_term"
        assert len(lines) == 9
        verdict = json.loads((out / "verdict.json").read_text())
        assert all(v["passed"] for v in verdict["estimates"].values())
        assert verdict["contradiction"]["passed"]

    def test_zero_field_vacuous(self, tmp_path):
        text = HOPF_INI.replace("degenerate_w(width=1.0)",
                                "make_w(base=constant(value=5.0),lam=0.0)")
        code, _ = run_cli(tmp_path, "hopf0", text, "verify-hopf")
        assert code == 3

    def test_non_converged_rows_flagged(self, tmp_path):
        text = HOPF_INI + "\n[quad]\nrel_tol = 1e-15\nabs_tol = 1e-18\nmax_evals = 1000\n"
        code, out = run_cli(tmp_path, "hopfnc", text, "verify-hopf")
        assert code == 4
        verdict = json.loads((out / "verdict.json").read_text())
        assert verdict["non_converged_deltas"]

    def test_non_antisymmetric_field_rejected(self, tmp_path):
        text = HOPF_INI.replace("degenerate_w(width=1.0)", "gaussian()")
        code, _ = run_cli(tmp_path, "hopfg", text, "verify-hopf")
        assert code == 2


MP_INI = """
[run]
n = 1
alpha = 0.5
seed = 7

[moving_plane]
u_field = standard_bubble(alpha=0.5,center=0.7)
lambda_lo = -2.0
lambda_hi = 2.0
extent = 16.0
spacing = 0.05
tolerance = 1e-6
"""


class TestMovingPlane:
    def test_recovers_shifted_center(self, tmp_path):
        code, out = run_cli(tmp_path, "mp", MP_INI, "moving-plane")
        assert code == 0
        tail = (out / "plane_scan.csv").read_text().strip().splitlines()[-1]
        assert tail.startswith("# lambda_o = ")
        lam = float(tail.split("=")[1])
        assert abs(lam - 0.7) <= 0.05 / 4.0
        slopes = (out / "slopes.csv").read_text().strip().splitlines()
        assert slopes[0] == "x1,slope"
        assert float(slopes[1].split(",")[1]) > 0.0

    def test_no_starting_plane_exit(self, tmp_path):
        text = MP_INI.replace("center=0.7", "center=4.0")
        code, _ = run_cli(tmp_path, "mp5", text, "moving-plane")
        assert code == 5


class TestOracleCheckCommand:
    def test_gaussian_passes(self, tmp_path):
        text = EVAL_INI + "\n[oracle]\ncount = 6\n"
        code, out = run_cli(tmp_path, "oc", text, "oracle-check")
        assert code == 0
        assert (out / "oracle.csv").exists()


class TestDeterminism:
    def test_verify_hopf_byte_identical(self, tmp_path):
        _, out1 = run_cli(tmp_path, "det", HOPF_INI, "verify-hopf", sub="r1")
        _, out2 = run_cli(tmp_path, "det", HOPF_INI, "verify-hopf", sub="r2")
        assert (out1 / "scan.csv").read_bytes() == (out2 / "scan.csv").read_bytes()
        assert (out1 / "verdict.json").read_bytes() == (out2 / "verdict.json").read_bytes()

    def test_eval_byte_identical_with_jobs(self, tmp_path):
        _, out1 = run_cli(tmp_path, "det2", EVAL_INI, "eval", sub="r1")
        _, out2 = run_cli(tmp_path, "det2", EVAL_INI, "eval", sub="r2",
                          extra=("--jobs", "3"))
        assert (out1 / "eval.csv").read_bytes() == (out2 / "eval.csv").read_bytes()

    def test_manifest_records_versions_and_seed(self, tmp_path):
        _, out = run_cli(tmp_path, "man", EVAL_INI, "eval")
        text = (out / "manifest.txt").read_text()
        for key in ("seed = 3", "package_version", "numpy_version",
                    "kernel_backend", "wall_time_s", "exit_code = 0"):
            assert key in text
