import numpy as np
import pytest

from frachopf.fields import (constant_field, degenerate_w, make_w,
                             power_bump_coefficient, x1_gaussian,
                             zero_coefficient)
from frachopf.integrate import QuadSpec
from frachopf.verifier import (ESTIMATE_IDS, EstimateSpec, FitSignChange,
                               contradiction_check, delta_scan,
                               estimate_catalog, fit_exponent,
                               geometric_delta_grid, headline_config,
                               verify_estimates)

GRID = geometric_delta_grid(0.02, 0.66, 8)


@pytest.fixture(scope="module")
def headline_scan():
    w = degenerate_w(1, 1.0)
    return w, delta_scan(w, 0.5, 0.125, 4.0, GRID)


class TestFitExponent:
    def test_exact_power_law(self):
        deltas = [0.2 * 0.5 ** k for k in range(6)]
        slope, intercept, conf = fit_exponent([(d, 7.0 * d ** 2) for d in deltas])
        assert slope == pytest.approx(2.0, abs=1e-9)
        assert intercept == pytest.approx(np.log(7.0), abs=1e-9)
        assert conf < 1e-12

    def test_dominant_term(self):
        deltas = [0.1 * 0.6 ** k for k in range(8)]
        slope, _, _ = fit_exponent([(d, d ** 3 + d ** 4) for d in deltas])
        assert 2.9 <= slope <= 3.1

    def test_needs_four_points(self):
        with pytest.raises(ValueError):
            fit_exponent([(0.1, 1.0), (0.05, 0.5), (0.025, 0.25)])

    def test_sign_change_refused_with_pattern(self):
        pts = [(0.1, 1.0), (0.05, 0.6), (0.025, -0.1), (0.0125, -0.2)]
        with pytest.raises(FitSignChange) as exc:
            fit_exponent(pts)
        assert exc.value.signs == [1, 1, -1, -1]

    def test_zero_refused(self):
        with pytest.raises(ValueError):
            fit_exponent([(0.1, 1.0), (0.05, 0.0), (0.025, 0.2), (0.01, 0.1)])


class TestEstimateSpec:
    def test_catalog_complete(self):
        cat = estimate_catalog()
        assert [e.estimate_id for e in cat] == list(ESTIMATE_IDS)

    def test_unknown_id_rejected(self):
        with pytest.raises(ValueError):
            EstimateSpec("E9_X", "whatever")

    def test_wrong_form_rejected(self):
        with pytest.raises(ValueError):
            EstimateSpec("E1_D", "some other bound")


class TestDeltaScan:
    def test_grid_validation(self):
        w = degenerate_w(1, 1.0)
        with pytest.raises(ValueError):
            delta_scan(w, 0.5, 0.125, 4.0, [0.02, 0.01, 0.005, 0.002, 0.001])
        with pytest.raises(ValueError):
            delta_scan(w, 0.5, 0.125, 4.0, [0.01] * 8)
        with pytest.raises(ValueError):
            delta_scan(w, 0.5, 0.125, 4.0, geometric_delta_grid(0.1, 0.66, 8))

    def test_rows_and_additivity(self, headline_scan):
        _, rep = headline_scan
        assert len(rep.rows) == 8
        for row in rep.rows:
            assert row.converged
            assert row.additivity_gap <= 1e-8 + 1e-6 * abs(row.total.value)
            assert row.eta == pytest.approx(0.5 * row.delta)

    def test_witness_box_strictly_negative(self, headline_scan):
        _, rep = headline_scan
        assert all(r.regions["D"].value < 0.0 for r in rep.rows)

    def test_slab_below_witness_at_defaults(self, headline_scan):
        _, rep = headline_scan
        for r in rep.rows:
            assert abs(r.regions["A"].value) <= abs(r.regions["D"].value)

    def test_jobs_deterministic(self):
        w = degenerate_w(1, 1.0)
        grid = geometric_delta_grid(0.02, 0.6, 6)
        a = delta_scan(w, 0.5, 0.125, 4.0, grid, offaxis=False)
        b = delta_scan(w, 0.5, 0.125, 4.0, grid, jobs=3, offaxis=False)
        assert [r.total.value for r in a.rows] == [r.total.value for r in b.rows]


class TestVerifyEstimates:
    def test_headline_passes(self, headline_scan):
        _, rep = headline_scan
        out = verify_estimates(rep, 0.5)
        assert out.overall, {v.estimate_id: v.passed for v in out.verdicts}
        assert out.fitted["c1"] > 0.0
        assert out.fitted["i2_slope"] >= 3.0 - 0.5 - 0.2

    def test_zero_field_is_vacuous_not_passed(self):
        w0 = make_w(constant_field(1, 1.0), 0.0)
        rep = delta_scan(w0, 0.5, 0.125, 4.0, GRID)
        out = verify_estimates(rep, 0.5)
        assert out.vacuous
        assert not out.overall
        assert all(v.vacuous and not v.passed for v in out.verdicts)

    def test_insufficient_rows_rejected(self, headline_scan):
        _, rep = headline_scan
        import copy

        broken = copy.copy(rep)
        broken.rows = rep.rows[:4]
        with pytest.raises(ValueError):
            verify_estimates(broken, 0.5)

    def test_epsilon_independence_of_c1(self):
        # the witness box never touches epsilon; the fitted constant moves
        # by far less than the 25% allowance
        w = degenerate_w(1, 1.0)
        c1s = []
        for eps in (0.0625, 0.125, 0.25):
            rep = delta_scan(w, 0.5, eps, 4.0, GRID, offaxis=False)
            c1s.append(verify_estimates(rep, 0.5).fitted["c1"])
        spread = (max(c1s) - min(c1s)) / np.mean(c1s)
        assert spread < 0.25, c1s


class TestContradiction:
    def test_zero_coefficient_passes(self, headline_scan):
        w, rep = headline_scan
        verdict = contradiction_check(w, None, 0.5, GRID, epsilon=0.125,
                                      report=rep)
        assert verdict.passed and not verdict.inconclusive
        assert verdict.delta_star is not None and verdict.delta_star > 0.0
        assert verdict.c1 > 0.0

    def test_mild_coefficient_still_passes(self, headline_scan):
        w, _ = headline_scan
        c = power_bump_coefficient(1, amp=1.0, power=0.5)
        verdict = contradiction_check(w, c, 0.5, GRID, epsilon=0.125)
        assert verdict.hypothesis_ok
        assert verdict.passed

    def test_hypothesis_violating_coefficient_never_passes(self, headline_scan):
        w, rep = headline_scan
        c = power_bump_coefficient(1, amp=50.0, power=2.0)
        verdict = contradiction_check(w, c, 0.5, GRID, epsilon=0.125, report=rep)
        assert not verdict.hypothesis_ok
        assert not verdict.passed and verdict.inconclusive

    def test_non_degenerate_field_inconclusive(self):
        w = x1_gaussian(1)
        grid = geometric_delta_grid(0.02, 0.6, 6)
        verdict = contradiction_check(w, zero_coefficient(1), 0.5, grid,
                                      epsilon=0.125)
        assert not verdict.degenerate_ok
        assert not verdict.passed and verdict.inconclusive


def test_headline_config_admissible():
    for n in (1, 2):
        for alpha in (0.5, 1.5):
            cfg = headline_config(n, alpha)
            assert 2.0 * cfg["delta_max"] <= cfg["epsilon"] <= 0.5
            assert cfg["R"] >= 4.0
