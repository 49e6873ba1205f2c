import numpy as np
import pytest

from frachopf.fields import degenerate_w, gaussian, make_w, standard_bubble, x1_gaussian
from frachopf.moving_planes import (MovingPlaneReport, NoStartingPlane,
                                    PlaneScanConfig, find_lambda_o,
                                    hopf_slope_check, min_scan,
                                    suggested_extent)

CFG = PlaneScanConfig(lambda_hi=2.0, lambda_lo=-2.0, extent=16.0,
                      spacing=0.05, tolerance=1e-6)


def bubble(center=0.0):
    return standard_bubble(1, 0.5, center=center)


class TestMinScan:
    def test_plane_left_of_center_goes_negative(self):
        # reflection across a plane left of the peak pushes points away
        # from it, so the difference dips negative
        val, arg = min_scan(bubble(), -1.0, CFG)
        assert val < -CFG.tolerance
        assert arg[0] > -1.0

    def test_symmetric_plane_is_flat(self):
        val, _ = min_scan(bubble(), 0.0, CFG)
        assert val >= -CFG.tolerance

    def test_translated_radial_field(self):
        val, _ = min_scan(bubble(center=0.7), 0.7, CFG)
        assert val >= -CFG.tolerance

    def test_certified_side_nonnegative(self):
        val, _ = min_scan(bubble(), 1.0, CFG)
        assert val >= -CFG.tolerance

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PlaneScanConfig(1.0, 2.0, 16.0, 0.05)
        with pytest.raises(ValueError):
            PlaneScanConfig(2.0, -2.0, 16.0, -0.05)
        tight = PlaneScanConfig(2.0, -2.0, 3.0, 0.05)
        with pytest.raises(ValueError):
            tight.validate_for(bubble())


class TestFindLambdaO:
    @pytest.mark.parametrize("center", [0.0, 0.7, -0.3])
    def test_recovers_center(self, center):
        lam = find_lambda_o(bubble(center), CFG)
        assert abs(lam - center) <= CFG.spacing / 4.0

    def test_two_bubble_sum(self):
        u = bubble(0.0) + bubble(0.6)
        lam = find_lambda_o(u, CFG)
        assert abs(lam - 0.3) <= CFG.spacing / 4.0

    def test_no_starting_plane(self):
        # a peak far to the right of lambda_hi breaks the certificate there
        with pytest.raises(NoStartingPlane):
            find_lambda_o(standard_bubble(1, 0.5, center=4.0), CFG)

    def test_report_entries_and_gradient_refinement(self):
        rep = MovingPlaneReport()
        find_lambda_o(bubble(0.7), CFG, rep)
        assert rep.lambda_o is not None
        failing = [e for e in rep.entries if e["min"] < -CFG.tolerance]
        assert failing, "bisection must visit uncertified planes"
        # interior minimizers end the descent with a small gradient
        for e in failing:
            assert e["grad_norm"] < 10.0 * CFG.spacing

    def test_minimizers_approach_plane_from_below(self):
        u = bubble(0.0)
        dists = []
        for lam in (-0.4, -0.3, -0.2, -0.1):
            _, arg = min_scan(u, lam, CFG)
            dists.append(arg[0] - lam)
        assert dists[-1] < dists[0]


class TestHopfSlopes:
    def test_analytic_slope(self):
        w = x1_gaussian(2)
        pts = [np.array([0.0, 0.0]), np.array([0.0, 0.5]), np.array([0.0, -1.0])]
        slopes = hopf_slope_check(w, pts, 1e-5)
        expected = np.exp(-np.array([0.0, 0.25, 1.0]))
        np.testing.assert_allclose(slopes, expected, rtol=1e-4)

    def test_degenerate_slope_vanishes_with_step(self):
        w = degenerate_w(1, 1.0)
        s_big = hopf_slope_check(w, [np.array([0.0])], 1e-2)[0]
        s_small = hopf_slope_check(w, [np.array([0.0])], 1e-4)[0]
        assert abs(s_small) < abs(s_big) < 1e-3
        assert s_small == pytest.approx(0.0, abs=1e-7)

    def test_positive_above_limit_plane(self):
        u = bubble(0.7)
        lam = find_lambda_o(u, CFG) + CFG.spacing
        w = make_w(u, lam)
        slopes = hopf_slope_check(w, [np.array([lam])], 1e-4)
        assert np.all(slopes > 0.0)

    def test_requires_plane_points(self):
        w = x1_gaussian(1)
        with pytest.raises(ValueError):
            hopf_slope_check(w, [np.array([0.3])], 1e-4)
        with pytest.raises(ValueError):
            hopf_slope_check(w, [np.array([0.0])], -1e-4)


def test_w_vanishes_identically_on_plane():
    for lam in (0.0, 0.7, -0.3):
        w = make_w(gaussian(2, center=(0.4, 0.0)), lam)
        pts = np.column_stack([np.full(7, lam), np.linspace(-2, 2, 7)])
        assert np.all(w(pts) == 0.0)


def test_suggested_extent_notes_truncation():
    ext, note = suggested_extent(bubble(), 1e-6)
    assert note is not None and "truncated" in note
    ext_g, note_g = suggested_extent(gaussian(1), 1e-6)
    assert note_g is None and ext_g >= 10.0
