import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frachopf.geometry import (RegionLabel, RegionParams, classify,
                               classify_rows, default_eta, in_core_box,
                               make_region_params, partition_check, reflect,
                               region_predicates)

coords = st.floats(-50, 50, allow_nan=False)


def test_reflect_examples():
    assert np.allclose(reflect([1.0, 2.0], 0.0), [-1.0, 2.0])
    assert np.allclose(reflect([3.0, 0.0, 0.0], 1.0), [-1.0, 0.0, 0.0])


@settings(max_examples=60, deadline=None)
@given(st.lists(coords, min_size=1, max_size=4), st.floats(-10, 10, allow_nan=False))
def test_reflect_involution(pt, lam):
    p = np.array(pt)
    assert np.allclose(reflect(reflect(p, lam), lam), p, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(coords, min_size=2, max_size=2), st.lists(coords, min_size=2, max_size=2),
       st.floats(-10, 10, allow_nan=False))
def test_reflect_isometry(a, b, lam):
    a, b = np.array(a), np.array(b)
    assert np.isclose(np.linalg.norm(reflect(a, lam) - reflect(b, lam)),
                      np.linalg.norm(a - b), rtol=1e-12, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 20), st.floats(0.01, 20), coords, coords)
def test_reflection_increases_distance_in_halfspace(x1, y1, x2, y2):
    x = np.array([x1, x2])
    y = np.array([y1, y2])
    assert np.linalg.norm(x - y) < np.linalg.norm(x - reflect(y, 0.0))


PARAMS = RegionParams(delta=0.1, epsilon=0.4, R=10.0, eta=0.05)


@pytest.mark.parametrize("pt,label", [
    ((0.05, 0.1), RegionLabel.A),
    ((0.30, 0.1), RegionLabel.B),
    ((20.0, 0.0), RegionLabel.E),
    ((0.15, 0.39), RegionLabel.A),
    ((2.0, 2.0), RegionLabel.OMEGA),
    ((0.02, 5.0), RegionLabel.E),   # floor strip outside the slab
])
def test_classify_examples(pt, label):
    assert classify(np.array(pt), PARAMS) is label


def test_classify_rejects_plane_and_left_side():
    with pytest.raises(ValueError):
        classify(np.array([0.0, 1.0]), PARAMS)
    with pytest.raises(ValueError):
        classify(np.array([-0.3, 1.0]), PARAMS)


def test_boundary_tie_prefers_a():
    p = np.array([2.0 * PARAMS.delta, 0.0])
    in_a, in_b, _ = region_predicates(p[None, :], PARAMS)
    assert in_a[0] and in_b[0]
    assert classify(p, PARAMS) is RegionLabel.A


@pytest.mark.parametrize("kwargs", [
    dict(delta=0.3, epsilon=0.4, R=10.0, eta=0.05),   # 2 delta > epsilon
    dict(delta=0.1, epsilon=0.7, R=10.0, eta=0.05),   # epsilon > 1/2
    dict(delta=0.1, epsilon=0.4, R=2.0, eta=0.05),    # R < 4
    dict(delta=0.1, epsilon=0.4, R=10.0, eta=0.2),    # eta > delta
    dict(delta=-0.1, epsilon=0.4, R=10.0, eta=0.05),
])
def test_region_params_invariants(kwargs):
    with pytest.raises(ValueError):
        RegionParams(**kwargs)


def test_default_eta_tracks_delta():
    assert default_eta(0.1) == 0.05
    p = make_region_params(0.08, 0.4, 10.0)
    assert p.eta == 0.04


@pytest.mark.parametrize("n", [1, 2])
def test_partition_check_unique_labels(n):
    rep = partition_check(PARAMS, samples=10_000, seed=123, n=n)
    assert rep.samples >= 9000
    assert rep.multi_label_points == []
    assert rep.strip_all_e
    assert sum(rep.counts[lab] for lab in RegionLabel) == rep.samples


@pytest.mark.parametrize("n", [1, 2])
def test_partition_volume_fractions_within_3_sigma(n):
    rep = partition_check(PARAMS, samples=20_000, seed=7, n=n)
    assert rep.volume_checks, "volume check must run for n <= 2"
    for name, expected, observed, sigma, ok in rep.volume_checks:
        assert ok, f"{name}: expected {expected}, observed {observed} (sigma {sigma})"


def test_partition_check_validates_samples():
    with pytest.raises(ValueError):
        partition_check(PARAMS, samples=0, seed=1)


def test_core_box_inside_omega():
    rng = np.random.default_rng(5)
    pts = np.column_stack([rng.uniform(1, 2, 200), rng.uniform(-1, 1, 200)])
    assert np.all(in_core_box(pts))
    assert all(lab is RegionLabel.OMEGA for lab in classify_rows(pts, PARAMS))
