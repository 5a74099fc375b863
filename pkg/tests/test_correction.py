import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toynets import three_bus
from typhoon_resilience.correction import (
    K_MAX,
    K_MIN,
    FeatureBounds,
    boundary_scores,
    composite_score,
    comprehensive_corridor_probability,
    correction_coefficient,
    network_features,
    normalize_features,
    normalize_matrix,
    unit_coefficients,
    write_correction_dump,
)
from typhoon_resilience.errors import DomainError, ValidationError
from typhoon_resilience.features import FEATURES, SIGNS, FEATURE_RANGES
from typhoon_resilience.featweights import FeatureWeightVector, read_weights
from typhoon_resilience.grid_model import TowerLineUnit, embedded_path
from typhoon_resilience.hazard import series_probability
from typhoon_resilience.windfield import GeoPoint

UNIFORM = np.full(7, 1 / 7)
weights7 = st.lists(st.floats(0, 1), min_size=7, max_size=7).filter(lambda w: sum(w) > 1e-3).map(
    lambda w: np.asarray(w) / sum(w))


def unit(**kw):
    base = dict(tower_point=GeoPoint(22, 113), span_km=0.5, v_design_tower=20.0, v_design_line=20.0,
                altitude=-20.0, slope=0.0, wind_angle=0.0, operation_years=0.0, rainfall_24h=0.0)
    base.update(kw)
    return TowerLineUnit(**base)


def idx(name):
    return FEATURES.index(name)


# -- normalization -------------------------------------------------------------


def test_minimum_corner_is_zero():
    x = normalize_features(unit(), max_wind=0.0)
    assert np.all(x == 0.0)


def test_altitude_at_max():
    assert normalize_features(unit(altitude=150.0), 0.0)[idx("altitude")] == 1.0


def test_design_wind_at_max_is_negative():
    assert normalize_features(unit(v_design_tower=50.0), 0.0)[idx("design_wind")] == -1.0


def test_out_of_range_clamps():
    x = normalize_features(unit(altitude=900.0, slope=-5.0), max_wind=80.0)
    assert x[idx("altitude")] == 1.0 and x[idx("slope")] == 0.0 and x[idx("max_wind")] == 1.0


def test_rainfall_goes_through_conversion():
    # 24 h total whose 10-minute intensity is 30 mm/h, half the nominal range
    r24 = (30.0 / 27.08) ** (1 / 0.6021)
    assert normalize_features(unit(), 0.0, rainfall_24h=r24)[idx("rainfall_intensity")] == pytest.approx(0.5)


def test_bad_bounds_rejected():
    with pytest.raises(ValidationError):
        FeatureBounds(ranges={**FEATURE_RANGES, "slope": (5.0, 5.0)})


# -- score bounds ------------------------------------------------------------------


def test_all_positive_signs():
    b = FeatureBounds(signs={f: 1 for f in FEATURES})
    assert boundary_scores(UNIFORM, b) == pytest.approx((0.0, 1.0))


def test_reference_scheme1_bounds():
    # reference gini row, raw
    w = np.array([0.236, 0.146, 0.182, 0.078, 0.105, 0.081, 0.169])
    lo, hi = boundary_scores(w)
    assert lo == pytest.approx(-0.25, abs=1e-12)
    assert hi == pytest.approx(0.747, abs=1e-12)
    # the stored weights are renormalized, so the upper bound lands on 0.75 within rounding
    stored = read_weights(embedded_path("reference_weights.csv"))[0]
    assert boundary_scores(stored)[1] == pytest.approx(0.75, abs=5e-3)


def test_opposite_signs_uniform():
    w = np.zeros(7)
    w[idx("max_wind")] = w[idx("design_wind")] = 0.5
    assert boundary_scores(w) == pytest.approx((-0.5, 0.5))


@settings(max_examples=100, deadline=None)
@given(weights7)
def test_corners_hit_the_bounds(w):
    lo, hi = boundary_scores(w)
    b = FeatureBounds()
    top = normalize_matrix(np.where(b.sign > 0, b.hi, b.lo))
    bottom = normalize_matrix(np.where(b.sign > 0, b.lo, b.hi))
    assert composite_score(w, top).w == pytest.approx(hi, abs=1e-12)
    assert composite_score(w, bottom).w == pytest.approx(lo, abs=1e-12)
    assert composite_score(w, np.zeros(7)).w == 0.0


def test_composite_clamps():
    s = composite_score(UNIFORM, np.full(7, 5.0))
    assert s.w == s.bounds[1]


# -- k ---------------------------------------------------------------------------


def test_k_endpoints():
    assert correction_coefficient(-0.25, -0.25, 0.75) == pytest.approx(K_MIN)
    assert correction_coefficient(0.75, -0.25, 0.75) == pytest.approx(K_MAX)
    assert correction_coefficient(0.25, -0.25, 0.75) == pytest.approx(1.15)


def test_k_degenerate_bounds():
    with pytest.raises(DomainError):
        correction_coefficient(0.0, 0.5, 0.5)


@settings(max_examples=100, deadline=None)
@given(w=weights7, seed=st.integers(0, 10_000))
def test_k_range_and_monotone(w, seed):
    x = normalize_matrix(np.random.default_rng(seed).uniform(-50, 200, (40, 7)))
    k = unit_coefficients(w, x)
    assert np.all((k >= K_MIN - 1e-12) & (k <= K_MAX + 1e-12))
    lo, hi = boundary_scores(w)
    ws = np.clip(x @ w, lo, hi)
    order = np.argsort(ws, kind="stable")
    assert np.all(np.diff(k[order]) >= -1e-12)


@settings(max_examples=50, deadline=None)
@given(w=weights7, seed=st.integers(0, 10_000), scale=st.floats(0.01, 1000), col=st.integers(0, 6))
def test_unit_rescaling_leaves_k(w, seed, scale, col):
    native = np.random.default_rng(seed).uniform(-50, 200, (20, 7))
    k1 = unit_coefficients(w, normalize_matrix(native))
    name = FEATURES[col]
    lo, hi = FEATURE_RANGES[name]
    b = FeatureBounds(ranges={**FEATURE_RANGES, name: (lo * scale, hi * scale)})
    scaled = native.copy()
    scaled[:, col] *= scale
    np.testing.assert_allclose(unit_coefficients(w, normalize_matrix(scaled, b), b), k1, atol=1e-12)


# -- hybrid probability ------------------------------------------------------------


def test_identity_correction():
    p = [0.1, 0.02, 0.3]
    assert comprehensive_corridor_probability(p, [1, 1, 1]) == pytest.approx(series_probability(p))


def test_single_unit_example():
    assert comprehensive_corridor_probability([0.5], [1.4]) == pytest.approx(0.7)


def test_clamped_product():
    assert comprehensive_corridor_probability([0.8, 0.1], [1.4, 1.0]) == 1.0


def test_shape_mismatch():
    with pytest.raises(ValidationError):
        comprehensive_corridor_probability([0.1, 0.2], [1.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0.9, 1.4), st.floats(0, 0.5)), min_size=1, max_size=20))
def test_hybrid_monotone(rows):
    p = np.array([r[0] for r in rows])
    k = np.array([r[1] for r in rows])
    bump = np.array([r[2] for r in rows])
    base = comprehensive_corridor_probability(p, k)
    assert 0.0 <= base <= 1.0
    assert comprehensive_corridor_probability(p, np.minimum(k + bump, K_MAX)) >= base - 1e-15
    assert comprehensive_corridor_probability(np.minimum(p + bump, 1.0), k) >= base - 1e-15
    if np.all(k > 1):
        assert base >= series_probability(p) - 1e-15


# -- network level --------------------------------------------------------------------


def test_network_features_shape_and_dump(tmp_path):
    net = three_bus()
    n = sum(len(c.units) for c in net.corridors)
    native = network_features(net, np.full(n, 30.0))
    assert native.shape == (n, 7)
    first = net.corridors[0].units[0]
    np.testing.assert_allclose(native[0], [30.0, 27.08 * first.rainfall_24h ** 0.6021, first.altitude,
                                           first.slope, first.wind_angle, first.v_design_tower,
                                           first.operation_years])
    with pytest.raises(ValidationError):
        network_features(net, np.zeros(n + 1))
    signed = normalize_matrix(native)
    omega = FeatureWeightVector("u", tuple(UNIFORM))
    ks = unit_coefficients(omega, signed)
    write_correction_dump(tmp_path / "k.csv", native, signed, ks, omega, ["x"])
    lines = (tmp_path / "k.csv").read_text().splitlines()
    assert len(lines) == n + 2 and lines[1].startswith("unit,max_wind")


def test_signs_follow_correlation():
    assert [f for f in FEATURES if SIGNS[f] < 0] == ["design_wind", "operation_time"]
