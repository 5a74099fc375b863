import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from typhoon_resilience.errors import DomainError
from typhoon_resilience.windfield import (
    GeoPoint,
    TyphoonTrack,
    haversine_km,
    max_wind_radius,
    max_wind_speed,
    pressure_difference,
    radial_profile,
    rhumb_destination,
    storm_center,
    time_grid,
    track_series,
    wind_at,
)


def track(**kw):
    base = dict(landfall_lat=21.8, landfall_lon=112.7, delta_p0=58.0, v_t=8.33, heading=0.0, duration=3000.0)
    base.update(kw)
    return TyphoonTrack(**base)


# -- pressure_difference ------------------------------------------------------


def test_pressure_at_landfall_is_initial():
    assert pressure_difference(track(heading=0.0), 0.0) == 58.0


def test_pressure_decay_due_east_after_an_hour():
    assert pressure_difference(track(heading=90.0), 60.0) == pytest.approx(55.6, abs=1e-12)


def test_pressure_clamps_at_zero():
    assert pressure_difference(track(heading=90.0), 2000.0) == 0.0


def test_negative_time_rejected():
    with pytest.raises(DomainError):
        pressure_difference(track(), -1.0)
    with pytest.raises(DomainError):
        max_wind_speed(track(), -0.5)


# -- max_wind_speed -------------------------------------------------------------


def test_max_wind_at_landfall_matches_hand_value():
    assert max_wind_speed(track(), 0.0) == pytest.approx(0.865 * 6.93 * math.sqrt(58) + 4.165, abs=1e-12)
    assert max_wind_speed(track(), 0.0) == pytest.approx(49.8, abs=0.1)


def test_max_wind_zero_deficit_stationary():
    t = track(delta_p0=1.0, v_t=0.0, heading=90.0)
    assert max_wind_speed(t, 2000.0) == 0.0


def test_max_wind_small_deficit():
    assert max_wind_speed(track(delta_p0=4.0, v_t=0.0), 0.0) == pytest.approx(11.99, abs=0.01)


# -- max_wind_radius ------------------------------------------------------------


def test_radius_at_landfall():
    assert max_wind_radius(track(), 0.0) == pytest.approx(math.exp(2.63 - 5.086e-5 * 58**2 + 0.0395 * 21.8))
    assert max_wind_radius(track(), 0.0) == pytest.approx(27.6, abs=0.1)


def test_radius_with_vanishing_terms():
    t = track(landfall_lat=0.0, delta_p0=1.0, heading=90.0)
    assert max_wind_radius(t, 2000.0, center_lat=0.0) == pytest.approx(13.87, abs=0.01)


def test_radius_strong_storm_higher_latitude():
    t = track(landfall_lat=25.0, delta_p0=100.0)
    assert max_wind_radius(t, 0.0) == pytest.approx(22.4, abs=0.05)


# -- storm_center -----------------------------------------------------------------


def test_center_at_landfall():
    c = storm_center(track(), 0.0)
    assert (c.lat, c.lon) == pytest.approx((21.8, 112.7), abs=1e-12)


def test_center_due_north():
    t = track(v_t=10.0, heading=0.0)
    c = storm_center(t, 60.0)
    assert c.lon == pytest.approx(112.7, abs=1e-12)
    assert float(haversine_km(21.8, 112.7, c.lat, c.lon)) == pytest.approx(36.0, rel=1e-9)


def test_center_due_east_keeps_latitude():
    c = storm_center(track(heading=90.0), 600.0)
    assert c.lat == pytest.approx(21.8, abs=1e-3)


def test_center_outside_lifetime_rejected():
    with pytest.raises(DomainError):
        storm_center(track(duration=100.0), 101.0)
    with pytest.raises(DomainError):
        wind_at(track(duration=100.0), GeoPoint(22, 113), 150.0)


@settings(max_examples=200, deadline=None)
@given(heading=st.floats(0, 359.99), v_t=st.floats(0.5, 20), t=st.floats(1, 600))
def test_center_distance_matches_travel(heading, v_t, t):
    tr = track(heading=heading, v_t=v_t)
    c = storm_center(tr, t)
    d = float(haversine_km(tr.landfall_lat, tr.landfall_lon, c.lat, c.lon))
    assert d == pytest.approx(v_t * t * 0.06, rel=1e-3)


# -- wind_at / radial profile -------------------------------------------------


def _point_at_distance(tr, t, d_km):
    c = storm_center(tr, t)
    lat, lon = rhumb_destination(c.lat, c.lon, 0.0, d_km)
    return GeoPoint(float(lat), float(lon))


def test_wind_at_radius_equals_vmax():
    assert float(radial_profile(40.0, 25.0, 25.0)) == 40.0


def test_wind_at_eye_is_calm():
    tr = track()
    s = wind_at(tr, storm_center(tr, 0.0), 0.0)
    assert s.speed == 0.0 and s.center_distance == 0.0


def test_wind_at_twice_radius():
    v = float(radial_profile(40.0, 25.0, 50.0))
    assert v == pytest.approx(40.0 * 0.5**0.6, rel=1e-12)
    assert 0.5**0.6 == pytest.approx(0.6598, abs=1e-4)


def test_wind_sample_fields():
    tr = track()
    p = _point_at_distance(tr, 30.0, 40.0)
    s = wind_at(tr, p, 30.0)
    assert s.center_distance == pytest.approx(40.0, rel=1e-6)
    assert s.rmax == pytest.approx(max_wind_radius(tr, 30.0))
    assert s.speed >= 0 and s.time == 30.0 and s.point == p


@settings(max_examples=100, deadline=None)
@given(v=st.floats(1, 80), r=st.floats(5, 80), d1=st.floats(0, 500), d2=st.floats(0, 500))
def test_profile_monotone_on_each_side(v, r, d1, d2):
    lo, hi = sorted((d1, d2))
    a, b = float(radial_profile(v, r, lo)), float(radial_profile(v, r, hi))
    if hi <= r:
        assert a <= b + 1e-12
    elif lo >= r:
        assert b <= a + 1e-12


@settings(max_examples=100, deadline=None)
@given(dp=st.floats(1, 120), heading=st.floats(0, 359.9), t=st.floats(0, 3000))
def test_pressure_nonincreasing(dp, heading, t):
    tr = track(delta_p0=dp, heading=heading, duration=5000.0)
    assert pressure_difference(tr, t + 10.0) <= pressure_difference(tr, t)


def test_pressure_reaches_zero_in_finite_time():
    tr = track(heading=0.0)  # 0.02 hPa/min
    assert pressure_difference(tr, 58.0 / 0.02 + 1) == 0.0


def test_track_series_matches_scalar_functions():
    tr = track(heading=300.0, duration=600.0)
    times = time_grid(600.0, 60.0)
    lat, lon, vmax, rmax = track_series(tr, times)
    for i, t in enumerate(times):
        c = storm_center(tr, t)
        assert (lat[i], lon[i]) == pytest.approx((c.lat, c.lon), abs=1e-12)
        assert vmax[i] == pytest.approx(max_wind_speed(tr, t), rel=1e-14)
        assert rmax[i] == pytest.approx(max_wind_radius(tr, t), rel=1e-14)


def test_time_grid_includes_end():
    g = time_grid(100.0, 30.0)
    assert list(g) == [0.0, 30.0, 60.0, 90.0, 100.0]


def test_track_validation():
    with pytest.raises(DomainError):
        track(delta_p0=0.0)
    with pytest.raises(DomainError):
        track(heading=360.0)
    with pytest.raises(DomainError):
        track(v_t=-1.0)
    with pytest.raises(DomainError):
        GeoPoint(91.0, 0.0)
