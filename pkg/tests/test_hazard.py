import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toynets import single_corridor, three_bus
from typhoon_resilience.errors import DomainError, ValidationError
from typhoon_resilience.hazard import (
    HazardParams,
    HazardSeries,
    UnitFailure,
    corridor_failure,
    corridor_probability,
    cumulative_line_probability,
    cumulative_tower_probability,
    line_failure_rate,
    series_probability,
    tower_failure_rate,
    unit_series,
)
from typhoon_resilience.grid_model import assign_cells
from typhoon_resilience.windfield import TyphoonTrack


def series(rate, times, tower=None):
    rate = np.broadcast_to(np.asarray(rate, float), np.shape(times))
    tower = rate if tower is None else np.broadcast_to(np.asarray(tower, float), np.shape(times))
    return HazardSeries(0, np.asarray(times, float), rate, tower)


# -- rates ------------------------------------------------------------------


def test_line_rate_at_design_speed():
    assert line_failure_rate(30.0, 30.0, 1.0) == pytest.approx(math.exp(-7))
    assert line_failure_rate(30.0, 30.0, 1.0) == pytest.approx(9.119e-4, rel=1e-3)


def test_line_rate_in_calm_air():
    assert line_failure_rate(0.0, 30.0, 1.0) == pytest.approx(1.523e-8, rel=1e-3)


def test_line_rate_linear_in_span():
    assert line_failure_rate(25.0, 30.0, 2.0) == pytest.approx(2 * line_failure_rate(25.0, 30.0, 1.0))


def test_line_rate_rejects_bad_inputs():
    with pytest.raises(DomainError):
        line_failure_rate(10.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        line_failure_rate(10.0, 30.0, -1.0)


def test_tower_rate_branches():
    assert tower_failure_rate(35.0, 35.0) == 0.0
    assert tower_failure_rate(70.0, 35.0) == 1.0
    assert tower_failure_rate(52.5, 35.0) == pytest.approx(math.exp(-3))
    assert tower_failure_rate(100.0, 35.0) == 1.0
    assert tower_failure_rate(10.0, 35.0) == 0.0


def test_tower_rate_rejects_bad_design_speed():
    with pytest.raises(DomainError):
        tower_failure_rate(10.0, -1.0)


@settings(max_examples=100, deadline=None)
@given(v1=st.floats(0, 150), v2=st.floats(0, 150), vd=st.floats(15, 60))
def test_rates_monotone_in_wind(v1, v2, vd):
    lo, hi = sorted((v1, v2))
    assert line_failure_rate(lo, vd, 0.5) <= line_failure_rate(hi, vd, 0.5)
    assert tower_failure_rate(lo, vd) <= tower_failure_rate(hi, vd)


# -- cumulative probabilities ---------------------------------------------------


def test_zero_rate_gives_zero():
    t = np.linspace(0, 600, 11)
    assert cumulative_line_probability(series(0.0, t)) == 0.0
    assert cumulative_tower_probability(series(0.0, t)) == 0.0


def test_constant_line_rate_oracle():
    t = np.linspace(0, 600, 101)  # 10 h in minutes
    p = cumulative_line_probability(series(0.1, t))
    assert p == pytest.approx(1 - math.exp(-1), abs=1e-9)
    assert p == pytest.approx(0.6321, abs=1e-4)


def test_constant_tower_rate_oracle():
    t = np.linspace(0, 60, 13)
    assert cumulative_tower_probability(series(0.5, t)) == pytest.approx(1 - math.exp(-1), abs=1e-9)


def test_tower_rate_near_one_saturates():
    t = np.linspace(0, 60, 3)
    assert cumulative_tower_probability(series(1.0, t)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(rate=st.floats(0, 5), hours=st.floats(0.1, 48))
def test_constant_rate_quadrature(rate, hours):
    t = np.linspace(0, hours * 60, 17)
    assert cumulative_line_probability(series(rate, t)) == pytest.approx(1 - math.exp(-rate * hours), abs=1e-9)


def test_step_halving_changes_little():
    def p(n):
        t = np.linspace(0, 720, n)
        lam = 0.05 * (1 + np.sin(t / 120.0)) ** 2
        return cumulative_line_probability(series(lam, t))

    assert abs(p(121) - p(241)) < 1e-4


def test_cumulative_requires_two_samples():
    with pytest.raises(ValidationError):
        cumulative_line_probability(series(0.1, np.array([0.0])))
    with pytest.raises(ValidationError):
        cumulative_tower_probability(series(0.1, np.array([0.0, 0.0])))


def test_cumulative_monotone_in_window():
    t = np.linspace(0, 600, 61)
    lam = np.abs(np.sin(t / 50.0)) * 0.2
    ps = [cumulative_line_probability(series(lam[:k], t[:k])) for k in range(2, 62)]
    assert all(b >= a for a, b in zip(ps, ps[1:]))


# -- series combination ---------------------------------------------------------


def test_series_product():
    units = [UnitFailure(0, 0.1, 0.0), UnitFailure(1, 0.0, 0.1)]
    assert corridor_probability(units) == pytest.approx(0.19, abs=1e-12)


def test_series_all_zero_and_absorbing():
    assert series_probability([0.0, 0.0]) == 0.0
    assert series_probability([0.2, 1.0]) == 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 0.05), min_size=1, max_size=30))
def test_series_bounds(ps):
    p = series_probability(ps)
    assert max(ps) - 1e-15 <= p <= sum(ps) + 1e-15


# -- corridor failure under a storm -----------------------------------------


def storm(dp, **kw):
    base = dict(landfall_lat=22.0, landfall_lon=113.0, delta_p0=dp, v_t=6.0, heading=315.0, duration=360.0)
    base.update(kw)
    return TyphoonTrack(**base)


def test_corridor_failure_consistent_with_units():
    net = three_bus()
    cf = corridor_failure(net, storm(60.0), 1)
    assert len(cf.per_unit) == len(net.corridor(1).units)
    assert cf.p_model == pytest.approx(corridor_probability(cf.per_unit))
    assert 0.0 < cf.p_model < 1.0
    assert max(u.p_unit for u in cf.per_unit) <= cf.p_model + 1e-15


def test_stronger_storm_fails_more():
    net = single_corridor()
    ps = [corridor_failure(net, storm(dp), 1).p_model for dp in (20.0, 40.0, 60.0, 80.0)]
    assert all(b >= a for a, b in zip(ps, ps[1:]))


def test_unit_series_cumulative_nondecreasing():
    net = three_bus()
    params = HazardParams()
    times, wmax, lr, tr, cum = unit_series(storm(60.0), assign_cells(net), net, 3, params)
    assert np.all(np.diff(cum) >= 0)
    assert cum[-1] == pytest.approx(corridor_failure(net, storm(60.0), 3).p_model, rel=1e-9)


def test_fixed_gamma_is_used():
    p = HazardParams(gamma=0.5)
    assert np.all(p.gamma_for(np.array([30.0, 40.0])) == 0.5)
    assert HazardParams().gamma_for(30.0) == pytest.approx(0.2)
    with pytest.raises(ValidationError):
        HazardParams(step_min=0)
