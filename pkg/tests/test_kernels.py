import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from typhoon_resilience import kernels

BACKENDS = kernels.backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")


def test_selected_backend_is_available():
    assert kernels.BACKEND in BACKENDS


def _storm(rng, nt=40, npt=60):
    c_lat = 21.8 + np.cumsum(rng.normal(0, 0.05, nt))
    c_lon = 112.7 + np.cumsum(rng.normal(0, 0.05, nt))
    vmax = rng.uniform(10, 60, nt)
    rmax = rng.uniform(10, 60, nt)
    p_lat = rng.uniform(20.5, 23.0, npt)
    p_lon = rng.uniform(111.5, 114.0, npt)
    return c_lat, c_lon, vmax, rmax, p_lat, p_lon


@needs_both
def test_wind_grid_backends_agree():
    args = _storm(np.random.default_rng(1))
    a = BACKENDS["python"].wind_grid(*args)
    b = BACKENDS["cython"].wind_grid(*args)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_wind_grid_point_on_center_is_calm():
    for mod in BACKENDS.values():
        w = mod.wind_grid(np.array([22.0]), np.array([113.0]), np.array([40.0]), np.array([20.0]),
                          np.array([22.0]), np.array([113.0]))
        assert w[0, 0] == 0.0


@needs_both
def test_hazard_integrals_backends_agree():
    rng = np.random.default_rng(2)
    nc, nt, nu = 7, 50, 30
    wind = rng.uniform(0, 70, (nc, nt))
    times = np.linspace(0, 12, nt)
    cells = rng.integers(0, nc, nu).astype(np.int64)
    span = rng.uniform(0.1, 0.5, nu)
    vdl = rng.uniform(25, 40, nu)
    vdt = rng.uniform(25, 40, nu)
    gamma = 6.0 / vdt
    a = BACKENDS["python"].unit_hazard_integrals(wind, times, cells, span, vdl, vdt, gamma)
    b = BACKENDS["cython"].unit_hazard_integrals(wind, times, cells, span, vdl, vdt, gamma)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-300)


@needs_both
@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 12), st.integers(0, 1)), min_size=2, max_size=60),
       st.integers(1, 5))
def test_best_split_backends_identical(rows, min_leaf):
    x = np.array([r[0] for r in rows], dtype=float)
    y = np.array([r[1] for r in rows], dtype=np.int64)
    ta, ca = BACKENDS["python"].best_split(x, y, min_leaf)
    tb, cb = BACKENDS["cython"].best_split(x, y, min_leaf)
    if np.isnan(ta):
        assert np.isnan(tb)
    else:
        assert (ta, ca) == (tb, cb)


def test_best_split_separable():
    x = np.array([1.0, 2.0, 3.0, 10.0, 11.0, 12.0])
    y = np.array([0, 0, 0, 1, 1, 1], dtype=np.int64)
    for mod in BACKENDS.values():
        thr, cost = mod.best_split(x, y, 1)
        assert thr == 6.5 and cost == 0.0


def test_best_split_constant_feature_has_no_split():
    x = np.ones(5)
    y = np.array([0, 1, 0, 1, 1], dtype=np.int64)
    for mod in BACKENDS.values():
        thr, cost = mod.best_split(x, y, 1)
        assert np.isnan(thr) and cost == np.inf
