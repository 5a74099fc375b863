"""Numpy implementations of the hot kernels.

Each function here has a twin with the same signature in ``_ckernels.pyx``.
"""

import numpy as np

EARTH_RADIUS_KM = 6371.0
TOWER_CLAMP = 1.0 - 1e-9


def wind_grid(c_lat, c_lon, vmax, rmax, p_lat, p_lon):
    """Wind speed (m/s) at every point and time step, shape (n_points, n_times)."""
    phi_c = np.radians(c_lat)[None, :]
    phi_p = np.radians(p_lat)[:, None]
    dlam = np.radians(c_lon[None, :] - p_lon[:, None])
    a = np.sin((phi_c - phi_p) / 2) ** 2 + np.cos(phi_p) * np.cos(phi_c) * np.sin(dlam / 2) ** 2
    d = 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.minimum(a, 1.0)))
    vm = vmax[None, :]
    rm = rmax[None, :]
    inner = vm * d / rm
    outer = vm * (rm / np.where(d > rm, d, rm)) ** 0.6
    return np.where(d <= rm, inner, outer)


def line_rate(v, vd_line, span):
    return np.exp(11.0 * v / vd_line - 18.0) * span


def tower_rate(v, vd_tower, gamma):
    mid = np.exp(gamma * (v - 2.0 * vd_tower))
    return np.where(v <= vd_tower, 0.0, np.where(v <= 2.0 * vd_tower, mid, 1.0))


def tower_hazard(lam):
    lam = np.minimum(lam, TOWER_CLAMP)
    return lam / (1.0 - lam)


def _trapz(y, times_h):
    dt = np.diff(times_h)
    return ((y[..., 1:] + y[..., :-1]) * 0.5 * dt).sum(axis=-1)


def unit_hazard_integrals(wind, times_h, cell_of_unit, span, vd_line, vd_tower, gamma):
    """Time integrals of the line rate and the tower hazard for each unit.

    ``wind`` is indexed by cell; each unit reads the row of its cell.
    Returns ``(line_integral, tower_integral)``, both dimensionless.
    """
    v = wind[cell_of_unit]
    lr = line_rate(v, vd_line[:, None], span[:, None])
    th = tower_hazard(tower_rate(v, vd_tower[:, None], gamma[:, None]))
    return _trapz(lr, times_h), _trapz(th, times_h)


def best_split(x, y, min_leaf):
    """Best threshold on one feature for a binary-labelled node.

    ``x`` holds feature values and ``y`` labels in {0, 1}.  Returns
    ``(threshold, weighted_child_gini)``; threshold is NaN when no split
    leaves at least ``min_leaf`` samples on both sides.
    """
    n = x.shape[0]
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order].astype(float)
    ones_left = np.cumsum(ys)[:-1]
    n_left = np.arange(1, n, dtype=float)
    n_right = n - n_left
    ones_right = ys.sum() - ones_left
    p_l = ones_left / n_left
    p_r = ones_right / n_right
    gini_l = 2.0 * p_l * (1.0 - p_l)
    gini_r = 2.0 * p_r * (1.0 - p_r)
    cost = (n_left * gini_l + n_right * gini_r) / n
    valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return float("nan"), float("inf")
    cost = np.where(valid, cost, np.inf)
    i = int(np.argmin(cost))
    return 0.5 * (xs[i] + xs[i + 1]), float(cost[i])
