# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, asin, sqrt, exp, pow, fmin, INFINITY, NAN, M_PI

cnp.import_array()

cdef double EARTH_RADIUS_KM = 6371.0
cdef double TOWER_CLAMP = 1.0 - 1e-9
cdef double DEG = M_PI / 180.0


def wind_grid(const double[:] c_lat, const double[:] c_lon, const double[:] vmax,
              const double[:] rmax, const double[:] p_lat, const double[:] p_lon):
    cdef Py_ssize_t nt = c_lat.shape[0], npt = p_lat.shape[0], i, j
    out = np.empty((npt, nt), dtype=np.float64)
    cdef double[:, ::1] w = out
    cdef double phi_p, phi_c, s1, s2, a, d, rm
    for i in range(npt):
        phi_p = p_lat[i] * DEG
        for j in range(nt):
            phi_c = c_lat[j] * DEG
            s1 = sin((phi_c - phi_p) / 2)
            s2 = sin((c_lon[j] - p_lon[i]) * DEG / 2)
            a = s1 * s1 + cos(phi_p) * cos(phi_c) * s2 * s2
            d = 2 * EARTH_RADIUS_KM * asin(sqrt(fmin(a, 1.0)))
            rm = rmax[j]
            if d <= rm:
                w[i, j] = vmax[j] * d / rm
            else:
                w[i, j] = vmax[j] * pow(rm / d, 0.6)
    return out


cdef inline double _tower_hazard(double v, double vd, double gamma) nogil:
    cdef double lam
    if v <= vd:
        return 0.0
    if v <= 2.0 * vd:
        lam = exp(gamma * (v - 2.0 * vd))
    else:
        lam = 1.0
    lam = fmin(lam, TOWER_CLAMP)
    return lam / (1.0 - lam)


def unit_hazard_integrals(const double[:, :] wind, const double[:] times_h,
                          const cnp.int64_t[:] cell_of_unit, const double[:] span,
                          const double[:] vd_line, const double[:] vd_tower,
                          const double[:] gamma):
    cdef Py_ssize_t nu = cell_of_unit.shape[0], nt = times_h.shape[0], u, j
    line_out = np.zeros(nu, dtype=np.float64)
    tower_out = np.zeros(nu, dtype=np.float64)
    cdef double[::1] lo = line_out, to = tower_out
    cdef double prev_l, prev_t, cur_l, cur_t, acc_l, acc_t, v, dt
    cdef cnp.int64_t c
    for u in range(nu):
        c = cell_of_unit[u]
        v = wind[c, 0]
        prev_l = exp(11.0 * v / vd_line[u] - 18.0) * span[u]
        prev_t = _tower_hazard(v, vd_tower[u], gamma[u])
        acc_l = 0.0
        acc_t = 0.0
        for j in range(1, nt):
            v = wind[c, j]
            cur_l = exp(11.0 * v / vd_line[u] - 18.0) * span[u]
            cur_t = _tower_hazard(v, vd_tower[u], gamma[u])
            dt = times_h[j] - times_h[j - 1]
            acc_l += (cur_l + prev_l) * 0.5 * dt
            acc_t += (cur_t + prev_t) * 0.5 * dt
            prev_l = cur_l
            prev_t = cur_t
        lo[u] = acc_l
        to[u] = acc_t
    return line_out, tower_out


def best_split(const double[:] x, const cnp.int64_t[:] y, Py_ssize_t min_leaf):
    cdef Py_ssize_t n = x.shape[0], i
    order = np.argsort(np.asarray(x), kind="stable")
    cdef const cnp.int64_t[:] o = order
    cdef double total = 0.0, ones_left = 0.0, nl, nr, pl, pr, gl, gr, cost
    cdef double best_cost = INFINITY, best_thr = NAN
    for i in range(n):
        total += y[i]
    for i in range(n - 1):
        ones_left += y[o[i]]
        nl = i + 1
        nr = n - nl
        if nl < min_leaf or nr < min_leaf:
            continue
        if not x[o[i + 1]] > x[o[i]]:
            continue
        pl = ones_left / nl
        pr = (total - ones_left) / nr
        # same association as the numpy kernel so both pick identical splits
        gl = 2.0 * pl * (1.0 - pl)
        gr = 2.0 * pr * (1.0 - pr)
        cost = (nl * gl + nr * gr) / n
        if cost < best_cost:
            best_cost = cost
            best_thr = 0.5 * (x[o[i]] + x[o[i + 1]])
    return best_thr, best_cost
