"""Model-driven failure probabilities of tower-line units and corridors.

Lines fail at an exponential per-hour rate in the ratio of wind speed to
design speed, scaled by span length.  Towers follow a three-branch fragility
curve.  Both rates are integrated over the storm lifetime (trapezoid rule, time
in hours) into cumulative probabilities, and a corridor fails if any of its
units does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, ValidationError
from .grid_model import AnalysisGrid, Network, assign_cells
from .windfield import TyphoonTrack, time_grid, track_series

TOWER_CLAMP = 1.0 - 1e-9
DEFAULT_GAMMA_FACTOR = 6.0


@dataclass(frozen=True)
class HazardParams:
    """Integration step (minutes) and tower fragility steepness.

    ``gamma`` fixes the tower coefficient in 1/(m/s) for every unit; when it
    is None each unit uses ``gamma_factor / v_design_tower``.
    """

    step_min: float = 6.0
    gamma: float | None = None
    gamma_factor: float = DEFAULT_GAMMA_FACTOR

    def __post_init__(self):
        if not self.step_min > 0:
            raise ValidationError("hazard time step must be positive")
        if self.gamma is not None and not self.gamma > 0:
            raise ValidationError("gamma must be positive")
        if not self.gamma_factor > 0:
            raise ValidationError("gamma_factor must be positive")

    def gamma_for(self, v_design_tower):
        if self.gamma is not None:
            return np.full_like(np.asarray(v_design_tower, dtype=float), self.gamma)
        return self.gamma_factor / np.asarray(v_design_tower, dtype=float)


@dataclass(frozen=True)
class HazardSeries:
    unit_id: int
    times: np.ndarray
    line_rate: np.ndarray
    tower_rate: np.ndarray


@dataclass(frozen=True)
class UnitFailure:
    unit_id: int
    p_line: float
    p_tower: float

    @property
    def p_unit(self) -> float:
        return 1.0 - (1.0 - self.p_line) * (1.0 - self.p_tower)


@dataclass(frozen=True)
class CorridorFailure:
    corridor_id: int
    p_model: float
    per_unit: tuple[UnitFailure, ...]
    max_wind: np.ndarray | None = None


def line_failure_rate(v, v_design_line, span_km):
    """Per-hour failure rate of one line span."""
    if np.any(np.asarray(v_design_line) <= 0):
        raise DomainError("line design wind speed must be positive")
    if np.any(np.asarray(span_km) <= 0):
        raise DomainError("span length must be positive")
    if np.any(np.asarray(v) < 0):
        raise DomainError("wind speed must be nonnegative")
    out = np.exp(11.0 * np.asarray(v, dtype=float) / v_design_line - 18.0) * span_km
    return float(out) if np.ndim(out) == 0 else out


def tower_failure_rate(v, v_design_tower, gamma=None):
    """Tower failure probability at wind speed ``v``.

    Zero up to the design speed, exponential up to twice the design speed,
    one beyond.  ``gamma`` defaults to ``6 / v_design_tower``.
    """
    if np.any(np.asarray(v_design_tower) <= 0):
        raise DomainError("tower design wind speed must be positive")
    if gamma is None:
        gamma = DEFAULT_GAMMA_FACTOR / np.asarray(v_design_tower, dtype=float)
    if np.any(np.asarray(gamma) <= 0):
        raise DomainError("gamma must be positive")
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise DomainError("wind speed must be nonnegative")
    mid = np.exp(gamma * (v - 2.0 * v_design_tower))
    out = np.where(v <= v_design_tower, 0.0, np.where(v <= 2.0 * v_design_tower, mid, 1.0))
    return float(out) if out.ndim == 0 else out


def _hours(times_min) -> np.ndarray:
    t = np.asarray(times_min, dtype=float) / 60.0
    if t.size < 2:
        raise ValidationError("need at least two time samples to integrate")
    if np.any(np.diff(t) <= 0):
        raise ValidationError("times must be strictly increasing")
    return t


def _trapz(y, t):
    return float(np.sum((y[1:] + y[:-1]) * 0.5 * np.diff(t)))


def cumulative_line_probability(series: HazardSeries) -> float:
    t = _hours(series.times)
    return float(-math.expm1(-_trapz(np.asarray(series.line_rate, dtype=float), t)))


def cumulative_tower_probability(series: HazardSeries) -> float:
    t = _hours(series.times)
    lam = np.minimum(np.asarray(series.tower_rate, dtype=float), TOWER_CLAMP)
    return float(-math.expm1(-_trapz(lam / (1.0 - lam), t)))


def series_probability(unit_probs) -> float:
    """Probability that at least one element fails, elements independent."""
    p = np.asarray(unit_probs, dtype=float)
    if np.any(p >= 1.0):
        return 1.0
    return float(-np.expm1(np.sum(np.log1p(-p))))


class UnitArrays:
    """Flattened per-unit inputs of a network, in corridor order."""

    def __init__(self, network: Network, grid: AnalysisGrid, params: HazardParams):
        self.corridor_ids = network.corridor_ids
        units = [u for c in network.corridors for u in c.units]
        self.offsets = np.cumsum([0] + [len(c.units) for c in network.corridors])
        self.cell = np.concatenate([grid.unit_cell[c.id] for c in network.corridors]).astype(np.int64)
        self.span = np.array([u.span_km for u in units])
        self.vd_line = np.array([u.v_design_line for u in units])
        self.vd_tower = np.array([u.v_design_tower for u in units])
        self.gamma = np.asarray(params.gamma_for(self.vd_tower), dtype=float)
        self.grid = grid

    def slice(self, corridor_id: int) -> slice:
        k = self.corridor_ids.index(corridor_id)
        return slice(int(self.offsets[k]), int(self.offsets[k + 1]))


@dataclass(frozen=True)
class StormExposure:
    """Per-unit results of one storm over a whole network.

    ``line_int``/``tower_int`` are the integrated hazards (so the cumulative
    probabilities are ``1 - exp(-integral)``); ``max_wind`` is the lifetime
    maximum wind at each unit's cell.
    """

    line_int: np.ndarray
    tower_int: np.ndarray
    max_wind: np.ndarray

    @property
    def p_line(self) -> np.ndarray:
        return -np.expm1(-self.line_int)

    @property
    def p_tower(self) -> np.ndarray:
        return -np.expm1(-self.tower_int)

    @property
    def p_unit(self) -> np.ndarray:
        return -np.expm1(-(self.line_int + self.tower_int))


def cell_wind(track: TyphoonTrack, grid: AnalysisGrid, times_min: np.ndarray) -> np.ndarray:
    """Wind at every cell center and time step, shape (n_cells, n_times)."""
    c_lat, c_lon, vmax, rmax = track_series(track, times_min)
    return kernels.wind_grid(c_lat, c_lon, vmax, rmax,
                             np.ascontiguousarray(grid.cell_lat, dtype=float),
                             np.ascontiguousarray(grid.cell_lon, dtype=float))


def storm_exposure(track: TyphoonTrack, arrays: UnitArrays, params: HazardParams) -> StormExposure:
    times = time_grid(track.duration, params.step_min)
    wind = cell_wind(track, arrays.grid, times)
    line_int, tower_int = kernels.unit_hazard_integrals(
        wind, times / 60.0, arrays.cell, arrays.span, arrays.vd_line, arrays.vd_tower, arrays.gamma)
    return StormExposure(np.asarray(line_int), np.asarray(tower_int), wind.max(axis=1)[arrays.cell])


def corridor_failure(network: Network, track: TyphoonTrack, corridor_id: int,
                     params: HazardParams | None = None,
                     grid: AnalysisGrid | None = None) -> CorridorFailure:
    """Model-driven failure probability of one corridor under one storm."""
    params = params or HazardParams()
    network.corridor(corridor_id)
    grid = grid or assign_cells(network)
    arrays = UnitArrays(network, grid, params)
    exp = storm_exposure(track, arrays, params)
    sl = arrays.slice(corridor_id)
    per_unit = tuple(UnitFailure(i, float(pl), float(pt))
                     for i, (pl, pt) in enumerate(zip(exp.p_line[sl], exp.p_tower[sl])))
    return CorridorFailure(corridor_id, corridor_probability(per_unit), per_unit, exp.max_wind[sl])


def corridor_probability(per_unit) -> float:
    """Series combination over towers and line sections."""
    towers = [u.p_tower for u in per_unit]
    lines = [u.p_line for u in per_unit]
    return series_probability(towers + lines)


def unit_series(track: TyphoonTrack, grid: AnalysisGrid, network: Network, corridor_id: int,
                params: HazardParams):
    """Time series along one corridor for plotting and dumps.

    Returns (times_min, max wind over the corridor's cells, summed line rate,
    max tower rate, cumulative corridor probability up to each time).
    """
    corridor = network.corridor(corridor_id)
    times = time_grid(track.duration, params.step_min)
    wind = cell_wind(track, grid, times)[grid.unit_cell[corridor_id]]
    vd_l = np.array([u.v_design_line for u in corridor.units])[:, None]
    vd_t = np.array([u.v_design_tower for u in corridor.units])[:, None]
    span = np.array([u.span_km for u in corridor.units])[:, None]
    gamma = np.asarray(params.gamma_for(vd_t), dtype=float)
    lr = np.exp(11.0 * wind / vd_l - 18.0) * span
    tr = np.where(wind <= vd_t, 0.0, np.where(wind <= 2 * vd_t, np.exp(gamma * (wind - 2 * vd_t)), 1.0))
    th = np.minimum(tr, TOWER_CLAMP)
    th = th / (1.0 - th)
    total = (lr + th).sum(axis=0)
    dt = np.diff(times / 60.0)
    cum = np.concatenate([[0.0], np.cumsum((total[1:] + total[:-1]) * 0.5 * dt)])
    return times, wind.max(axis=0), lr.sum(axis=0), tr.max(axis=0), -np.expm1(-cum)
