"""Scenario-by-corridor failure probabilities, model-driven and hybrid."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .correction import FeatureBounds, network_features, normalize_matrix, unit_coefficients
from .grid_model import AnalysisGrid, Network, assign_cells
from .hazard import HazardParams, UnitArrays, storm_exposure


@dataclass(frozen=True)
class CorridorProbabilities:
    """Rows are scenarios, columns corridors in network order."""

    corridor_ids: tuple[int, ...]
    model: np.ndarray
    hybrid: np.ndarray
    k_mean: np.ndarray
    max_wind: np.ndarray


def _corridor_failure(p_units: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        logs = np.log1p(-np.minimum(p_units, 1.0))
    return -np.expm1(np.add.reduceat(logs, offsets[:-1]))


def corridor_probabilities(network: Network, tracks, omega, params: HazardParams | None = None,
                           grid: AnalysisGrid | None = None, bounds: FeatureBounds | None = None,
                           rainfall_24h: float | None = None, threads: int = 1) -> CorridorProbabilities:
    """Model-driven and corrected corridor probabilities for each storm track.

    ``omega`` is the selected feature-weight vector.  Per-unit probabilities
    combine line and tower failure; the correction multiplies each unit's
    probability by its ``k`` (capped at 1) before the series combination.
    """
    params = params or HazardParams()
    grid = grid or assign_cells(network)
    arrays = UnitArrays(network, grid, params)
    offsets = arrays.offsets
    static = network_features(network, np.zeros(len(arrays.span)), rainfall_24h)

    def one(track):
        exp = storm_exposure(track, arrays, params)
        p_unit = exp.p_unit
        native = static.copy()
        native[:, 0] = exp.max_wind
        k = unit_coefficients(omega, normalize_matrix(native, bounds), bounds)
        model = -np.expm1(-np.add.reduceat(exp.line_int + exp.tower_int, offsets[:-1]))
        hybrid = _corridor_failure(k * p_unit, offsets)
        k_mean = np.add.reduceat(k, offsets[:-1]) / np.diff(offsets)
        wmax = np.maximum.reduceat(exp.max_wind, offsets[:-1])
        return model, hybrid, k_mean, wmax

    tracks = [getattr(t, "track", t) for t in tracks]
    if threads > 1 and len(tracks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(one, tracks))
    else:
        rows = [one(t) for t in tracks]
    cols = [np.array([r[i] for r in rows]) for i in range(4)]
    return CorridorProbabilities(network.corridor_ids, *cols)
