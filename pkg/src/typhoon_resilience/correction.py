"""Data-driven correction of model-driven failure probabilities.

Each unit's seven feature factors are min-max normalized over their nominal
ranges (clamped) and signed, weighted into a composite score ``W``, and ``W``
is mapped affinely from its attainable interval onto ``k`` in [0.9, 1.4].  The
hybrid corridor probability applies ``k`` unit by unit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError
from .features import FEATURES, SIGNS, FEATURE_RANGES
from .featweights import FeatureWeightVector, rainfall_10min
from .grid_model import Network, TowerLineUnit

K_MIN, K_MAX = 0.9, 1.4


@dataclass(frozen=True)
class FeatureBounds:
    ranges: dict = field(default_factory=lambda: dict(FEATURE_RANGES))
    signs: dict = field(default_factory=lambda: dict(SIGNS))

    def __post_init__(self):
        for name in FEATURES:
            lo, hi = self.ranges[name]
            if not lo < hi:
                raise ValidationError(f"feature {name}: need min < max, got ({lo}, {hi})")
            if self.signs[name] not in (1, -1):
                raise ValidationError(f"feature {name}: sign must be +1 or -1")

    @property
    def lo(self) -> np.ndarray:
        return np.array([self.ranges[f][0] for f in FEATURES], dtype=float)

    @property
    def hi(self) -> np.ndarray:
        return np.array([self.ranges[f][1] for f in FEATURES], dtype=float)

    @property
    def sign(self) -> np.ndarray:
        return np.array([self.signs[f] for f in FEATURES], dtype=float)


@dataclass(frozen=True)
class CompositeScore:
    w: float
    bounds: tuple[float, float]


@dataclass(frozen=True)
class CorrectionCoefficient:
    unit_id: int
    k: float


def native_features(unit: TowerLineUnit, max_wind: float, rainfall_24h: float | None = None) -> np.ndarray:
    """Unit features in native units, FEATURES order.

    The rainfall entry is the 10-minute intensity converted from the 24 h
    total (the unit's own unless a scenario value is given).
    """
    r24 = unit.rainfall_24h if rainfall_24h is None else rainfall_24h
    return np.array([max_wind, rainfall_10min(r24), unit.altitude, unit.slope, unit.wind_angle,
                     unit.v_design_tower, unit.operation_years], dtype=float)


def normalize_matrix(native, bounds: FeatureBounds | None = None) -> np.ndarray:
    """Clamp, min-max scale and sign rows of native feature values."""
    bounds = bounds or FeatureBounds()
    x = np.asarray(native, dtype=float)
    z = (np.clip(x, bounds.lo, bounds.hi) - bounds.lo) / (bounds.hi - bounds.lo)
    return z * bounds.sign


def normalize_features(unit: TowerLineUnit, max_wind: float, rainfall_24h: float | None = None,
                       bounds: FeatureBounds | None = None) -> np.ndarray:
    return normalize_matrix(native_features(unit, max_wind, rainfall_24h), bounds)


def _weights(omega) -> np.ndarray:
    w = np.asarray(omega.weights if isinstance(omega, FeatureWeightVector) else omega, dtype=float)
    if w.shape != (len(FEATURES),):
        raise ValidationError(f"expected {len(FEATURES)} weights")
    return w


def boundary_scores(omega, bounds: FeatureBounds | None = None) -> tuple[float, float]:
    """(W_Bmin, W_Bmax): the score at the lowest and highest signed corners."""
    bounds = bounds or FeatureBounds()
    w = _weights(omega)
    pos = bounds.sign > 0
    return float(-w[~pos].sum()), float(w[pos].sum())


def composite_score(omega, x, bounds: FeatureBounds | None = None) -> CompositeScore:
    lo, hi = boundary_scores(omega, bounds)
    w = float(np.clip(np.dot(_weights(omega), np.asarray(x, dtype=float)), lo, hi))
    return CompositeScore(w, (lo, hi))


def correction_coefficient(w, w_bmin: float, w_bmax: float):
    if not w_bmax > w_bmin:
        raise DomainError(f"degenerate score bounds [{w_bmin}, {w_bmax}]")
    k = (K_MAX - K_MIN) * (np.asarray(w, dtype=float) - w_bmin) / (w_bmax - w_bmin) + K_MIN
    return float(k) if np.ndim(k) == 0 else k


def unit_coefficients(omega, signed, bounds: FeatureBounds | None = None) -> np.ndarray:
    """k for every row of a signed feature matrix."""
    lo, hi = boundary_scores(omega, bounds)
    w = np.clip(np.asarray(signed, dtype=float) @ _weights(omega), lo, hi)
    return correction_coefficient(w, lo, hi)


def network_features(network: Network, max_wind, rainfall_24h: float | None = None) -> np.ndarray:
    """Native feature matrix of every unit in corridor order.

    ``max_wind`` holds the storm-lifetime maximum wind at each unit's cell.
    """
    units = [u for c in network.corridors for u in c.units]
    max_wind = np.asarray(max_wind, dtype=float)
    if max_wind.shape != (len(units),):
        raise ValidationError("max_wind must hold one value per unit")
    out = np.empty((len(units), len(FEATURES)))
    out[:, 0] = max_wind
    r24 = np.array([u.rainfall_24h if rainfall_24h is None else rainfall_24h for u in units])
    if np.any(r24 < 0):
        raise DomainError("rainfall must be nonnegative")
    out[:, 1] = 27.08 * r24 ** 0.6021
    out[:, 2] = [u.altitude for u in units]
    out[:, 3] = [u.slope for u in units]
    out[:, 4] = [u.wind_angle for u in units]
    out[:, 5] = [u.v_design_tower for u in units]
    out[:, 6] = [u.operation_years for u in units]
    return out


def comprehensive_corridor_probability(unit_probs, ks) -> float:
    """1 - prod(1 - min(1, k_i p_i)) over a corridor's units."""
    p = np.asarray(unit_probs, dtype=float)
    k = np.asarray(ks, dtype=float)
    if p.shape != k.shape:
        raise ValidationError("one correction coefficient per unit is required")
    pc = np.minimum(1.0, k * p)
    if np.any(pc >= 1.0):
        return 1.0
    return float(-np.expm1(np.sum(np.log1p(-pc))))


def write_correction_dump(path, native, signed, ks, omega, header_lines=()) -> None:
    w = np.asarray(signed) @ _weights(omega)
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["unit", *FEATURES, "W", "k"])
        for i, (row, wi, ki) in enumerate(zip(native, w, ks)):
            out.writerow([i, *(f"{v:.6g}" for v in row), f"{wi:.6f}", f"{ki:.6f}"])
