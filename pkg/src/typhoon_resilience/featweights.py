"""Feature-weight schemes for the data-driven correction.

Three schemes weigh the seven feature factors: forest Gini importance, forest
out-of-bag permutation importance, and the entropy weight method.  This
module also holds the fault-sample container and file format, the 24 h to
10 min rainfall conversion, and a synthetic sample generator for running
without field data.

Labels follow the fault coding 0 = fault, 1 = no fault.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import forest
from .errors import DegenerateDataError, DomainError, SchemaError, ValidationError
from .features import FEATURES, SIGNS, FEATURE_RANGES

log = logging.getLogger(__name__)

FAULT, NO_FAULT = 0, 1
SCHEME_NAMES = ("gini", "oob", "entropy")


@dataclass(frozen=True)
class FaultSample:
    max_wind: float
    rainfall_intensity: float
    altitude: float
    slope: float
    wind_angle: float
    design_wind: float
    operation_time: float
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValidationError(f"label must be 0 or 1, got {self.label}")
        if not all(math.isfinite(getattr(self, f)) for f in FEATURES):
            raise ValidationError("feature values must be finite")

    def features(self) -> tuple[float, ...]:
        return tuple(getattr(self, f) for f in FEATURES)


@dataclass(frozen=True)
class FeatureWeightVector:
    scheme_name: str
    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(FEATURES),):
            raise ValidationError(f"expected {len(FEATURES)} weights, got {w.shape}")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValidationError(f"{self.scheme_name}: weights must be nonnegative and sum to 1")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURES, self.weights))

    def __getitem__(self, name: str) -> float:
        return self.weights[FEATURES.index(name)]


def to_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    """(features, labels) from a list of FaultSample or an (x, y) pair."""
    if isinstance(samples, tuple) and len(samples) == 2:
        return np.asarray(samples[0], dtype=float), np.asarray(samples[1], dtype=np.int64)
    x = np.array([s.features() for s in samples], dtype=float).reshape(-1, len(FEATURES))
    y = np.array([s.label for s in samples], dtype=np.int64)
    return x, y


def from_arrays(x, y) -> list[FaultSample]:
    return [FaultSample(*map(float, row), label=int(lab)) for row, lab in zip(x, y)]


def rainfall_10min(r24h: float) -> float:
    """Equivalent 10-minute rainfall intensity (mm/h) from a 24 h total (mm)."""
    if r24h < 0:
        raise DomainError(f"rainfall must be nonnegative, got {r24h}")
    return 27.08 * r24h ** 0.6021


def entropy_weights(matrix) -> np.ndarray:
    """Entropy weight of each column of an (n samples x m indicators) matrix."""
    x = np.asarray(matrix, dtype=float)
    n, m = x.shape
    if n < 2:
        raise DegenerateDataError("entropy weights need at least two samples")
    hi, lo = x.max(axis=0), x.min(axis=0)
    for j in range(m):
        if not hi[j] > lo[j]:
            name = FEATURES[j] if m == len(FEATURES) else f"column {j}"
            raise DegenerateDataError(f"feature {name} is constant; entropy weight undefined")
    z = (hi - x) / (hi - lo)
    p = z / z.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    e = -plogp.sum(axis=0) / math.log(n)
    d = 1.0 - e
    return d / d.sum()


# Logistic ground truth of the synthetic generator, on features scaled to
# [0, 1] over their nominal ranges.  Slope carries no signal.
SYNTHETIC_COEFFICIENTS = {
    "max_wind": 10.0,
    "rainfall_intensity": 5.0,
    "altitude": 4.0,
    "slope": 0.0,
    "wind_angle": 3.5,
    "design_wind": 3.5,
    "operation_time": 4.0,
}


@dataclass(frozen=True)
class SyntheticConfig:
    n: int = 640
    coefficients: tuple[tuple[str, float], ...] = tuple(SYNTHETIC_COEFFICIENTS.items())
    noise: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 10:
            raise ValidationError("synthetic sample count must be at least 10")
        if self.noise < 0:
            raise ValidationError("noise must be nonnegative")


def fault_logit(x: np.ndarray, coefficients: dict[str, float]) -> np.ndarray:
    """Log-odds of a fault under the synthetic ground truth."""
    out = np.zeros(x.shape[0])
    for j, name in enumerate(FEATURES):
        lo, hi = FEATURE_RANGES[name]
        z = (x[:, j] - lo) / (hi - lo)
        out += coefficients.get(name, 0.0) * SIGNS[name] * (z - 0.5)
    return out


def fault_probability(x: np.ndarray, coefficients: dict[str, float], noise: float) -> np.ndarray:
    logit = fault_logit(x, coefficients)
    if noise == 0:
        return (logit > 0).astype(float)
    return 1.0 / (1.0 + np.exp(-logit / noise))


def synthetic_arrays(config: SyntheticConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Features drawn uniformly over the nominal ranges, labels from the logistic truth.

    With ``noise == 0`` the label is the sign of the logit.
    """
    config = config or SyntheticConfig()
    rng = np.random.default_rng(config.seed)
    lo = np.array([FEATURE_RANGES[f][0] for f in FEATURES])
    hi = np.array([FEATURE_RANGES[f][1] for f in FEATURES])
    x = lo + (hi - lo) * rng.random((config.n, len(FEATURES)))
    p_fault = fault_probability(x, dict(config.coefficients), config.noise)
    fault = rng.random(config.n) < p_fault
    y = np.where(fault, FAULT, NO_FAULT).astype(np.int64)
    return x, y


def synthetic_samples(config: SyntheticConfig | None = None) -> list[FaultSample]:
    return from_arrays(*synthetic_arrays(config))


def compute_schemes(samples, forest_config: forest.ForestConfig | None = None,
                    permutation_seed: int | None = None, threads: int = 1):
    """Train a forest and return ([gini, oob, entropy] weight vectors, model)."""
    x, y = to_arrays(samples)
    forest_config = forest_config or forest.ForestConfig()
    model = forest.train_forest(x, y, forest_config, threads=threads)
    seed = forest_config.seed if permutation_seed is None else permutation_seed
    schemes = [
        FeatureWeightVector("gini", tuple(forest.gini_importance(model))),
        FeatureWeightVector("oob", tuple(forest.oob_importance(model, x, y, seed))),
        FeatureWeightVector("entropy", tuple(entropy_weights(x))),
    ]
    log.info("forest OOB accuracy %.3f", model.oob_accuracy(x, y))
    return schemes, model


# -- files ------------------------------------------------------------------


def read_samples(path) -> list[FaultSample]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise SchemaError(f"{path}: empty sample file")
    header = [h.strip() for h in rows[0]]
    missing = [c for c in (*FEATURES, "label") if c not in header]
    if missing:
        raise SchemaError(f"{path}: sample file missing columns {missing}")
    col = {name: header.index(name) for name in (*FEATURES, "label")}
    out = []
    for line_no, row in enumerate(rows[1:], start=2):
        try:
            vals = [float(row[col[f]]) for f in FEATURES]
            out.append(FaultSample(*vals, label=int(float(row[col["label"]]))))
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"{path}:{line_no}: {exc}") from None
    return out


def write_samples(samples, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*FEATURES, "label"])
        for s in samples:
            w.writerow([repr(v) for v in s.features()] + [s.label])


def write_weights(schemes, path, header_lines=()) -> None:
    """Weight table: one row per scheme, one column per feature."""
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", *FEATURES])
        for s in schemes:
            w.writerow([s.scheme_name, *(f"{v:.6f}" for v in s.weights)])


def read_weights(path) -> list[FeatureWeightVector]:
    """Read a weight table, renormalizing rows that are off from 1 by rounding."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    header = [h.strip() for h in rows[0]]
    if header[0] != "scheme" or sorted(header[1:]) != sorted(FEATURES):
        raise SchemaError(f"{path}: expected columns scheme,{','.join(FEATURES)}")
    out = []
    for row in rows[1:]:
        vals = dict(zip(header[1:], map(float, row[1:])))
        w = np.array([vals[f] for f in FEATURES])
        total = w.sum()
        if np.any(w < 0) or abs(total - 1.0) > 1e-2:
            raise ValidationError(f"{path}: scheme {row[0]} weights sum to {total:.4f}")
        if abs(total - 1.0) > 1e-9:
            log.warning("scheme %s weights sum to %.4f; renormalizing", row[0], total)
        out.append(FeatureWeightVector(row[0], tuple(w / total)))
    return out
