"""AHP-WAA selection among feature-weight schemes.

The schemes' weights form a decision matrix (schemes x features).  Expert
pairwise judgments over the features give AHP relative weights ``q`` by
column normalization and row averaging; each scheme scores ``Y @ q`` and the
highest score wins (ties go to the lowest scheme index).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import SchemaError, ValidationError
from .features import FEATURES

log = logging.getLogger(__name__)

# Saaty random consistency index by matrix order
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.58, 4: 0.90, 5: 1.12, 6: 1.24, 7: 1.32, 8: 1.41,
                9: 1.45, 10: 1.49, 11: 1.51, 12: 1.48, 13: 1.56, 14: 1.57, 15: 1.59}
CR_WARN = 0.1


@dataclass(frozen=True)
class DecisionMatrix:
    values: np.ndarray
    schemes: tuple[str, ...]
    features: tuple[str, ...] = FEATURES

    def __post_init__(self):
        y = np.asarray(self.values, dtype=float)
        if y.ndim != 2 or y.shape != (len(self.schemes), len(self.features)):
            raise ValidationError("decision matrix shape disagrees with its labels")
        if np.any(y < 0):
            raise ValidationError("decision matrix entries must be nonnegative")
        bad = np.flatnonzero(np.abs(y.sum(axis=1) - 1.0) > 1e-6)
        if bad.size:
            raise ValidationError(f"rows {[self.schemes[i] for i in bad]} do not sum to 1")
        object.__setattr__(self, "values", y)

    @classmethod
    def from_schemes(cls, schemes) -> "DecisionMatrix":
        """Build from FeatureWeightVector-like objects (``scheme_name``, ``weights``)."""
        return cls(np.array([s.weights for s in schemes], dtype=float),
                   tuple(s.scheme_name for s in schemes))


@dataclass(frozen=True)
class PairwiseMatrix:
    a: np.ndarray
    features: tuple[str, ...] = FEATURES

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        w = len(self.features)
        if a.shape != (w, w):
            raise ValidationError(f"pairwise matrix must be {w}x{w}")
        if np.any(a <= 0):
            raise ValidationError("pairwise judgments must be positive")
        if not np.allclose(np.diag(a), 1.0, rtol=0, atol=1e-9):
            raise ValidationError("pairwise matrix diagonal must be 1")
        if not np.allclose(a, 1.0 / a.T, rtol=1e-9, atol=1e-9):
            raise ValidationError("pairwise matrix is not reciprocal (a_ij != 1/a_ji)")
        object.__setattr__(self, "a", a)

    def reordered(self, features) -> "PairwiseMatrix":
        idx = [self.features.index(f) for f in features]
        return PairwiseMatrix(self.a[np.ix_(idx, idx)], tuple(features))


@dataclass(frozen=True)
class SchemeScores:
    d: np.ndarray
    schemes: tuple[str, ...]

    @property
    def selected(self) -> int:
        return int(np.argmax(self.d))

    @property
    def selected_name(self) -> str:
        return self.schemes[self.selected]


def average_feature_weights(y: DecisionMatrix) -> np.ndarray:
    v = y.values
    return v.sum(axis=0) / v.sum()


def ahp_weights(a: PairwiseMatrix) -> tuple[np.ndarray, float]:
    """Relative weights and consistency ratio of a pairwise comparison matrix."""
    m = a.a
    w = m.shape[0]
    q = (m / m.sum(axis=0)).mean(axis=1)
    if w <= 2:
        return q, 0.0
    lam = float(np.mean((m @ q) / q))
    cr = max(0.0, (lam - w) / ((w - 1) * RANDOM_INDEX.get(w, 1.59)))
    if cr > CR_WARN:
        log.warning("pairwise matrix consistency ratio %.3f exceeds %.1f", cr, CR_WARN)
    return q, cr


def waa_scores(y: DecisionMatrix, q, q_features=None) -> SchemeScores:
    """Scheme scores ``Y @ q``.

    When ``q_features`` names the order of ``q``, it is aligned to the
    matrix's feature order first.
    """
    q = np.asarray(q, dtype=float)
    if q_features is not None:
        q = q[[list(q_features).index(f) for f in y.features]]
    if q.shape != (y.values.shape[1],):
        raise ValidationError(f"q has {q.shape[0]} entries, matrix has {y.values.shape[1]} features")
    return SchemeScores(y.values @ q, y.schemes)


def select_scheme(schemes, pairwise: PairwiseMatrix):
    """Run the whole selection; returns (scores, q aligned to FEATURES, CR)."""
    y = DecisionMatrix.from_schemes(schemes)
    q, cr = ahp_weights(pairwise)
    scores = waa_scores(y, q, pairwise.features)
    q_aligned = q[[list(pairwise.features).index(f) for f in y.features]]
    return scores, q_aligned, cr


# -- files ------------------------------------------------------------------


def _number(text: str) -> float:
    return float(Fraction(text.strip()))


def read_pairwise(path) -> PairwiseMatrix:
    """Square CSV grid; header row and first column name the features."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise SchemaError(f"{path}: empty pairwise matrix file")
    names = tuple(h.strip() for h in rows[0][1:])
    unknown = [n for n in names if n not in FEATURES]
    if unknown:
        raise SchemaError(f"{path}: unknown feature names {unknown}")
    body = rows[1:]
    if len(body) != len(names) or [r[0].strip() for r in body] != list(names):
        raise SchemaError(f"{path}: row labels must repeat the header order")
    try:
        a = np.array([[_number(v) for v in r[1:]] for r in body])
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{path}: {exc}") from None
    return PairwiseMatrix(a, names)


def write_scores(scores: SchemeScores, q, cr: float, path, header_lines=()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# consistency_ratio={cr:.6f}\n")
        fh.write("# q=" + ",".join(f"{f}:{v:.6f}" for f, v in zip(FEATURES, q)) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", "score", "selected"])
        for i, (name, d) in enumerate(zip(scores.schemes, scores.d)):
            w.writerow([name, f"{d:.6f}", int(i == scores.selected)])
