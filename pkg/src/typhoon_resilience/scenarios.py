"""Discrete typhoon scenario set.

The central pressure difference, translation speed and heading are binned
independently; each bin's probability is a CDF difference and a scenario's
probability is the product over its three bins.  Landfall point, duration and
the wind-field constants come from a base track shared by every scenario.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .errors import DomainError, ValidationError
from .windfield import TyphoonTrack

log = logging.getLogger(__name__)

DEFAULT_PRUNE_FLOOR = 1e-8
PARAMS = ("delta_p0", "v_t", "heading")


@dataclass(frozen=True)
class ParamDistribution:
    """Log-normal (``median``, ``log_sd``) or a normal mixture (``weights``, ``means``, ``sds``)."""

    kind: str
    median: float = 1.0
    log_sd: float = 1.0
    weights: tuple[float, ...] = ()
    means: tuple[float, ...] = ()
    sds: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "lognormal":
            if not (self.median > 0 and self.log_sd > 0):
                raise ValidationError("log-normal needs median > 0 and log_sd > 0")
        elif self.kind == "normal_mixture":
            n = len(self.weights)
            if n == 0 or len(self.means) != n or len(self.sds) != n:
                raise ValidationError("mixture weights, means and sds must have equal nonzero length")
            if any(s <= 0 for s in self.sds) or any(w < 0 for w in self.weights):
                raise ValidationError("mixture sds must be positive and weights nonnegative")
            if abs(sum(self.weights) - 1.0) > 1e-9:
                raise ValidationError("mixture weights must sum to 1")
        else:
            raise ValidationError(f"unknown distribution kind {self.kind!r}")

    @classmethod
    def lognormal(cls, median: float, log_sd: float) -> "ParamDistribution":
        return cls("lognormal", median=median, log_sd=log_sd)

    @classmethod
    def mixture(cls, weights, means, sds) -> "ParamDistribution":
        return cls("normal_mixture", weights=tuple(weights), means=tuple(means), sds=tuple(sds))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "lognormal":
            return stats.lognorm.cdf(np.maximum(x, 0.0), s=self.log_sd, scale=self.median)
        return sum(w * stats.norm.cdf(x, loc=m, scale=s)
                   for w, m, s in zip(self.weights, self.means, self.sds))

    def to_dict(self) -> dict:
        if self.kind == "lognormal":
            return {"kind": self.kind, "median": self.median, "log_sd": self.log_sd}
        return {"kind": self.kind, "weights": list(self.weights), "means": list(self.means),
                "sds": list(self.sds)}

    @classmethod
    def from_dict(cls, d: dict) -> "ParamDistribution":
        d = dict(d)
        kind = d.pop("kind", None)
        if kind == "lognormal":
            return cls.lognormal(float(d["median"]), float(d["log_sd"]))
        if kind == "normal_mixture":
            return cls.mixture(d["weights"], d["means"], d["sds"])
        raise ValidationError(f"unknown distribution kind {kind!r}")


def default_distributions(shore_normal: float = 315.0) -> dict[str, ParamDistribution]:
    """Illustrative defaults, to be calibrated against local storm records."""
    return {
        "delta_p0": ParamDistribution.lognormal(40.0, 0.4),
        "v_t": ParamDistribution.lognormal(6.0, 0.3),
        "heading": ParamDistribution.mixture((0.5, 0.5), (shore_normal - 30.0, shore_normal + 30.0),
                                             (15.0, 15.0)),
    }


@dataclass(frozen=True)
class ParamBins:
    start: float
    step: float
    count: int

    def __post_init__(self):
        if not self.step > 0:
            raise ValidationError("bin step must be positive")
        if self.count < 1:
            raise ValidationError("need at least one bin")

    @classmethod
    def spanning(cls, lo: float, hi: float, count: int) -> "ParamBins":
        if not hi > lo:
            raise ValidationError(f"bin support [{lo}, {hi}] is empty")
        return cls(lo, (hi - lo) / count, count)

    @property
    def centers(self) -> np.ndarray:
        return self.start + self.step * (np.arange(self.count) + 0.5)

    @property
    def edges(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count + 1)


@dataclass(frozen=True)
class ScenarioGrid:
    delta_p0: ParamBins
    v_t: ParamBins
    heading: ParamBins

    @classmethod
    def default(cls, bins: int = 5, shore_normal: float = 315.0) -> "ScenarioGrid":
        return cls(ParamBins.spanning(10.0, 90.0, bins), ParamBins.spanning(2.0, 12.0, bins),
                   ParamBins.spanning(shore_normal - 90.0, shore_normal + 90.0, bins))

    def __getitem__(self, name: str) -> ParamBins:
        return getattr(self, name)


@dataclass(frozen=True)
class TyphoonScenario:
    index: tuple[int, int, int]
    track: TyphoonTrack
    p_w: float

    @property
    def label(self) -> str:
        return "s{}-{}-{}".format(*self.index)


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: tuple[TyphoonScenario, ...]
    coverage: float
    pruned_mass: float
    pruned_count: int

    def __len__(self):
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    def __getitem__(self, i):
        return self.scenarios[i]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([s.p_w for s in self.scenarios])


def bin_probability(dist: ParamDistribution, center: float, step: float) -> float:
    """Probability mass of ``[center - step/2, center + step/2]``."""
    if not step > 0:
        raise DomainError("bin step must be positive")
    lo, hi = center - step / 2.0, center + step / 2.0
    return float(max(0.0, dist.cdf(hi) - dist.cdf(lo)))


def bin_probabilities(dist: ParamDistribution, bins: ParamBins) -> np.ndarray:
    """All bin masses via one CDF evaluation per edge (adjacent bins telescope)."""
    return np.maximum(0.0, np.diff(dist.cdf(bins.edges)))


def scenario_set(dists: dict, grid: ScenarioGrid, base_track: TyphoonTrack,
                 prune_floor: float = DEFAULT_PRUNE_FLOOR) -> ScenarioSet:
    """Cartesian product of the bins, in lexicographic bin-index order."""
    probs = {}
    for name in PARAMS:
        bins = grid[name]
        if bins.count < 1:
            raise ValidationError(f"empty grid for {name}")
        probs[name] = bin_probabilities(dists[name], bins)
    if grid.delta_p0.centers.min() <= 0:
        raise ValidationError("pressure-difference bins must have positive centers")
    if grid.v_t.centers.min() < 0:
        raise ValidationError("translation-speed bins must be nonnegative")

    coverage = math.prod(float(p.sum()) for p in probs.values())
    out, pruned_mass, pruned = [], 0.0, 0
    counts = [grid[n].count for n in PARAMS]
    for idx in itertools.product(*(range(c) for c in counts)):
        p_w = probs["delta_p0"][idx[0]] * probs["v_t"][idx[1]] * probs["heading"][idx[2]]
        if p_w < prune_floor:
            pruned_mass += p_w
            pruned += 1
            continue
        track = replace(base_track,
                        delta_p0=float(grid.delta_p0.centers[idx[0]]),
                        v_t=float(grid.v_t.centers[idx[1]]),
                        heading=float(grid.heading.centers[idx[2]] % 360.0))
        out.append(TyphoonScenario(tuple(idx), track, float(p_w)))
    if pruned:
        log.info("pruned %d scenarios below %.1e carrying mass %.3e", pruned, prune_floor, pruned_mass)
    if not out:
        raise ValidationError("every scenario fell below the prune floor")
    return ScenarioSet(tuple(out), coverage, pruned_mass, pruned)


def write_manifest(scenarios: ScenarioSet, path, header_lines=()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# coverage={scenarios.coverage:.9f} pruned_mass={scenarios.pruned_mass:.3e} "
                 f"pruned_count={scenarios.pruned_count}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario", "delta_p0_hpa", "v_t_ms", "heading_deg", "p_w"])
        for s in scenarios:
            t = s.track
            w.writerow([s.label, f"{t.delta_p0:.4f}", f"{t.v_t:.4f}", f"{t.heading:.4f}", f"{s.p_w:.9e}"])
