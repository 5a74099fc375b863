"""System and corridor resilience indices by impact-increment state enumeration.

The expected load shed over a scenario set is rewritten as

    R_sys = sum_w P_w sum_{|s| <= J} prod_{i in s} p_{w,i} * dI(s)

where ``dI(s)`` is the impact of fault state ``s`` minus the increments of all
its strict non-empty subsets.  At full order the sum is exact; truncating at
small ``J`` keeps only low-order interaction terms.  Impacts depend only on
the failed set, so one cache serves every scenario and every re-enumeration
with modified probabilities.
"""

from __future__ import annotations

import itertools
import logging
import math
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .grid_model import Network
from .loadshed import optimal_load_shed

log = logging.getLogger(__name__)

DEFAULT_ORDER = 2
DEFAULT_SKIP_FLOOR = 1e-12
# Impacts below the LP feasibility tolerance are solver noise.
IMPACT_SNAP = 1e-7


class ImpactCache:
    """Memoized load-shed impacts keyed by failed set.

    Each key is computed by exactly one caller; concurrent requests for the
    same key wait for that result.
    """

    def __init__(self, network: Network, weights: dict[int, float] | None = None):
        self.network = network
        self.weights = weights
        self._lock = threading.Lock()
        self._entries: dict[frozenset, Future] = {}
        self.solves = 0
        self.baseline = self._shed(frozenset())

    def _shed(self, failed: frozenset) -> float:
        v = optimal_load_shed(self.network, failed, self.weights).total_shed
        return 0.0 if abs(v) < IMPACT_SNAP else v

    def impact(self, failed) -> float:
        key = frozenset(failed)
        if not key:
            return 0.0
        with self._lock:
            fut = self._entries.get(key)
            owner = fut is None
            if owner:
                fut = Future()
                self._entries[key] = fut
                self.solves += 1
        if owner:
            try:
                v = self._shed(key) - self.baseline
                fut.set_result(0.0 if abs(v) < IMPACT_SNAP else v)
            except BaseException as exc:
                fut.set_exception(exc)
        return fut.result()

    def prefetch(self, states, threads: int = 1) -> None:
        states = [frozenset(s) for s in states]
        if threads > 1 and len(states) > 1:
            with ThreadPoolExecutor(threads) as pool:
                list(pool.map(self.impact, states))
        else:
            for s in states:
                self.impact(s)

    def preload(self, items) -> None:
        """Seed the cache with known impacts, e.g. from a previous run."""
        with self._lock:
            for key, value in items:
                key = frozenset(key)
                if key and key not in self._entries:
                    fut = Future()
                    fut.set_result(float(value))
                    self._entries[key] = fut

    def __len__(self):
        return len(self._entries)

    def items(self):
        with self._lock:
            keys = sorted(self._entries, key=lambda k: (len(k), sorted(k)))
        return [(k, self._entries[k].result()) for k in keys]


def impact(network: Network, state, cache: ImpactCache | None = None) -> float:
    """Shed of ``state`` above the intact-network baseline, MW."""
    cache = ImpactCache(network) if cache is None else cache
    return cache.impact(state)


def impact_increment(state, impacts: dict, increments: dict | None = None) -> float:
    """dI(s) = I(s) - sum of dI over strict non-empty subsets of s.

    ``impacts`` maps frozensets to impacts; ``increments`` (filled in place)
    must already hold every strict subset, which holds when states are
    processed by ascending cardinality.
    """
    s = frozenset(state)
    increments = {} if increments is None else increments
    total = impacts[s]
    items = sorted(s)
    for r in range(1, len(items)):
        for sub in itertools.combinations(items, r):
            key = frozenset(sub)
            if key not in increments:
                raise KeyError(f"increment of subset {sorted(key)} not available")
            total -= increments[key]
    increments[s] = total
    return total


@dataclass
class ResilienceReport:
    r_sys: float
    per_scenario: np.ndarray
    scenario_probabilities: np.ndarray
    order: int
    q0_baseline: float
    states_evaluated: int
    states_skipped: int
    skipped_mass: float
    lp_solves: int
    per_corridor: dict[int, float] = field(default_factory=dict)

    def sorted_corridors(self) -> list[tuple[int, float]]:
        return sorted(self.per_corridor.items(), key=lambda kv: (-kv[1], kv[0]))


def _check_inputs(network, p_w, probs):
    p_w = np.asarray(p_w, dtype=float)
    probs = np.asarray(probs, dtype=float)
    n = len(network.corridor_ids)
    if probs.ndim != 2 or probs.shape != (len(p_w), n):
        raise ValidationError(f"probabilities must be (scenarios={len(p_w)}, corridors={n}), got {probs.shape}")
    if np.any(probs < 0) or np.any(probs > 1) or not np.all(np.isfinite(probs)):
        raise ValidationError("corridor probabilities must lie in [0, 1]")
    if np.any(p_w < 0):
        raise ValidationError("scenario probabilities must be nonnegative")
    return p_w, probs


def _scenario_probabilities(scenarios) -> np.ndarray:
    if hasattr(scenarios, "probabilities"):
        return scenarios.probabilities
    if len(scenarios) and hasattr(scenarios[0], "p_w"):
        return np.array([s.p_w for s in scenarios])
    return np.asarray(scenarios, dtype=float)


def system_index(network: Network, scenarios, probs, order: int = DEFAULT_ORDER,
                 cache: ImpactCache | None = None, skip_floor: float = DEFAULT_SKIP_FLOOR,
                 threads: int = 1) -> ResilienceReport:
    """Expected load shed over the scenario set, enumerated to ``order``.

    ``scenarios`` is a ScenarioSet, a list of scenarios, or a vector of
    scenario probabilities; ``probs`` holds p_{w,i} with one row per scenario
    and one column per corridor in network order.
    """
    p_w, probs = _check_inputs(network, _scenario_probabilities(scenarios), probs)
    n = probs.shape[1]
    if order < 1:
        raise ValidationError("enumeration order must be at least 1")
    if order > n:
        log.warning("enumeration order %d exceeds corridor count %d; using %d", order, n, n)
        order = n
    cache = ImpactCache(network) if cache is None else cache
    ids = network.corridor_ids
    contrib = np.zeros(len(p_w))
    increments: dict[frozenset, float] = {}
    impacts: dict[frozenset, float] = {}
    evaluated = skipped = 0
    skipped_mass = 0.0
    # products of the previous level, keyed by index tuple; a state whose
    # prefix was skipped is below the floor too, since every p <= 1
    prev = {(): np.ones(len(p_w))}
    for j in range(1, order + 1):
        keep = {}
        for combo in itertools.combinations(range(n), j):
            parent = prev.get(combo[:-1])
            if parent is None:
                prod = np.prod(probs[:, combo], axis=1)
            else:
                prod = parent * probs[:, combo[-1]]
            if parent is None or prod.max() < skip_floor:
                skipped += 1
                skipped_mass += float(prod @ p_w)
                continue
            keep[combo] = prod
        cache.prefetch([frozenset(ids[i] for i in c) for c in keep], threads)
        for combo, prod in keep.items():
            key = frozenset(ids[i] for i in combo)
            impacts[key] = cache.impact(key)
            d = impact_increment(key, impacts, increments)
            if d != 0.0:
                contrib += prod * d
            evaluated += 1
        prev = keep
    r_sys = math.fsum(float(a) * float(b) for a, b in zip(p_w, contrib))
    if skipped:
        log.info("order %d: %d states skipped below %.1e (mass %.3e)", order, skipped, skip_floor, skipped_mass)
    return ResilienceReport(r_sys, contrib, p_w, order, cache.baseline, evaluated, skipped,
                            skipped_mass, cache.solves)


def zeroed(probs, columns, rho: float = 0.0) -> np.ndarray:
    """Copy of ``probs`` with the given columns scaled by ``rho``."""
    out = np.array(probs, dtype=float, copy=True)
    for c in columns:
        out[:, c] *= rho
    return out


def corridor_index(network: Network, scenarios, probs, corridor_id: int, order: int = DEFAULT_ORDER,
                   cache: ImpactCache | None = None, baseline: ResilienceReport | None = None,
                   skip_floor: float = DEFAULT_SKIP_FLOOR, threads: int = 1) -> float:
    """R_m = R_sys - R_sys with corridor m unable to fail."""
    col = network.corridor_ids.index(network.corridor(corridor_id).id)
    cache = ImpactCache(network) if cache is None else cache
    if baseline is None:
        baseline = system_index(network, scenarios, probs, order, cache, skip_floor, threads)
    after = system_index(network, scenarios, zeroed(probs, [col]), order, cache, skip_floor, threads)
    return baseline.r_sys - after.r_sys


def assess(network: Network, scenarios, probs, order: int = DEFAULT_ORDER,
           cache: ImpactCache | None = None, skip_floor: float = DEFAULT_SKIP_FLOOR,
           threads: int = 1) -> ResilienceReport:
    """System index plus every corridor index, sharing one impact cache."""
    cache = ImpactCache(network) if cache is None else cache
    report = system_index(network, scenarios, probs, order, cache, skip_floor, threads)
    for cid in network.corridor_ids:
        report.per_corridor[cid] = corridor_index(network, scenarios, probs, cid, order, cache,
                                                  report, skip_floor, threads)
    report.lp_solves = cache.solves
    return report


def exhaustive_expected_shed(network: Network, probs_row, cache: ImpactCache | None = None) -> float:
    """Sum over all 2^n states of P(state) * impact; for small networks and tests."""
    p = np.asarray(probs_row, dtype=float)
    ids = network.corridor_ids
    n = len(ids)
    if n > 16:
        raise ValidationError("exhaustive enumeration is limited to 16 corridors")
    cache = ImpactCache(network) if cache is None else cache
    total = []
    for mask in itertools.product((0, 1), repeat=n):
        pr = math.prod(p[i] if m else 1.0 - p[i] for i, m in enumerate(mask))
        failed = frozenset(ids[i] for i, m in enumerate(mask) if m)
        total.append(pr * cache.impact(failed))
    return math.fsum(total)
