"""Corridor reinforcement strategies: cost, index reduction and ranking.

A reinforced corridor's failure probability is multiplied by ``rho`` in every
scenario (``rho = 0``, full immunity, by default) and the system index is
re-enumerated.  Strategies rank by cost per percentage point of reduction.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

from .errors import SchemaError, ValidationError
from .grid_model import Network
from .resilience import DEFAULT_ORDER, DEFAULT_SKIP_FLOOR, ImpactCache, ResilienceReport, system_index, zeroed

DEFAULT_UNIT_COST = 1.0e6  # $/km


@dataclass(frozen=True)
class Strategy:
    name: str
    corridors: tuple[int, ...]
    note: str = ""

    def __post_init__(self):
        if not self.corridors:
            raise ValidationError(f"strategy {self.name!r} reinforces no corridor")
        ids = tuple(sorted({int(c) for c in self.corridors}))
        object.__setattr__(self, "corridors", ids)


@dataclass(frozen=True)
class StrategyEvaluation:
    strategy: Strategy
    cost: float
    r_before: float
    r_after: float
    re: float
    delta_re: float
    ratio: float
    meets_target: bool


def _check_ids(network: Network, strategy: Strategy) -> None:
    known = set(network.corridor_ids)
    bad = [c for c in strategy.corridors if c not in known]
    if bad:
        raise ValidationError(f"strategy {strategy.name!r} names unknown corridors {bad}")


def reinforcement_cost(network: Network, strategy: Strategy, unit_cost: float = DEFAULT_UNIT_COST) -> float:
    if not unit_cost > 0:
        raise ValidationError("unit cost must be positive")
    _check_ids(network, strategy)
    return math.fsum(network.corridor(c).length_km * unit_cost for c in strategy.corridors)


def evaluate_strategy(network: Network, scenarios, probs, strategy: Strategy,
                      order: int = DEFAULT_ORDER, baseline: ResilienceReport | None = None,
                      cache: ImpactCache | None = None, r_set: float = math.inf,
                      unit_cost: float = DEFAULT_UNIT_COST, rho: float = 0.0,
                      skip_floor: float = DEFAULT_SKIP_FLOOR, threads: int = 1) -> StrategyEvaluation:
    if not 0.0 <= rho <= 1.0:
        raise ValidationError("hardening factor rho must lie in [0, 1]")
    cost = reinforcement_cost(network, strategy, unit_cost)
    cache = ImpactCache(network) if cache is None else cache
    if baseline is None:
        baseline = system_index(network, scenarios, probs, order, cache, skip_floor, threads)
    cols = [network.corridor_ids.index(c) for c in strategy.corridors]
    after = system_index(network, scenarios, zeroed(probs, cols, rho), order, cache, skip_floor, threads)
    re = baseline.r_sys - after.r_sys
    delta = re / baseline.r_sys if baseline.r_sys > 0 else 0.0
    ratio = cost / (100.0 * delta) if delta > 0 else math.inf
    return StrategyEvaluation(strategy, cost, baseline.r_sys, after.r_sys, re, delta, ratio,
                              after.r_sys <= r_set)


def rank_strategies(evaluations, r_set: float | None = None) -> list[StrategyEvaluation]:
    """Ascending cost-effectiveness ratio; ties by cost, then name.

    With ``r_set`` given, ``meets_target`` is recomputed against it.
    """
    evs = list(evaluations)
    if r_set is not None:
        evs = [StrategyEvaluation(e.strategy, e.cost, e.r_before, e.r_after, e.re, e.delta_re, e.ratio,
                                  e.r_after <= r_set) for e in evs]
    return sorted(evs, key=lambda e: (e.ratio, e.cost, e.strategy.name))


def recommended(ranked) -> StrategyEvaluation | None:
    """Lowest-ratio strategy that meets the target, or None."""
    return next((e for e in ranked if e.meets_target), None)


def candidate_strategies(corridor_indices: dict[int, float], top_k: int = 5) -> list[Strategy]:
    """Every single corridor plus all pairs among the top-k by corridor index."""
    if top_k < 0:
        raise ValidationError("top_k must be nonnegative")
    singles = [Strategy(f"C{c}", (c,)) for c in sorted(corridor_indices)]
    top = [c for c, _ in sorted(corridor_indices.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]]
    pairs = [Strategy(f"C{a}+C{b}", (a, b)) for a, b in itertools.combinations(sorted(top), 2)]
    return singles + pairs


def read_strategies(path) -> list[Strategy]:
    """JSON list of {"name", "corridors", optional "note"} (or {"strategies": [...]})."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    items = doc.get("strategies") if isinstance(doc, dict) else doc
    if not isinstance(items, list):
        raise SchemaError(f"{path}: expected a list of strategies")
    out = []
    for i, item in enumerate(items):
        try:
            out.append(Strategy(str(item["name"]), tuple(int(c) for c in item["corridors"]),
                                str(item.get("note", ""))))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: strategy #{i}: {exc}") from None
    names = [s.name for s in out]
    if len(set(names)) != len(names):
        raise SchemaError(f"{path}: duplicate strategy names")
    return out
