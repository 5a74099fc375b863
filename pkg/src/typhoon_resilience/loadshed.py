"""Minimum load shedding under a set of failed corridors.

The surviving network is split into islands.  Each island is solved as a DC
power-flow linear program that minimizes (weighted) shed load subject to nodal
balance, branch limits and generator limits, with generator minimum outputs
relaxed to zero.  Islands without generation shed all their load.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix, vstack

from .errors import ValidationError
from .grid_model import Network

FEASIBILITY_TOL = 1e-7


@dataclass(frozen=True)
class FaultState:
    failed: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "failed", frozenset(int(i) for i in self.failed))

    def __len__(self):
        return len(self.failed)


@dataclass(frozen=True)
class LoadShedResult:
    total_shed: float
    per_bus_shed: dict[int, float]
    island_count: int
    solver_status: str
    generation: dict[int, float] = field(default_factory=dict, repr=False)


class LoadShedError(RuntimeError):
    """The shedding LP failed, which should not happen for valid input."""


def _as_failed(state) -> frozenset[int]:
    if isinstance(state, FaultState):
        return state.failed
    return frozenset(int(i) for i in state)


def _surviving_branches(network: Network, failed: frozenset[int]):
    for c in network.corridors:
        if c.id not in failed:
            yield c
    yield from network.fixed_branches


def islands(network: Network, state) -> list[tuple[int, ...]]:
    """Connected components of the surviving network, each sorted, ordered by first bus."""
    failed = _as_failed(state)
    parent = {b.id: b.id for b in network.buses}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for br in _surviving_branches(network, failed):
        a, b = find(br.from_bus), find(br.to_bus)
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for b in network.buses:
        groups.setdefault(find(b.id), []).append(b.id)
    return sorted((tuple(sorted(g)) for g in groups.values()), key=lambda g: g[0])


def _solve_island(network, buses, branches, gens, loads, weights):
    """LP over one island; returns (per-bus shed, per-generator output, status)."""
    nb = len(buses)
    pos = {b: i for i, b in enumerate(buses)}
    load_buses = [b for b in buses if loads[b] > 0]
    ng, nd = len(gens), len(load_buses)
    n = nb + ng + nd

    # nodal balance: sum(g) + s - B theta = load
    rows, cols, vals = [], [], []
    nbr = len(branches)
    susceptance = np.array([network.base_mva / br.reactance_pu for br in branches])
    for k, br in enumerate(branches):
        i, j, b = pos[br.from_bus], pos[br.to_bus], susceptance[k]
        rows += [i, i, j, j]
        cols += [i, j, i, j]
        vals += [-b, b, b, -b]
    for k, (gi, g) in enumerate(gens):
        rows.append(pos[g.bus_id])
        cols.append(nb + k)
        vals.append(1.0)
    for k, b in enumerate(load_buses):
        rows.append(pos[b])
        cols.append(nb + ng + k)
        vals.append(1.0)
    a_eq = coo_matrix((vals, (rows, cols)), shape=(nb, n)).tocsr()
    b_eq = np.array([loads[b] for b in buses])

    if nbr:
        fr, fc, fv = [], [], []
        for k, br in enumerate(branches):
            fr += [k, k]
            fc += [pos[br.from_bus], pos[br.to_bus]]
            fv += [susceptance[k], -susceptance[k]]
        flow = coo_matrix((fv, (fr, fc)), shape=(nbr, n))
        a_ub = vstack([flow, -flow]).tocsr()
        rating = np.array([br.rating_mw for br in branches])
        b_ub = np.concatenate([rating, rating])
    else:
        a_ub, b_ub = None, None

    bounds = [(None, None)] * nb
    bounds[0] = (0.0, 0.0)
    bounds += [(0.0, g.p_max) for _, g in gens]
    bounds += [(0.0, loads[b]) for b in load_buses]
    cost = np.zeros(n)
    cost[nb + ng:] = [weights.get(b, 1.0) for b in load_buses]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
                  method="highs", options={"primal_feasibility_tolerance": FEASIBILITY_TOL})
    if res.status != 0:
        raise LoadShedError(f"island {buses}: LP failed ({res.message})")
    x = res.x
    shed = {b: float(min(max(x[nb + ng + k], 0.0), loads[b])) for k, b in enumerate(load_buses)}
    gen_out = {gi: float(x[nb + k]) for k, (gi, _) in enumerate(gens)}
    return shed, gen_out


def optimal_load_shed(network: Network, state=frozenset(),
                      weights: dict[int, float] | None = None) -> LoadShedResult:
    """Minimum total load shed (MW) with the corridors in ``state`` out of service.

    ``weights`` optionally prices shedding per bus; the default is 1 per MW
    everywhere.  ``total_shed`` is always the unweighted MW sum.
    """
    failed = _as_failed(state)
    known = set(network.corridor_ids)
    unknown = sorted(failed - known)
    if unknown:
        raise ValidationError(f"fault state names unknown corridors {unknown}")
    weights = weights or {}
    loads = {b.id: b.load_mw for b in network.buses}
    parts = islands(network, failed)
    gens_by_bus: dict[int, list] = {}
    for gi, g in enumerate(network.generators):
        gens_by_bus.setdefault(g.bus_id, []).append((gi, g))
    surviving = list(_surviving_branches(network, failed))

    shed: dict[int, float] = {b.id: 0.0 for b in network.buses}
    gen_out: dict[int, float] = {gi: 0.0 for gi in range(len(network.generators))}
    status = "optimal"
    for part in parts:
        members = set(part)
        island_load = sum(loads[b] for b in part)
        if island_load <= 0:
            continue
        gens = [x for b in part for x in gens_by_bus.get(b, [])]
        if not gens or sum(g.p_max for _, g in gens) <= 0:
            for b in part:
                shed[b] = loads[b]
            status = "degenerate-islanded"
            continue
        branches = [br for br in surviving if br.from_bus in members]
        s, g = _solve_island(network, list(part), branches, gens, loads, weights)
        shed.update(s)
        gen_out.update(g)
    total = float(sum(shed[b.id] for b in network.buses))
    return LoadShedResult(total, shed, len(parts), status, gen_out)
