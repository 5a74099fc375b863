"""Electrical network, corridor geometry and the analysis grid.

Two input files describe a system:

* the *system file* (JSON) holds buses, generators and branches with their
  electrical data.  Branches flagged ``failable`` become corridors; the rest
  (transformers, cables) stay in the network as branches that never fail.
* the *placement file* (JSON) maps bus ids to coordinates and corridor ids to
  feature-factor records, with optional per-unit overrides.

Both carry ``schema_version``; loaders accept major version 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import SchemaError, ValidationError
from .windfield import EARTH_RADIUS_KM, GeoPoint, haversine_km

SUPPORTED_MAJOR = 1
DEFAULT_SPACING_KM = 0.5
RTS79_TOTAL_LOAD_MW = 2850.0
RTS79_CORRIDORS = 32

# Table-1 range midpoints, used when the placement file leaves a factor out.
# The rainfall default converts to 30 mm/h, the midpoint of the intensity range.
FEATURE_DEFAULTS = {
    "v_design_tower": 35.0,
    "v_design_line": 35.0,
    "altitude": 65.0,
    "slope": 90.0,
    "wind_angle": 90.0,
    "operation_years": 20.0,
    "rainfall_24h": (30.0 / 27.08) ** (1.0 / 0.6021),
}


@dataclass(frozen=True)
class Bus:
    id: int
    load_mw: float
    placement: GeoPoint


@dataclass(frozen=True)
class Generator:
    bus_id: int
    p_max: float
    p_min: float = 0.0
    cost: float = 0.0

    def __post_init__(self):
        if not 0 <= self.p_min <= self.p_max:
            raise ValidationError(f"generator at bus {self.bus_id}: need 0 <= p_min <= p_max")


@dataclass(frozen=True)
class TowerLineUnit:
    tower_point: GeoPoint
    span_km: float
    v_design_tower: float
    v_design_line: float
    altitude: float
    slope: float
    wind_angle: float
    operation_years: float
    rainfall_24h: float

    def __post_init__(self):
        if not self.span_km > 0:
            raise ValidationError(f"span must be positive, got {self.span_km}")
        if not (self.v_design_tower > 0 and self.v_design_line > 0):
            raise ValidationError("design wind speeds must be positive")


@dataclass(frozen=True)
class Corridor:
    id: int
    from_bus: int
    to_bus: int
    reactance_pu: float
    rating_mw: float
    units: tuple[TowerLineUnit, ...]

    def __post_init__(self):
        if not self.units:
            raise ValidationError(f"corridor {self.id} has no tower-line units")

    @property
    def length_km(self) -> float:
        return float(sum(u.span_km for u in self.units))


@dataclass(frozen=True)
class Branch:
    """A non-failable electrical branch (transformer, cable)."""

    id: int
    from_bus: int
    to_bus: int
    reactance_pu: float
    rating_mw: float
    kind: str = "transformer"


@dataclass(frozen=True)
class Network:
    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...]
    corridors: tuple[Corridor, ...]
    fixed_branches: tuple[Branch, ...] = ()
    base_mva: float = 100.0
    name: str = ""

    def __post_init__(self):
        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate bus ids: {sorted({i for i in ids if ids.count(i) > 1})}")
        cids = [c.id for c in self.corridors] + [b.id for b in self.fixed_branches]
        if len(set(cids)) != len(cids):
            raise ValidationError("duplicate branch/corridor ids")
        known = set(ids)
        for c in (*self.corridors, *self.fixed_branches):
            for end in (c.from_bus, c.to_bus):
                if end not in known:
                    raise ValidationError(f"branch {c.id} references unknown bus {end}")
        for g in self.generators:
            if g.bus_id not in known:
                raise ValidationError(f"generator references unknown bus {g.bus_id}")

    @property
    def corridor_ids(self) -> tuple[int, ...]:
        return tuple(c.id for c in self.corridors)

    @property
    def total_load(self) -> float:
        return float(sum(b.load_mw for b in self.buses))

    @property
    def total_capacity(self) -> float:
        return float(sum(g.p_max for g in self.generators))

    def corridor(self, corridor_id: int) -> Corridor:
        for c in self.corridors:
            if c.id == corridor_id:
                return c
        raise KeyError(f"unknown corridor id {corridor_id}")

    def bus(self, bus_id: int) -> Bus:
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise KeyError(f"unknown bus id {bus_id}")

    def is_connected(self) -> bool:
        from .loadshed import islands

        return len(islands(self, frozenset())) == 1


# -- geometry ---------------------------------------------------------------


def _interpolate(a: GeoPoint, b: GeoPoint, fractions: np.ndarray):
    """Points at the given fractions of the great-circle arc from a to b."""
    p1 = np.array(_unit_vector(a))
    p2 = np.array(_unit_vector(b))
    omega = math.acos(max(-1.0, min(1.0, float(p1 @ p2))))
    if omega < 1e-15:
        pts = np.repeat(p1[None, :], len(fractions), axis=0)
    else:
        s = math.sin(omega)
        pts = (np.sin((1 - fractions) * omega)[:, None] * p1 + np.sin(fractions * omega)[:, None] * p2) / s
    lat = np.degrees(np.arcsin(np.clip(pts[:, 2], -1, 1)))
    lon = np.degrees(np.arctan2(pts[:, 1], pts[:, 0]))
    return lat, lon


def _unit_vector(p: GeoPoint):
    phi, lam = math.radians(p.lat), math.radians(p.lon)
    return (math.cos(phi) * math.cos(lam), math.cos(phi) * math.sin(lam), math.sin(phi))


def discretize_corridor(start: GeoPoint, end: GeoPoint, spacing_km: float = DEFAULT_SPACING_KM,
                        features: dict | None = None,
                        overrides: dict[int, dict] | None = None) -> list[TowerLineUnit]:
    """Place towers every ``spacing_km`` along the great circle from start to end.

    Each unit is a tower plus the span to the next tower; the last span takes
    the remainder, so there are ``ceil(length / spacing)`` units.
    """
    if not spacing_km > 0:
        raise ValidationError(f"spacing must be positive, got {spacing_km}")
    length = float(haversine_km(start.lat, start.lon, end.lat, end.lon))
    if length <= 1e-9:
        raise ValidationError("corridor endpoints coincide (zero-length geometry)")
    n = max(1, math.ceil(length / spacing_km - 1e-9))
    starts = np.arange(n) * spacing_km
    spans = np.full(n, spacing_km)
    spans[-1] = length - starts[-1]
    lat, lon = _interpolate(start, end, starts / length)
    feats = {**FEATURE_DEFAULTS, **(features or {})}
    overrides = overrides or {}
    units = []
    for i in range(n):
        f = {**feats, **overrides.get(i, {})}
        units.append(TowerLineUnit(
            tower_point=GeoPoint(float(lat[i]), float(lon[i])),
            span_km=float(spans[i]),
            v_design_tower=float(f["v_design_tower"]),
            v_design_line=float(f["v_design_line"]),
            altitude=float(f["altitude"]),
            slope=float(f["slope"]),
            wind_angle=float(f["wind_angle"]),
            operation_years=float(f["operation_years"]),
            rainfall_24h=float(f["rainfall_24h"]),
        ))
    return units


@dataclass(frozen=True)
class AnalysisGrid:
    """Square cells on a local equirectangular projection.

    ``unit_cell[c][i]`` is the cell index of unit ``i`` of corridor ``c``;
    ``cell_lat``/``cell_lon`` hold the cell centers.
    """

    cell_km: float
    origin: GeoPoint
    cells: tuple[tuple[int, int], ...]
    cell_lat: np.ndarray = field(repr=False)
    cell_lon: np.ndarray = field(repr=False)
    unit_cell: dict[int, np.ndarray] = field(repr=False)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def project(self, lat, lon):
        x = EARTH_RADIUS_KM * np.radians(np.asarray(lon) - self.origin.lon) * math.cos(math.radians(self.origin.lat))
        y = EARTH_RADIUS_KM * np.radians(np.asarray(lat) - self.origin.lat)
        return x, y

    def unproject(self, x, y):
        lat = self.origin.lat + np.degrees(np.asarray(y) / EARTH_RADIUS_KM)
        lon = self.origin.lon + np.degrees(
            np.asarray(x) / (EARTH_RADIUS_KM * math.cos(math.radians(self.origin.lat))))
        return lat, lon

    def cell_of(self, point: GeoPoint) -> tuple[int, int]:
        x, y = self.project(point.lat, point.lon)
        return int(math.floor(x / self.cell_km)), int(math.floor(y / self.cell_km))

    def cell_center(self, cell: tuple[int, int]) -> GeoPoint:
        lat, lon = self.unproject((cell[0] + 0.5) * self.cell_km, (cell[1] + 0.5) * self.cell_km)
        return GeoPoint(float(lat), float(lon))


def assign_cells(network: Network, cell_km: float = 1.0) -> AnalysisGrid:
    if not cell_km > 0:
        raise ValidationError(f"cell size must be positive, got {cell_km}")
    lats = [b.placement.lat for b in network.buses]
    lons = [b.placement.lon for b in network.buses]
    origin = GeoPoint(float(np.mean(lats)), float(np.mean(lons)))
    probe = AnalysisGrid(cell_km, origin, (), np.empty(0), np.empty(0), {})
    index: dict[tuple[int, int], int] = {}
    unit_cell = {}
    for c in network.corridors:
        lat = np.array([u.tower_point.lat for u in c.units])
        lon = np.array([u.tower_point.lon for u in c.units])
        x, y = probe.project(lat, lon)
        ix = np.floor(x / cell_km).astype(np.int64)
        iy = np.floor(y / cell_km).astype(np.int64)
        idx = np.empty(len(c.units), dtype=np.int64)
        for k, key in enumerate(zip(ix.tolist(), iy.tolist())):
            idx[k] = index.setdefault(key, len(index))
        unit_cell[c.id] = idx
    cells = tuple(index)
    cx = np.array([(i + 0.5) * cell_km for i, _ in cells])
    cy = np.array([(j + 0.5) * cell_km for _, j in cells])
    clat, clon = probe.unproject(cx, cy)
    return AnalysisGrid(cell_km, origin, cells, np.atleast_1d(clat), np.atleast_1d(clon), unit_cell)


# -- file loading -----------------------------------------------------------


def _check_version(doc: dict, what: str) -> None:
    version = str(doc.get("schema_version", ""))
    try:
        major = int(version.split(".")[0])
    except ValueError:
        raise SchemaError(f"{what}: missing or malformed schema_version {version!r}") from None
    if major != SUPPORTED_MAJOR:
        raise SchemaError(f"{what}: unsupported schema major version {major}")


def _read_json(source) -> dict:
    if isinstance(source, dict):
        return source
    with open(source) as fh:
        return json.load(fh)


def embedded_path(name: str) -> Path:
    return Path(str(resources.files("typhoon_resilience") / "data" / name))


def rts79_paths() -> tuple[Path, Path]:
    """Embedded RTS-79 system file and the illustrative sample placement."""
    return embedded_path("rts79_system.json"), embedded_path("rts79_placement_sample.json")


def load_network(system_file, placement_file, spacing_km: float = DEFAULT_SPACING_KM,
                 rainfall_24h: dict[int, float] | None = None) -> Network:
    """Build a Network from a system file and a placement file.

    ``rainfall_24h`` optionally overrides the per-corridor 24 h rainfall with
    scenario-supplied values.
    """
    system = _read_json(system_file)
    placement = _read_json(placement_file)
    _check_version(system, "system file")
    _check_version(placement, "placement file")
    try:
        bus_rows = system["buses"]
        branch_rows = system["branches"]
        gen_rows = system["generators"]
    except KeyError as exc:
        raise SchemaError(f"system file: missing section {exc}") from None

    ids = [int(b["id"]) for b in bus_rows]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ValidationError(f"duplicate bus ids: {dupes}")
    coords = placement.get("buses", {})
    buses = []
    for row in bus_rows:
        bid = int(row["id"])
        where = coords.get(str(bid))
        if where is None:
            raise ValidationError(f"placement file has no coordinates for bus {bid}")
        load = float(row.get("load_mw", 0.0))
        if load < 0:
            raise ValidationError(f"bus {bid} has negative load")
        buses.append(Bus(bid, load, GeoPoint(float(where["lat"]), float(where["lon"]))))
    by_id = {b.id: b for b in buses}

    gens = tuple(Generator(int(g["bus_id"]), float(g["p_max"]), float(g.get("p_min", 0.0)),
                           float(g.get("cost", 0.0))) for g in gen_rows)
    feature_rows = placement.get("corridors", {})
    rainfall_24h = rainfall_24h or {}
    corridors, fixed = [], []
    for row in branch_rows:
        bid = int(row["id"])
        f, t = int(row["from_bus"]), int(row["to_bus"])
        for end in (f, t):
            if end not in by_id:
                raise ValidationError(f"branch {bid} references unknown bus {end}")
        kind = row.get("kind", "line")
        failable = bool(row.get("failable", kind == "line"))
        x, rating = float(row["reactance_pu"]), float(row["rating_mw"])
        if not failable:
            fixed.append(Branch(bid, f, t, x, rating, kind))
            continue
        rec = dict(feature_rows.get(str(bid), {}))
        overrides = {int(o.pop("unit")): o for o in (dict(o) for o in rec.pop("overrides", []))}
        if bid in rainfall_24h:
            rec["rainfall_24h"] = rainfall_24h[bid]
        try:
            units = discretize_corridor(by_id[f].placement, by_id[t].placement, spacing_km, rec, overrides)
        except ValidationError as exc:
            raise ValidationError(f"corridor {bid}: {exc}") from None
        corridors.append(Corridor(bid, f, t, x, rating, tuple(units)))
    return Network(tuple(buses), gens, tuple(corridors), tuple(fixed),
                   float(system.get("base_mva", 100.0)), str(system.get("name", "")))


def load_rts79(spacing_km: float = DEFAULT_SPACING_KM, placement_file=None) -> Network:
    """The embedded RTS-79 system, checked against its published totals."""
    system, sample = rts79_paths()
    net = load_network(system, placement_file or sample, spacing_km)
    if len(net.corridors) != RTS79_CORRIDORS:
        raise ValidationError(f"RTS-79 should have {RTS79_CORRIDORS} corridors, got {len(net.corridors)}")
    if abs(net.total_load - RTS79_TOTAL_LOAD_MW) > 1e-9:
        raise ValidationError(f"RTS-79 total load should be 2850 MW, got {net.total_load}")
    return net


# -- network dump (round-trip) ----------------------------------------------


def network_to_dict(net: Network) -> dict:
    return {
        "schema_version": "1.0",
        "name": net.name,
        "base_mva": net.base_mva,
        "buses": [asdict(b) for b in net.buses],
        "generators": [asdict(g) for g in net.generators],
        "corridors": [asdict(c) for c in net.corridors],
        "fixed_branches": [asdict(b) for b in net.fixed_branches],
    }


def network_from_dict(doc: dict) -> Network:
    _check_version(doc, "network dump")
    buses = tuple(Bus(b["id"], b["load_mw"], GeoPoint(**b["placement"])) for b in doc["buses"])
    gens = tuple(Generator(**g) for g in doc["generators"])
    corridors = tuple(
        Corridor(c["id"], c["from_bus"], c["to_bus"], c["reactance_pu"], c["rating_mw"],
                 tuple(TowerLineUnit(**{**u, "tower_point": GeoPoint(**u["tower_point"])}) for u in c["units"]))
        for c in doc["corridors"]
    )
    fixed = tuple(Branch(**b) for b in doc["fixed_branches"])
    return Network(buses, gens, corridors, fixed, doc["base_mva"], doc.get("name", ""))


def save_network(net: Network, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net)) + "\n")


def read_network(path) -> Network:
    return network_from_dict(json.loads(Path(path).read_text()))
