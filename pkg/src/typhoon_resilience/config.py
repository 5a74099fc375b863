"""Run configuration: one declarative file drives every stage.

The file is YAML or JSON.  Missing keys take the defaults below; unknown keys
and out-of-range values are rejected with the dotted path of the field.
Relative paths resolve against the configuration file's directory.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import ValidationError
from .forest import ForestConfig
from .hazard import HazardParams
from .scenarios import ParamBins, ParamDistribution, ScenarioGrid, default_distributions, scenario_set
from .windfield import DEFAULT_K, TyphoonTrack

SCHEMA_VERSION = "1.0"

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "seed": 0,
    "threads": 1,
    "paths": {
        "system": None,
        "placement": None,
        "samples": None,
        "weights": None,
        "pairwise": None,
        "strategies": None,
    },
    "network": {"spacing_km": 0.5, "cell_km": 1.0, "rainfall_24h": None},
    "typhoon": {
        "landfall_lat": 21.8,
        "landfall_lon": 112.7,
        "duration_min": 720.0,
        "k": DEFAULT_K,
        "decay_unit_min": 1.0,
    },
    "scenarios": {
        "shore_normal": 315.0,
        "prune_floor": 1e-8,
        "delta_p0": {"range": [10.0, 90.0], "bins": 5, "distribution": None},
        "v_t": {"range": [2.0, 12.0], "bins": 5, "distribution": None},
        "heading": {"range": None, "bins": 5, "distribution": None},
    },
    "hazard": {"step_min": 6.0, "gamma": None, "gamma_factor": 6.0},
    "forest": {"n_trees": 200, "max_depth": 8, "m_try": 3, "min_leaf": 5},
    "synthetic": {"n": 640, "noise": 1.0},
    "resilience": {"order": 2, "skip_floor": 1e-12, "r_set": 5.0},
    "strategy": {"unit_cost": 1.0e6, "rho": 0.0, "top_k": 5},
    "windfield": {
        "corridors": [27],
        "delta_p0": 58.0,
        "v_t": 8.33,
        "heading": 315.0,
    },
    "output": {"dir": "out"},
}

# keys whose value is a free-form mapping
_OPEN = {"scenarios.delta_p0.distribution", "scenarios.v_t.distribution", "scenarios.heading.distribution"}
# keys that do not change results, left out of the hash
_UNHASHED = ("threads", "output")


def _merge(base: dict, user: dict, prefix: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in user.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ValidationError(f"unknown config key '{path}'")
        if isinstance(base[key], dict) and path not in _OPEN:
            if not isinstance(value, dict):
                raise ValidationError(f"config key '{path}' must be a mapping")
            out[key] = _merge(base[key], value, path + ".")
        else:
            out[key] = value
    return out


def _num(doc, path, lo=None, hi=None, integer=False, allow_none=False, lo_open=False):
    parent, parts = doc, path.split(".")
    for part in parts[:-1]:
        parent = parent[part]
    node = parent[parts[-1]]
    if node is None and allow_none:
        return None
    if isinstance(node, str):
        # YAML 1.1 reads exponents without a sign ("1.0e6") as strings
        try:
            node = parent[parts[-1]] = float(node)
        except ValueError:
            pass
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ValidationError(f"config '{path}' must be a number, got {node!r}")
    if integer and int(node) != node:
        raise ValidationError(f"config '{path}' must be an integer, got {node!r}")
    if lo is not None and (node < lo or (lo_open and node == lo)):
        raise ValidationError(f"config '{path}' = {node} must be {'>' if lo_open else '>='} {lo}")
    if hi is not None and node > hi:
        raise ValidationError(f"config '{path}' = {node} must be <= {hi}")
    return node


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class RunConfig:
    data: dict
    base_dir: Path

    @classmethod
    def from_dict(cls, doc: dict | None, base_dir=".") -> "RunConfig":
        doc = doc or {}
        if not isinstance(doc, dict):
            raise ValidationError("configuration must be a mapping")
        version = str(doc.get("schema_version", SCHEMA_VERSION))
        if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
            raise ValidationError(f"config 'schema_version' {version} is not supported")
        cfg = cls(_merge(DEFAULTS, doc), Path(base_dir))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ValidationError(f"config file {path} not found")
        text = path.read_text()
        try:
            doc = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
        except (json.JSONDecodeError, yaml.YAMLError) as exc:
            raise ValidationError(f"{path}: cannot parse configuration: {exc}") from None
        return cls.from_dict(doc, path.parent)

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        d = self.data
        _num(d, "seed", 0, 2**64 - 1, integer=True)
        _num(d, "threads", 1, integer=True)
        _num(d, "network.spacing_km", 0, lo_open=True)
        _num(d, "network.cell_km", 0, lo_open=True)
        _num(d, "network.rainfall_24h", 0, allow_none=True)
        _num(d, "typhoon.landfall_lat", -90, 90)
        _num(d, "typhoon.landfall_lon", -180, 180)
        _num(d, "typhoon.duration_min", 0, lo_open=True)
        _num(d, "typhoon.k", 0, lo_open=True)
        _num(d, "typhoon.decay_unit_min", 0, lo_open=True)
        _num(d, "scenarios.shore_normal", 0, 360)
        _num(d, "scenarios.prune_floor", 0, 1)
        for name in ("delta_p0", "v_t", "heading"):
            _num(d, f"scenarios.{name}.bins", 1, 50, integer=True)
            rng = d["scenarios"][name]["range"]
            if rng is not None:
                if (not isinstance(rng, (list, tuple)) or len(rng) != 2
                        or not all(isinstance(v, (int, float)) for v in rng) or not rng[1] > rng[0]):
                    raise ValidationError(f"config 'scenarios.{name}.range' must be [lo, hi] with lo < hi")
            dist = d["scenarios"][name]["distribution"]
            if dist is not None:
                try:
                    ParamDistribution.from_dict(dist)
                except (KeyError, TypeError, ValidationError) as exc:
                    raise ValidationError(f"config 'scenarios.{name}.distribution': {exc}") from None
        for name in ("delta_p0", "v_t"):
            if d["scenarios"][name]["range"] is None:
                raise ValidationError(f"config 'scenarios.{name}.range' is required")
        if d["scenarios"]["delta_p0"]["range"][0] < 0:
            raise ValidationError("config 'scenarios.delta_p0.range' must be nonnegative")
        if d["scenarios"]["v_t"]["range"][0] < 0:
            raise ValidationError("config 'scenarios.v_t.range' must be nonnegative")
        _num(d, "hazard.step_min", 0, lo_open=True)
        _num(d, "hazard.gamma", 0, lo_open=True, allow_none=True)
        _num(d, "hazard.gamma_factor", 0, lo_open=True)
        for key in ("n_trees", "max_depth", "m_try", "min_leaf"):
            _num(d, f"forest.{key}", 1, integer=True)
        _num(d, "synthetic.n", 10, integer=True)
        _num(d, "synthetic.noise", 0)
        _num(d, "resilience.order", 1, integer=True)
        _num(d, "resilience.skip_floor", 0, 1)
        _num(d, "resilience.r_set", 0)
        _num(d, "strategy.unit_cost", 0, lo_open=True)
        _num(d, "strategy.rho", 0, 1)
        _num(d, "strategy.top_k", 0, integer=True)
        wf = d["windfield"]
        if not isinstance(wf["corridors"], list) or not all(isinstance(c, int) for c in wf["corridors"]):
            raise ValidationError("config 'windfield.corridors' must be a list of corridor ids")
        _num(d, "windfield.delta_p0", 0, lo_open=True)
        _num(d, "windfield.v_t", 0)
        _num(d, "windfield.heading", 0, 360)
        for key, value in d["paths"].items():
            if value is not None:
                if not isinstance(value, str):
                    raise ValidationError(f"config 'paths.{key}' must be a string path")
                if not self.path(key).is_file():
                    raise ValidationError(f"config 'paths.{key}': file {self.path(key)} not found")

    # -- accessors ---------------------------------------------------------

    def __getitem__(self, key):
        return self.data[key]

    def path(self, key: str) -> Path | None:
        value = self.data["paths"][key]
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    def with_overrides(self, seed: int | None = None, threads: int | None = None,
                       out: str | None = None) -> "RunConfig":
        data = copy.deepcopy(self.data)
        if seed is not None:
            data["seed"] = seed
        if threads is not None:
            data["threads"] = threads
        cfg = RunConfig(data, self.base_dir)
        if out is not None:
            cfg.data["output"]["dir"] = str(Path(out).resolve())
        cfg.validate()
        return cfg

    @property
    def out_dir(self) -> Path:
        p = Path(self.data["output"]["dir"])
        return p if p.is_absolute() else self.base_dir / p

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    @property
    def threads(self) -> int:
        return int(self.data["threads"])

    def seeds(self) -> dict[str, int]:
        """Independent stream seeds for each stochastic stage."""
        state = np.random.SeedSequence(self.seed).generate_state(3, dtype=np.uint64)
        return {"forest": int(state[0]), "permutation": int(state[1]), "synthetic": int(state[2])}

    def canonical(self) -> dict:
        """Result-relevant configuration plus digests of every input file."""
        data = {k: v for k, v in self.data.items() if k not in _UNHASHED}
        data = copy.deepcopy(data)
        data["paths"] = {k: (None if v is None else _file_digest(self.path(k)))
                         for k, v in self.data["paths"].items()}
        return data

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    # -- builders ----------------------------------------------------------

    def hazard_params(self) -> HazardParams:
        h = self.data["hazard"]
        return HazardParams(step_min=float(h["step_min"]),
                            gamma=None if h["gamma"] is None else float(h["gamma"]),
                            gamma_factor=float(h["gamma_factor"]))

    def forest_config(self) -> ForestConfig:
        f = self.data["forest"]
        return ForestConfig(n_trees=int(f["n_trees"]), max_depth=int(f["max_depth"]), m_try=int(f["m_try"]),
                            min_leaf=int(f["min_leaf"]), seed=self.seeds()["forest"])

    def base_track(self, delta_p0: float = 40.0, v_t: float = 6.0, heading: float | None = None) -> TyphoonTrack:
        t = self.data["typhoon"]
        heading = self.data["scenarios"]["shore_normal"] if heading is None else heading
        return TyphoonTrack(float(t["landfall_lat"]), float(t["landfall_lon"]), float(delta_p0), float(v_t),
                            float(heading) % 360.0, float(t["duration_min"]), float(t["k"]),
                            float(t["decay_unit_min"]))

    def windfield_track(self) -> TyphoonTrack:
        w = self.data["windfield"]
        return self.base_track(w["delta_p0"], w["v_t"], w["heading"])

    def distributions(self) -> dict[str, ParamDistribution]:
        s = self.data["scenarios"]
        out = default_distributions(float(s["shore_normal"]))
        for name in out:
            if s[name]["distribution"] is not None:
                out[name] = ParamDistribution.from_dict(s[name]["distribution"])
        return out

    def grid(self) -> ScenarioGrid:
        s = self.data["scenarios"]
        normal = float(s["shore_normal"])
        bins = {}
        for name in ("delta_p0", "v_t", "heading"):
            rng = s[name]["range"]
            if rng is None:
                rng = (normal - 90.0, normal + 90.0)
            bins[name] = ParamBins.spanning(float(rng[0]), float(rng[1]), int(s[name]["bins"]))
        return ScenarioGrid(**bins)

    def scenario_set(self):
        return scenario_set(self.distributions(), self.grid(), self.base_track(),
                            float(self.data["scenarios"]["prune_floor"]))
