"""Batch command-line front end.

    typhoon-resilience <windfield|weights|assess|strategies|report> --config run.yaml

Every stage recomputes what it needs from the configuration, so each
subcommand stands alone.  All tables are CSV with ``#`` header lines carrying
the schema version and the configuration hash, and each table has a JSON
mirror.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .config import SCHEMA_VERSION, RunConfig
from .correction import FeatureBounds
from .decision import read_pairwise, select_scheme, write_scores
from .errors import ValidationError
from .features import FEATURES
from .featweights import (SyntheticConfig, compute_schemes, read_samples, read_weights, synthetic_samples,
                          to_arrays, write_weights)
from .grid_model import assign_cells, embedded_path, load_network, rts79_paths
from .hazard import unit_series
from .pipeline import corridor_probabilities
from .resilience import ImpactCache, assess
from .scenarios import write_manifest
from .strategy import (candidate_strategies, evaluate_strategy, rank_strategies, read_strategies,
                       recommended)

log = logging.getLogger("typhoon_resilience")

ILLUSTRATIVE = ("scenario distribution defaults and the bus placement are illustrative "
                "placeholders, not calibrated field data")


def _fmt(v: float) -> str:
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return f"{v:.10g}"


class Stage(RuntimeError):
    """A failure attributed to a pipeline stage."""


@dataclass
class Context:
    cfg: RunConfig
    digest: str = ""
    _network: object = None
    _grid: object = None
    cache: ImpactCache | None = None
    results: dict = field(default_factory=dict)

    def __post_init__(self):
        self.digest = self.cfg.digest()
        self.out = self.cfg.out_dir
        self.out.mkdir(parents=True, exist_ok=True)

    @property
    def header(self) -> list[str]:
        return [f"schema_version={SCHEMA_VERSION}", f"config_hash={self.digest}"]

    @property
    def network(self):
        if self._network is None:
            default_sys, default_place = rts79_paths()
            net_cfg = self.cfg["network"]
            self._network = load_network(self.cfg.path("system") or default_sys,
                                         self.cfg.path("placement") or default_place,
                                         spacing_km=float(net_cfg["spacing_km"]))
        return self._network

    @property
    def grid(self):
        if self._grid is None:
            self._grid = assign_cells(self.network, float(self.cfg["network"]["cell_km"]))
        return self._grid

    def write_json(self, name: str, payload: dict) -> Path:
        doc = {"schema_version": SCHEMA_VERSION, "config_hash": self.digest, **payload}
        path = self.out / name
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False, default=_json_default) + "\n")
        return path

    def csv_writer(self, name: str, extra_header=()):
        fh = open(self.out / name, "w", newline="")
        for line in [*self.header, *extra_header]:
            fh.write(f"# {line}\n")
        return fh, csv.writer(fh, lineterminator="\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _finite(v: float):
    return v if math.isfinite(v) else None


# -- stages -----------------------------------------------------------------


def cmd_windfield(ctx: Context) -> dict:
    net = ctx.network
    track = ctx.cfg.windfield_track()
    params = ctx.cfg.hazard_params()
    wanted = ctx.cfg["windfield"]["corridors"]
    unknown = [c for c in wanted if c not in net.corridor_ids]
    if unknown:
        raise ValidationError(f"windfield: unknown corridor ids {unknown}; valid ids are {list(net.corridor_ids)}")
    summary = {}
    for cid in wanted:
        times, wind, line_rate, tower_rate, cum = unit_series(track, ctx.grid, net, cid, params)
        fh, w = ctx.csv_writer(f"windfield_corridor_{cid}.csv", [f"corridor={cid}"])
        with fh:
            w.writerow(["time_min", "max_wind_ms", "line_rate_sum_per_h", "tower_rate_max", "cumulative_failure"])
            for row in zip(times, wind, line_rate, tower_rate, cum):
                w.writerow([_fmt(float(v)) for v in row])
        summary[str(cid)] = {"peak_wind_ms": float(wind.max()), "cumulative_failure": float(cum[-1]),
                             "length_km": net.corridor(cid).length_km, "units": len(net.corridor(cid).units)}
    t = track
    ctx.write_json("windfield.json", {
        "track": {"landfall_lat": t.landfall_lat, "landfall_lon": t.landfall_lon, "delta_p0": t.delta_p0,
                  "v_t": t.v_t, "heading": t.heading, "duration_min": t.duration},
        "corridors": summary,
    })
    ctx.results["windfield"] = summary
    return summary


def cmd_weights(ctx: Context) -> dict:
    cfg = ctx.cfg
    seeds = cfg.seeds()
    if cfg.path("weights") is not None:
        schemes = read_weights(cfg.path("weights"))
        source = f"weights file {cfg.path('weights').name}"
        oob_accuracy = None
    else:
        if cfg.path("samples") is not None:
            samples = read_samples(cfg.path("samples"))
            source = f"samples file {cfg.path('samples').name}"
        else:
            syn = cfg["synthetic"]
            samples = synthetic_samples(SyntheticConfig(n=int(syn["n"]), noise=float(syn["noise"]),
                                                        seed=seeds["synthetic"]))
            source = "synthetic samples"
        schemes, model = compute_schemes(samples, cfg.forest_config(), seeds["permutation"], cfg.threads)
        x, y = to_arrays(samples)
        oob_accuracy = model.oob_accuracy(x, y)
    pairwise_path = cfg.path("pairwise") or embedded_path("expert_pairwise.csv")
    pairwise = read_pairwise(pairwise_path)
    scores, q, cr = select_scheme(schemes, pairwise)
    selected = schemes[scores.selected]
    write_weights(schemes, ctx.out / "weights.csv", [*ctx.header, f"source={source}"])
    write_scores(scores, q, cr, ctx.out / "scheme_scores.csv", ctx.header)
    ctx.write_json("weights.json", {
        "source": source,
        "oob_accuracy": oob_accuracy,
        "features": list(FEATURES),
        "schemes": {s.scheme_name: list(s.weights) for s in schemes},
        "ahp_q": list(q),
        "consistency_ratio": cr,
        "scores": dict(zip(scores.schemes, scores.d.tolist())),
        "selected": selected.scheme_name,
    })
    ctx.results["weights"] = {"schemes": schemes, "selected": selected, "scores": scores, "q": q, "cr": cr}
    return ctx.results["weights"]


def _impacts_path(ctx: Context) -> Path:
    return ctx.out / "impacts.csv"


def _load_impacts(ctx: Context, cache: ImpactCache) -> None:
    path = _impacts_path(ctx)
    if not path.is_file():
        return
    with open(path) as fh:
        lines = fh.read().splitlines()
    if f"# config_hash={ctx.digest}" not in lines:
        return
    rows = [r for r in csv.reader(ln for ln in lines if not ln.startswith("#"))][1:]
    cache.preload((frozenset(int(c) for c in r[0].split(";")), float(r[1])) for r in rows)
    log.info("reusing %d cached impacts from %s", len(rows), path)


def _save_impacts(ctx: Context, cache: ImpactCache) -> None:
    fh, w = ctx.csv_writer("impacts.csv", [f"baseline_shed_mw={cache.baseline!r}"])
    with fh:
        w.writerow(["failed_corridors", "impact_mw"])
        for key, value in cache.items():
            w.writerow([";".join(str(c) for c in sorted(key)), repr(value)])


def cmd_assess(ctx: Context) -> dict:
    cfg = ctx.cfg
    weights = ctx.results.get("weights") or cmd_weights(ctx)
    omega = weights["selected"]
    try:
        scenarios = cfg.scenario_set()
        net = ctx.network
        probs = corridor_probabilities(net, scenarios, omega, cfg.hazard_params(), ctx.grid, FeatureBounds(),
                                       cfg["network"]["rainfall_24h"], cfg.threads)
    except ValidationError as exc:
        raise Stage(f"assess (scenario and probability stage): {exc}") from exc
    res = cfg["resilience"]
    order, floor, r_set = int(res["order"]), float(res["skip_floor"]), float(res["r_set"])
    if ctx.cache is None:
        ctx.cache = ImpactCache(net)
        _load_impacts(ctx, ctx.cache)
    try:
        model = assess(net, scenarios, probs.model, order, ctx.cache, floor, cfg.threads)
        hybrid = assess(net, scenarios, probs.hybrid, order, ctx.cache, floor, cfg.threads)
    except Exception as exc:
        raise Stage(f"assess (state enumeration stage): {exc}") from exc
    log.info("assessment used %d cached impacts (%d solved in this run)", len(ctx.cache), ctx.cache.solves)
    acceptable = hybrid.r_sys <= r_set
    verdict = "planning scheme acceptable" if acceptable else "resilience improvement required"

    write_manifest(scenarios, ctx.out / "scenarios.csv", [*ctx.header, ILLUSTRATIVE])
    fh, w = ctx.csv_writer("corridor_probabilities.csv")
    with fh:
        w.writerow(["scenario", "corridor", "p_model", "p_hybrid", "k_mean", "max_wind_ms"])
        for i, s in enumerate(scenarios):
            for j, cid in enumerate(probs.corridor_ids):
                w.writerow([s.label, cid, _fmt(probs.model[i, j]), _fmt(probs.hybrid[i, j]),
                            _fmt(probs.k_mean[i, j]), _fmt(probs.max_wind[i, j])])
    extra = [
        f"order={order}",
        f"r_sys_hybrid_mw={_fmt(hybrid.r_sys)}",
        f"r_sys_model_mw={_fmt(model.r_sys)}",
        f"r_set_mw={_fmt(r_set)}",
        f"verdict={verdict}",
        f"states_evaluated={hybrid.states_evaluated} states_skipped={hybrid.states_skipped} "
        f"skipped_mass={hybrid.skipped_mass:.3e} skip_floor={floor:.1e}",
        f"scenario_coverage={scenarios.coverage:.9f} pruned_mass={scenarios.pruned_mass:.3e}",
    ]
    fh, w = ctx.csv_writer("resilience.csv", extra)
    with fh:
        w.writerow(["rank", "corridor", "r_m_hybrid_mw", "r_m_model_mw"])
        for rank, (cid, r) in enumerate(hybrid.sorted_corridors(), start=1):
            w.writerow([rank, cid, _fmt(r), _fmt(model.per_corridor[cid])])
    _save_impacts(ctx, ctx.cache)
    ctx.write_json("resilience.json", {
        "order": order,
        "r_set_mw": r_set,
        "verdict": verdict,
        "acceptable": acceptable,
        "note": ILLUSTRATIVE,
        "scenario_count": len(scenarios),
        "scenario_coverage": scenarios.coverage,
        "pruned_mass": scenarios.pruned_mass,
        "selected_scheme": omega.scheme_name,
        "hybrid": _report_dict(hybrid),
        "model": _report_dict(model),
    })
    ctx.results["assess"] = {"scenarios": scenarios, "probs": probs, "model": model, "hybrid": hybrid,
                             "verdict": verdict, "acceptable": acceptable}
    return ctx.results["assess"]


def _report_dict(r) -> dict:
    return {
        "r_sys_mw": r.r_sys,
        "q0_baseline_mw": r.q0_baseline,
        "states_evaluated": r.states_evaluated,
        "states_skipped": r.states_skipped,
        "skipped_mass": r.skipped_mass,
        "per_corridor_mw": [{"corridor": c, "r_m": v} for c, v in r.sorted_corridors()],
        "per_scenario_mw": r.per_scenario.tolist(),
    }


def cmd_strategies(ctx: Context) -> dict:
    cfg = ctx.cfg
    a = ctx.results.get("assess") or cmd_assess(ctx)
    net = ctx.network
    st = cfg["strategy"]
    res = cfg["resilience"]
    r_set = float(res["r_set"])
    if cfg.path("strategies") is not None:
        candidates = read_strategies(cfg.path("strategies"))
        source = f"strategy file {cfg.path('strategies').name}"
    else:
        candidates = candidate_strategies(a["hybrid"].per_corridor, int(st["top_k"]))
        source = f"generated: singletons plus pairs among top {int(st['top_k'])}"
    evals = []
    for s in candidates:
        try:
            evals.append(evaluate_strategy(net, a["scenarios"], a["probs"].hybrid, s, int(res["order"]),
                                           a["hybrid"], ctx.cache, r_set, float(st["unit_cost"]),
                                           float(st["rho"]), float(res["skip_floor"]), cfg.threads))
        except ValidationError as exc:
            raise Stage(f"strategies: {exc}") from exc
    ranked = rank_strategies(evals, r_set)
    best = recommended(ranked)
    verdict = (f"recommended={best.strategy.name}" if best is not None
               else "no qualifying strategy: no candidate brings R_sys within R_set")
    extra = [f"source={source}", f"r_sys_before_mw={_fmt(a['hybrid'].r_sys)}", f"r_set_mw={_fmt(r_set)}",
             f"rho={_fmt(float(st['rho']))}", verdict]
    fh, w = ctx.csv_writer("strategies.csv", extra)
    with fh:
        w.writerow(["priority", "strategy", "corridors", "cost_usd", "re_mw", "delta_re_pct",
                    "ratio_usd_per_pct", "r_after_mw", "meets_target", "note"])
        for i, e in enumerate(ranked, start=1):
            w.writerow([i, e.strategy.name, ";".join(map(str, e.strategy.corridors)), _fmt(e.cost), _fmt(e.re),
                        _fmt(100.0 * e.delta_re), _fmt(e.ratio), _fmt(e.r_after), int(e.meets_target),
                        e.strategy.note])
    _save_impacts(ctx, ctx.cache)
    ctx.write_json("strategies.json", {
        "source": source,
        "r_set_mw": r_set,
        "r_sys_before_mw": a["hybrid"].r_sys,
        "recommended": None if best is None else best.strategy.name,
        "message": verdict,
        "ranking": [{"priority": i, "strategy": e.strategy.name, "corridors": list(e.strategy.corridors),
                     "cost_usd": e.cost, "re_mw": e.re, "delta_re": e.delta_re, "ratio": _finite(e.ratio),
                     "r_after_mw": e.r_after, "meets_target": e.meets_target, "note": e.strategy.note}
                    for i, e in enumerate(ranked, start=1)],
    })
    ctx.results["strategies"] = {"ranked": ranked, "recommended": best, "message": verdict}
    return ctx.results["strategies"]


def cmd_report(ctx: Context) -> dict:
    wf = cmd_windfield(ctx)
    w = cmd_weights(ctx)
    a = cmd_assess(ctx)
    s = cmd_strategies(ctx) if not a["acceptable"] else None
    lines = [f"# {h}" for h in ctx.header]
    lines += [
        "Typhoon resilience assessment",
        f"network: {ctx.network.name} ({len(ctx.network.corridor_ids)} failable corridors, "
        f"{ctx.network.total_load:.0f} MW load)",
        f"note: {ILLUSTRATIVE}",
        "",
        "Single-storm dump: " + ", ".join(f"corridor {c} peak {v['peak_wind_ms']:.2f} m/s, "
                                          f"P={v['cumulative_failure']:.6f}" for c, v in wf.items()),
        "",
        "Weight schemes: " + ", ".join(f"{n}={d:.4f}" for n, d in zip(w["scores"].schemes, w["scores"].d)),
        f"AHP consistency ratio {w['cr']:.4f}; selected scheme {w['selected'].scheme_name}",
        "",
        f"Scenarios: {len(a['scenarios'])} (coverage {a['scenarios'].coverage:.6f})",
        f"R_sys model-driven  = {a['model'].r_sys:.6f} MW",
        f"R_sys hybrid-driven = {a['hybrid'].r_sys:.6f} MW (order {a['hybrid'].order})",
        f"R_set = {float(ctx.cfg['resilience']['r_set']):.6f} MW: {a['verdict']}",
        "Weakest corridors: " + ", ".join(f"{c} ({r:.6f})" for c, r in a["hybrid"].sorted_corridors()[:5]),
    ]
    if s is not None:
        lines += ["", f"Strategies evaluated: {len(s['ranked'])}", s["message"]]
        for i, e in enumerate(s["ranked"][:10], start=1):
            lines.append(f"  {i}. {e.strategy.name} corridors={list(e.strategy.corridors)} "
                         f"C={e.cost:.4e} $ RE={e.re:.6f} MW dRE={100 * e.delta_re:.2f}% "
                         f"C/dRE={e.ratio:.4e} meets_target={e.meets_target}")
    (ctx.out / "report.txt").write_text("\n".join(lines) + "\n")
    ctx.write_json("report.json", {
        "r_sys_model_mw": a["model"].r_sys,
        "r_sys_hybrid_mw": a["hybrid"].r_sys,
        "verdict": a["verdict"],
        "selected_scheme": w["selected"].scheme_name,
        "recommended_strategy": None if s is None or s["recommended"] is None
        else s["recommended"].strategy.name,
    })
    return ctx.results


COMMANDS = {
    "windfield": cmd_windfield,
    "weights": cmd_weights,
    "assess": cmd_assess,
    "strategies": cmd_strategies,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="typhoon-resilience",
                                description="Typhoon resilience assessment of transmission systems.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="YAML or JSON run configuration (defaults apply when omitted)")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--seed", type=int, help="random seed (overrides the configured seed)")
    p.add_argument("--threads", type=int, help="worker threads")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig.from_dict({})
        if args.seed is not None and args.seed < 0:
            raise ValidationError("--seed must be nonnegative")
        cfg = cfg.with_overrides(seed=args.seed, threads=args.threads, out=args.out)
        log.info("kernel backend: %s", kernels.BACKEND)
        ctx = Context(cfg)
        COMMANDS[args.command](ctx)
    except (ValueError, Stage, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{args.command}: outputs written to {ctx.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
