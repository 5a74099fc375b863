"""Regenerate the embedded RTS-79 system file and the illustrative placement.

Electrical data follow the published IEEE RTS-79 tables (MATPOWER
case24_ieee_rts).  Bus coordinates come from a least-squares embedding of the
line mileages, shifted inland of the 21.8N/112.7E landfall; they are
illustrative only.  Run from the repository root:

    python scripts/make_rts79_data.py
"""

import json
import math
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

DATA = Path(__file__).resolve().parents[1] / "src" / "typhoon_resilience" / "data"
MILE_KM = 1.609344

LOADS = {1: 108, 2: 97, 3: 180, 4: 74, 5: 71, 6: 136, 7: 125, 8: 171, 9: 175,
         10: 195, 11: 0, 12: 0, 13: 265, 14: 194, 15: 317, 16: 100, 17: 0,
         18: 333, 19: 181, 20: 128, 21: 0, 22: 0, 23: 0, 24: 0}

# unit type: (p_max, p_min, cost $/MWh)
UNITS = {"U12": (12, 2.4, 56.6), "U20": (20, 16, 130.0), "U50": (50, 10, 0.5),
         "U76": (76, 15.2, 16.1), "U100": (100, 25, 43.7), "U155": (155, 54.3, 12.4),
         "U197": (197, 69, 48.6), "U350": (350, 140, 11.8), "U400": (400, 100, 4.4)}
GENS = [(1, "U20", 2), (1, "U76", 2), (2, "U20", 2), (2, "U76", 2), (7, "U100", 3),
        (13, "U197", 3), (15, "U12", 5), (15, "U155", 1), (16, "U155", 1),
        (18, "U400", 1), (21, "U400", 1), (22, "U50", 6), (23, "U155", 2), (23, "U350", 1)]

# id, from, to, x (pu), rating (MVA), kind, length (miles)
BRANCHES = [
    (1, 1, 2, 0.0139, 175, "line", 3), (2, 1, 3, 0.2112, 175, "line", 55),
    (3, 1, 5, 0.0845, 175, "line", 22), (4, 2, 4, 0.1267, 175, "line", 33),
    (5, 2, 6, 0.1920, 175, "line", 50), (6, 3, 9, 0.1190, 175, "line", 31),
    (7, 3, 24, 0.0839, 400, "transformer", 0), (8, 4, 9, 0.1037, 175, "line", 27),
    (9, 5, 10, 0.0883, 175, "line", 23), (10, 6, 10, 0.0605, 175, "cable", 16),
    (11, 7, 8, 0.0614, 175, "line", 16), (12, 8, 9, 0.1651, 175, "line", 43),
    (13, 8, 10, 0.1651, 175, "line", 43), (14, 9, 11, 0.0839, 400, "transformer", 0),
    (15, 9, 12, 0.0839, 400, "transformer", 0), (16, 10, 11, 0.0839, 400, "transformer", 0),
    (17, 10, 12, 0.0839, 400, "transformer", 0), (18, 11, 13, 0.0476, 500, "line", 33),
    (19, 11, 14, 0.0418, 500, "line", 29), (20, 12, 13, 0.0476, 500, "line", 33),
    (21, 12, 23, 0.0966, 500, "line", 67), (22, 13, 23, 0.0865, 500, "line", 60),
    (23, 14, 16, 0.0389, 500, "line", 27), (24, 15, 16, 0.0173, 500, "line", 12),
    (25, 15, 21, 0.0490, 500, "line", 34), (26, 15, 21, 0.0490, 500, "line", 34),
    (27, 15, 24, 0.0519, 500, "line", 36), (28, 16, 17, 0.0259, 500, "line", 18),
    (29, 16, 19, 0.0231, 500, "line", 16), (30, 17, 18, 0.0144, 500, "line", 10),
    (31, 17, 22, 0.1053, 500, "line", 73), (32, 18, 21, 0.0259, 500, "line", 18),
    (33, 18, 21, 0.0259, 500, "line", 18), (34, 19, 20, 0.0396, 500, "line", 27.5),
    (35, 19, 20, 0.0396, 500, "line", 27.5), (36, 20, 23, 0.0216, 500, "line", 15),
    (37, 20, 23, 0.0216, 500, "line", 15), (38, 21, 22, 0.0678, 500, "line", 47),
]

# rough one-line-diagram layout (x east, y north), used only as the start point
START = {1: (0, 0), 2: (30, 0), 3: (-20, 60), 4: (40, 40), 5: (10, 30), 6: (70, 30),
         7: (110, 0), 8: (100, 30), 9: (20, 80), 10: (60, 80), 11: (30, 110),
         12: (60, 110), 13: (100, 150), 14: (10, 140), 15: (-30, 160), 16: (0, 175),
         17: (10, 200), 18: (0, 215), 19: (40, 190), 20: (70, 200), 21: (-20, 235),
         22: (40, 260), 23: (100, 210), 24: (-40, 110)}


def system_file():
    gens = []
    for bus, unit, count in GENS:
        p_max, p_min, cost = UNITS[unit]
        gens += [{"bus_id": bus, "unit_type": unit, "p_max": p_max, "p_min": p_min,
                  "cost": cost} for _ in range(count)]
    return {
        "schema_version": "1.0",
        "name": "IEEE RTS-79",
        "base_mva": 100.0,
        "buses": [{"id": b, "load_mw": float(l)} for b, l in LOADS.items()],
        "generators": gens,
        "branches": [
            {"id": i, "from_bus": f, "to_bus": t, "reactance_pu": x, "rating_mw": float(r),
             "kind": kind, "length_mi": mi, "failable": kind == "line"}
            for i, f, t, x, r, kind, mi in BRANCHES
        ],
    }


def embed():
    ids = sorted(START)
    index = {b: i for i, b in enumerate(ids)}
    pairs = []
    for _, f, t, _, _, kind, mi in BRANCHES:
        target = 0.4 if kind == "transformer" else mi * MILE_KM
        pairs.append((index[f], index[t], target))
    linked = {(min(a, b), max(a, b)) for a, b, _ in pairs}

    def residuals(flat):
        xy = flat.reshape(-1, 2)
        res = [(np.linalg.norm(xy[a] - xy[b]) - d) / max(d, 1.0) * 10 for a, b, d in pairs]
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                if (a, b) not in linked:
                    dist = np.linalg.norm(xy[a] - xy[b])
                    res.append(max(0.0, 12.0 - dist))
        return np.array(res)

    x0 = np.array([START[b] for b in ids], dtype=float).ravel()
    sol = least_squares(residuals, x0, max_nfev=400)
    xy = sol.x.reshape(-1, 2)
    return {b: xy[index[b]] for b in ids}


def placement_file():
    xy = embed()
    centre = np.mean(list(xy.values()), axis=0)
    # layout centre sits ~110 km inland, north-west of the landfall point
    lat0, lon0 = 22.55, 112.05
    buses = {}
    for b, (x, y) in xy.items():
        dx, dy = x - centre[0], y - centre[1]
        lat = lat0 + math.degrees(dy / 6371.0)
        lon = lon0 + math.degrees(dx / (6371.0 * math.cos(math.radians(lat0))))
        buses[str(b)] = {"lat": round(lat, 6), "lon": round(lon, 6)}
    rng = np.random.default_rng(20180916)
    corridors = {}
    for i, _, _, _, _, kind, _ in BRANCHES:
        if kind != "line":
            continue
        corridors[str(i)] = {
            "v_design_tower": float(rng.choice([40.0, 42.5, 45.0, 47.5])),
            "v_design_line": float(rng.choice([40.0, 42.5, 45.0, 47.5])),
            "altitude": round(float(rng.uniform(0, 150)), 1),
            "slope": round(float(rng.uniform(0, 40)), 1),
            "wind_angle": round(float(rng.uniform(0, 180)), 1),
            "operation_years": int(rng.integers(1, 36)),
            "rainfall_24h": round(float(rng.uniform(0.2, 6.0)), 2),
        }
    return {
        "schema_version": "1.0",
        "illustrative": True,
        "note": "Illustrative coordinates: least-squares embedding of RTS-79 line "
                "mileages placed inland of 21.8N/112.7E. Not the case-study geography.",
        "buses": buses,
        "corridors": corridors,
    }


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    (DATA / "rts79_system.json").write_text(json.dumps(system_file(), indent=1) + "\n")
    (DATA / "rts79_placement_sample.json").write_text(json.dumps(placement_file(), indent=1) + "\n")


if __name__ == "__main__":
    main()
