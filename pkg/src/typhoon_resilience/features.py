"""The seven feature factors, their nominal ranges and correlation signs."""

FEATURES = (
    "max_wind",
    "rainfall_intensity",
    "altitude",
    "slope",
    "wind_angle",
    "design_wind",
    "operation_time",
)

LABELS = {
    "max_wind": "Max wind speed",
    "rainfall_intensity": "Rainfall intensity",
    "altitude": "Altitude",
    "slope": "Slope",
    "wind_angle": "Wind angle",
    "design_wind": "Design wind",
    "operation_time": "Operation time",
}

# (min, max) in native units: m/s, mm/h, m, deg, deg, m/s, years
FEATURE_RANGES = {
    "max_wind": (0.0, 60.0),
    "rainfall_intensity": (0.0, 60.0),
    "altitude": (-20.0, 150.0),
    "slope": (0.0, 180.0),
    "wind_angle": (0.0, 180.0),
    "design_wind": (20.0, 50.0),
    "operation_time": (0.0, 40.0),
}

# +1: raises the failure correction; -1: lowers it
SIGNS = {
    "max_wind": 1,
    "rainfall_intensity": 1,
    "altitude": 1,
    "slope": 1,
    "wind_angle": 1,
    "design_wind": -1,
    "operation_time": -1,
}


def feature_index(name: str) -> int:
    try:
        return FEATURES.index(name)
    except ValueError:
        raise KeyError(f"unknown feature {name!r}; expected one of {FEATURES}") from None
