"""Batts parametric typhoon wind field.

The storm is described by its landfall point, initial central pressure
difference, translation speed and heading.  After landfall the pressure
difference decays linearly in time, which drives the maximum wind speed and
the radius of maximum wind.  The radial profile is linear inside ``rmax`` and
decays as ``(rmax / d) ** 0.6`` outside it.

Time is in minutes since landfall, distances in km, speeds in m/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

EARTH_RADIUS_KM = 6371.0
DEFAULT_K = 6.93


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise DomainError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise DomainError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class TyphoonTrack:
    """Parametric storm after landfall.

    ``heading`` is measured in degrees clockwise from north.  ``k`` is the
    Batts coefficient (6.93 is the usual value for 23-26 N) and
    ``decay_unit_min`` is the length in minutes of the time unit the pressure
    decay coefficients refer to.
    """

    landfall_lat: float
    landfall_lon: float
    delta_p0: float
    v_t: float
    heading: float
    duration: float
    k: float = DEFAULT_K
    decay_unit_min: float = 1.0

    def __post_init__(self):
        GeoPoint(self.landfall_lat, self.landfall_lon)
        if not self.delta_p0 > 0:
            raise DomainError(f"delta_p0 must be positive, got {self.delta_p0}")
        if not self.v_t >= 0:
            raise DomainError(f"v_t must be nonnegative, got {self.v_t}")
        if not 0.0 <= self.heading < 360.0:
            raise DomainError(f"heading {self.heading} outside [0, 360)")
        if not self.duration > 0:
            raise DomainError(f"duration must be positive, got {self.duration}")
        if not self.k > 0 or not self.decay_unit_min > 0:
            raise DomainError("k and decay_unit_min must be positive")

    @property
    def landfall(self) -> GeoPoint:
        return GeoPoint(self.landfall_lat, self.landfall_lon)

    @property
    def decay_rate(self) -> float:
        """Pressure-difference decay in hPa per minute."""
        return (0.02 + 0.02 * math.sin(math.radians(self.heading))) / self.decay_unit_min


@dataclass(frozen=True)
class WindSample:
    point: GeoPoint
    time: float
    speed: float
    center_distance: float
    rmax: float


def _check_time(t: float) -> None:
    if t < 0:
        raise DomainError(f"time must be nonnegative, got {t}")


def _check_lifetime(track: TyphoonTrack, t: float) -> None:
    if not 0.0 <= t <= track.duration:
        raise DomainError(f"time {t} outside storm lifetime [0, {track.duration}]")


def pressure_difference(track: TyphoonTrack, t: float) -> float:
    """Central pressure difference (hPa) at ``t`` minutes, floored at zero."""
    _check_time(t)
    return max(0.0, track.delta_p0 - track.decay_rate * t)


def max_wind_speed(track: TyphoonTrack, t: float) -> float:
    _check_time(t)
    return 0.865 * track.k * math.sqrt(pressure_difference(track, t)) + 0.5 * track.v_t


def max_wind_radius(track: TyphoonTrack, t: float, center_lat: float | None = None) -> float:
    """Radius of maximum wind (km).

    The latitude term uses the storm-center latitude at ``t``; pass
    ``center_lat`` to skip recomputing the track position.
    """
    _check_time(t)
    if center_lat is None:
        center_lat = storm_center(track, t).lat
    dh = pressure_difference(track, t)
    return math.exp(2.63 - 5.086e-5 * dh * dh + 0.0395 * center_lat)


def rhumb_destination(lat: float, lon: float, bearing_deg: float, dist_km):
    """Advance along a constant bearing on the sphere.

    Works elementwise when ``dist_km`` is an array.  Returns (lat, lon) in
    degrees with longitude wrapped into [-180, 180).
    """
    delta = np.asarray(dist_km, dtype=float) / EARTH_RADIUS_KM
    theta = math.radians(bearing_deg)
    phi1 = math.radians(lat)
    dphi = delta * math.cos(theta)
    phi2 = np.clip(phi1 + dphi, -math.pi / 2, math.pi / 2)
    dpsi = np.log(np.tan(math.pi / 4 + phi2 / 2) / math.tan(math.pi / 4 + phi1 / 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(np.abs(dpsi) > 1e-12, dphi / np.where(dpsi == 0, 1.0, dpsi), math.cos(phi1))
    dlam = delta * math.sin(theta) / q
    lon2 = (math.radians(lon) + dlam + math.pi) % (2 * math.pi) - math.pi
    return np.degrees(phi2), np.degrees(lon2)


def haversine_km(lat1, lon1, lat2, lon2):
    """Great-circle distance in km; broadcasts over numpy arrays."""
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dphi = p2 - p1
    dlam = np.radians(np.asarray(lon2) - np.asarray(lon1))
    a = np.sin(dphi / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def storm_center(track: TyphoonTrack, t: float) -> GeoPoint:
    _check_lifetime(track, t)
    dist = track.v_t * t * 60.0 / 1000.0
    lat, lon = rhumb_destination(track.landfall_lat, track.landfall_lon, track.heading, dist)
    return GeoPoint(float(lat), float(lon))


def radial_profile(v_rmax, rmax, d):
    """Wind speed at distance ``d`` from the center; vectorized."""
    d = np.asarray(d, dtype=float)
    inner = v_rmax * d / rmax
    outer = v_rmax * (rmax / np.where(d > rmax, d, rmax)) ** 0.6
    return np.where(d <= rmax, inner, outer)


def wind_at(track: TyphoonTrack, point: GeoPoint, t: float) -> WindSample:
    _check_lifetime(track, t)
    center = storm_center(track, t)
    rmax = max_wind_radius(track, t, center.lat)
    d = float(haversine_km(center.lat, center.lon, point.lat, point.lon))
    speed = float(radial_profile(max_wind_speed(track, t), rmax, d))
    return WindSample(point=point, time=t, speed=speed, center_distance=d, rmax=rmax)


def track_series(track: TyphoonTrack, times: np.ndarray):
    """Center latitude/longitude, ``v_rmax`` and ``rmax`` at each time.

    This is the per-time-step input of the vectorized wind kernels.
    """
    times = np.asarray(times, dtype=float)
    if times.size and (times.min() < 0 or times.max() > track.duration + 1e-9):
        raise DomainError("times outside storm lifetime")
    lat, lon = rhumb_destination(
        track.landfall_lat, track.landfall_lon, track.heading, track.v_t * times * 0.06
    )
    dh = np.maximum(0.0, track.delta_p0 - track.decay_rate * times)
    vmax = 0.865 * track.k * np.sqrt(dh) + 0.5 * track.v_t
    rmax = np.exp(2.63 - 5.086e-5 * dh * dh + 0.0395 * lat)
    return (np.atleast_1d(lat).astype(float), np.atleast_1d(lon).astype(float),
            np.atleast_1d(vmax), np.atleast_1d(rmax))


def time_grid(duration_min: float, step_min: float) -> np.ndarray:
    """Evaluation times from landfall to ``duration_min``, always including the end."""
    if step_min <= 0:
        raise DomainError("time step must be positive")
    n = int(math.ceil(duration_min / step_min - 1e-9))
    times = np.minimum(np.arange(n + 1) * step_min, duration_min)
    return times
