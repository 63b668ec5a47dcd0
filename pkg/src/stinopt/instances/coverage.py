"""Regions, ground sites, satellite footprints and Monte Carlo coverage."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from functools import cached_property
from pathlib import Path

import numpy as np
import shapely
from shapely.geometry import Polygon
from shapely.ops import unary_union

from ..seeds import stable_seed
from .tle import R_EARTH, TLERecord, TrackPoint, propagate

REMOTE_THRESHOLD = 0.60
DEFAULT_SAMPLES = 20_000


class RegionError(ValueError):
    pass


def unit_vectors(lat_deg, lon_deg) -> np.ndarray:
    lat = np.radians(np.asarray(lat_deg, dtype=float))
    lon = np.radians(np.asarray(lon_deg, dtype=float))
    return np.stack([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)], axis=-1)


def central_angle_deg(lat1, lon1, lat2, lon2):
    a = unit_vectors(lat1, lon1)
    b = unit_vectors(lat2, lon2)
    return np.degrees(np.arccos(np.clip((a * b).sum(-1), -1.0, 1.0)))


def _polygon(points, what: str) -> Polygon:
    pts = [(float(lon), float(lat)) for lat, lon in points]
    if len(pts) < 3:
        raise RegionError(f"{what} needs at least three vertices")
    for lon, lat in pts:
        if not (-90 <= lat <= 90 and -180 <= lon <= 180):
            raise RegionError(f"{what} vertex ({lat}, {lon}) out of range")
    poly = Polygon(pts)
    if not poly.is_valid or not poly.is_simple:
        raise RegionError(f"{what} is not a simple polygon")
    if poly.area <= 0:
        raise RegionError(f"{what} has zero area")
    return poly


@dataclass(frozen=True)
class Region:
    """Target area as a (lat, lon) polygon, minus terrestrially served parts.

    Polygons are taken in the equirectangular lat/lon plane (no antimeridian
    crossing); areas are measured on the sphere by sampling.
    """

    boundary: tuple
    covered: tuple = ()
    name: str = "region"
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "boundary", tuple(tuple(map(float, p)) for p in self.boundary))
        object.__setattr__(self, "covered",
                           tuple(tuple(tuple(map(float, p)) for p in poly) for poly in self.covered))
        outer = _polygon(self.boundary, "region boundary")
        for k, poly in enumerate(self.covered):
            inner = _polygon(poly, f"covered polygon {k}")
            if not outer.buffer(1e-9).contains(inner):
                raise RegionError(f"covered polygon {k} is not inside the boundary")

    @cached_property
    def _shapes(self):
        outer = _polygon(self.boundary, "region boundary")
        inner = unary_union([_polygon(p, "covered polygon") for p in self.covered]) \
            if self.covered else None
        return outer, inner

    def _points(self):
        """Uniform-on-sphere points in the boundary; flags for Omega'."""
        if "pts" in self._cache:
            return self._cache["pts"]
        outer, inner = self._shapes
        lon0, lat0, lon1, lat1 = outer.bounds
        rng = np.random.default_rng(stable_seed("region", self.name, self.seed))
        z0, z1 = math.sin(math.radians(lat0)), math.sin(math.radians(lat1))
        lats, lons = [], []
        got = 0
        while got < self.samples:
            m = max(2 * (self.samples - got), 1024)
            lat = np.degrees(np.arcsin(rng.uniform(z0, z1, m)))
            lon = rng.uniform(lon0, lon1, m)
            inside = shapely.contains_xy(outer, lon, lat)
            lats.append(lat[inside])
            lons.append(lon[inside])
            got += int(inside.sum())
        lat = np.concatenate(lats)[: self.samples]
        lon = np.concatenate(lons)[: self.samples]
        served = shapely.contains_xy(inner, lon, lat) if inner is not None \
            else np.zeros(lat.shape, dtype=bool)
        uncovered = ~served
        vec = unit_vectors(lat, lon)
        self._cache["pts"] = (vec, uncovered)
        return self._cache["pts"]

    @property
    def uncovered_points(self) -> np.ndarray:
        vec, unc = self._points()
        return vec[unc]

    @property
    def uncovered_fraction(self) -> float:
        _, unc = self._points()
        return float(unc.mean())

    @property
    def is_remote(self) -> bool:
        return 1.0 - self.uncovered_fraction <= REMOTE_THRESHOLD

    def to_json(self) -> dict:
        return {"name": self.name, "boundary": [list(p) for p in self.boundary],
                "covered": [[list(p) for p in poly] for poly in self.covered]}

    @classmethod
    def from_json(cls, d: dict, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> "Region":
        if "boundary" not in d:
            raise RegionError("region JSON needs a 'boundary'")
        return cls(tuple(map(tuple, d["boundary"])),
                   tuple(tuple(map(tuple, p)) for p in d.get("covered", ())),
                   d.get("name", "region"), samples, seed)

    @classmethod
    def load(cls, path, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> "Region":
        return cls.from_json(json.loads(Path(path).read_text()), samples, seed)


@dataclass(frozen=True)
class Site:
    name: str
    lat: float
    lon: float
    kind: str = "gateway"   # or "base_station"

    def __post_init__(self):
        if not (-90 <= self.lat <= 90 and -180 <= self.lon <= 180):
            raise ValueError(f"site {self.name}: coordinates out of range")


def read_sites(path) -> list[Site]:
    """CSV with header ``name,lat,lon,kind``."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"name", "lat", "lon", "kind"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return [Site(r["name"], float(r["lat"]), float(r["lon"]), r["kind"].strip())
                for r in reader]


def write_sites(path, sites) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["name", "lat", "lon", "kind"])
        for s in sites:
            w.writerow([s.name, repr(s.lat), repr(s.lon), s.kind])


# -- footprints ---------------------------------------------------------------

def footprint_radius_deg(alt_km: float, half_angle_deg: float) -> float:
    """Earth central angle of the cap seen under a nadir cone of the given
    half-angle, or of the horizon when the cone overshoots the Earth."""
    if not 0 < half_angle_deg < 90:
        raise ValueError("half-angle must lie in (0, 90) degrees")
    if not alt_km > 0:
        raise ValueError("altitude must be positive")
    rho = math.asin(R_EARTH / (R_EARTH + alt_km))
    eta = math.radians(half_angle_deg)
    if eta >= rho:
        return math.degrees(math.pi / 2 - rho)
    elev = math.acos(math.sin(eta) / math.sin(rho))
    return math.degrees(math.pi / 2 - eta - elev)


@dataclass(frozen=True)
class Footprint:
    lat: float
    lon: float
    radius_deg: float

    def mask(self, points: np.ndarray) -> np.ndarray:
        c = unit_vectors(self.lat, self.lon)
        return points @ c >= math.cos(math.radians(self.radius_deg))


def footprint_of(point: TrackPoint, half_angle_deg: float = 40.0) -> Footprint:
    return Footprint(point.lat, point.lon, footprint_radius_deg(point.alt_km, half_angle_deg))


def coverage_fraction(point, region: Region, half_angle_deg: float = 40.0) -> float:
    """Share of the region's uncovered sample points inside the footprint.

    ``point`` is a :class:`TrackPoint` or a ready :class:`Footprint`.
    """
    fp = point if isinstance(point, Footprint) else footprint_of(point, half_angle_deg)
    pts = region.uncovered_points
    if len(pts) == 0:
        raise RegionError("region has no uncovered area")
    return float(fp.mask(pts).mean())


@dataclass(frozen=True)
class CoverageSample:
    time: datetime
    fraction: float
    footprint: Footprint
    alt_km: float


@dataclass(frozen=True)
class CoverageTrack:
    satellite: str
    samples: tuple

    def __post_init__(self):
        times = [s.time for s in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("coverage samples must have strictly increasing timestamps")
        if any(not 0.0 <= s.fraction <= 1.0 for s in self.samples):
            raise ValueError("coverage fractions must lie in [0, 1]")

    @property
    def times(self) -> list:
        return [s.time for s in self.samples]

    @property
    def mean_fraction(self) -> float:
        return float(np.mean([s.fraction for s in self.samples])) if self.samples else 0.0


def coverage_track(rec: TLERecord, region: Region, t0, t1, step: float = 10.0,
                   half_angle_deg: float = 40.0) -> CoverageTrack:
    samples = []
    for p in propagate(rec, t0, t1, step):
        fp = footprint_of(p, half_angle_deg)
        samples.append(CoverageSample(p.time, coverage_fraction(fp, region), fp, p.alt_km))
    return CoverageTrack(rec.name, tuple(samples))


def elevation_deg(sat_lat, sat_lon, alt_km, site_lat, site_lon) -> float:
    """Elevation of a satellite above a ground site's horizon (spherical Earth)."""
    gamma = math.radians(float(central_angle_deg(sat_lat, sat_lon, site_lat, site_lon)))
    ratio = R_EARTH / (R_EARTH + alt_km)
    return math.degrees(math.atan2(math.cos(gamma) - ratio, math.sin(gamma)))


def great_circle_km(a: Site, b: Site) -> float:
    return math.radians(float(central_angle_deg(a.lat, a.lon, b.lat, b.lon))) * R_EARTH
