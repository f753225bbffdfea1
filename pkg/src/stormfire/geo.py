"""Geodetic distance, grid-cell addressing, and radius neighbor queries.

Everything downstream (storm/fire joins, regional aggregation) sits on two
fixed-resolution latitude/longitude grids, so this module deliberately stops
at floor-indexed grids plus an exact haversine filter: cells give a cheap
conservative candidate window, the distance check gives correctness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

EARTH_RADIUS_KM = 6371.0
#: km spanned by one degree of latitude (and of longitude at the equator).
KM_PER_DEG = EARTH_RADIUS_KM * math.pi / 180.0


def normalize_lon(lon: float) -> float:
    """Map a longitude in degrees onto the half-open interval [-180, 180).

    Values already in range pass through untouched: the wrap arithmetic must
    not perturb representable coordinates (cell ownership depends on them).
    """
    if -180.0 <= lon < 180.0:
        return lon
    wrapped = math.fmod(lon + 180.0, 360.0)
    if wrapped < 0.0:
        wrapped += 360.0
    return wrapped - 180.0


@dataclass(frozen=True)
class GeoPoint:
    """A point on the sphere; longitude is normalized on construction."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and -90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude {self.lat!r} outside [-90, 90]")
        if not math.isfinite(self.lon):
            raise ValueError(f"longitude {self.lon!r} is not finite")
        object.__setattr__(self, "lat", float(self.lat))
        object.__setattr__(self, "lon", normalize_lon(float(self.lon)))


class CellId(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True)
class GridSpec:
    """A global grid of half-open cells, `resolution_deg` on a side.

    Cell (0, 0) has `origin` as its south-west corner; rows increase
    northward, columns eastward with wraparound at the antimeridian.
    """

    resolution_deg: float = 0.05
    origin: GeoPoint = field(default_factory=lambda: GeoPoint(-90.0, -180.0))

    def __post_init__(self) -> None:
        if self.resolution_deg <= 0.0:
            raise ValueError("resolution_deg must be positive")
        turns = 360.0 / self.resolution_deg
        if abs(turns - round(turns)) > 1e-9:
            raise ValueError(f"resolution {self.resolution_deg} does not divide 360")

    @property
    def n_rows(self) -> int:
        return int(round(180.0 / self.resolution_deg))

    @property
    def n_cols(self) -> int:
        return int(round(360.0 / self.resolution_deg))

    def cell_center(self, cell: CellId) -> GeoPoint:
        lat = self.origin.lat + (cell.row + 0.5) * self.resolution_deg
        lon = self.origin.lon + (cell.col + 0.5) * self.resolution_deg
        return GeoPoint(min(lat, 90.0), lon)


#: Storm observations live on the 0.05-degree grid, weather on 0.25 degrees.
THUNDER_GRID = GridSpec(0.05)
WEATHER_GRID = GridSpec(0.25)


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km on a sphere of radius 6371.0 km."""
    rlat1 = math.radians(a.lat)
    rlat2 = math.radians(b.lat)
    dlat = rlat2 - rlat1
    dlon = math.radians(b.lon - a.lon)
    s = (
        math.sin(dlat / 2.0) ** 2
        + math.cos(rlat1) * math.cos(rlat2) * math.sin(dlon / 2.0) ** 2
    )
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(s)))


def cell_of(p: GeoPoint, spec: GridSpec) -> CellId:
    """Floor-based cell assignment; boundary points fall in the higher-index
    cell (half-open on both axes). The north-pole edge folds into the top row
    so that every valid point owns exactly one cell.
    """
    row = math.floor((p.lat - spec.origin.lat) / spec.resolution_deg)
    row = min(max(row, 0), spec.n_rows - 1)
    dlon = math.fmod(p.lon - spec.origin.lon, 360.0)
    if dlon < 0.0:
        dlon += 360.0
    col = math.floor(dlon / spec.resolution_deg) % spec.n_cols
    return CellId(row, col)


@dataclass
class SpatialIndex:
    """Immutable-after-build bucket index of points by containing grid cell.

    Record handles are the integer positions of the points passed to
    :meth:`build`; callers keep payloads in a parallel sequence.
    """

    spec: GridSpec
    points: list[GeoPoint]
    buckets: dict[CellId, list[int]]

    @classmethod
    def build(cls, points: Sequence[GeoPoint], spec: GridSpec) -> "SpatialIndex":
        buckets: dict[CellId, list[int]] = {}
        for handle, p in enumerate(points):
            buckets.setdefault(cell_of(p, spec), []).append(handle)
        return cls(spec=spec, points=list(points), buckets=buckets)

    def neighbors_within(self, center: GeoPoint, radius_km: float) -> list[int]:
        return neighbors_within(self, center, radius_km)


def _max_dlon_deg(center_lat: float, band_lat: float, radius_km: float) -> float | None:
    """Largest |delta longitude| (degrees) a point at latitude `band_lat` can
    have from `center_lat` while staying within `radius_km`. None means the
    bound saturates (poles or tiny cosines): scan the full longitude range.
    """
    c1 = math.cos(math.radians(center_lat))
    c2 = math.cos(math.radians(band_lat))
    if c1 <= 0.0 or c2 <= 0.0:
        return None
    s = math.sin(radius_km / (2.0 * EARTH_RADIUS_KM)) / math.sqrt(c1 * c2)
    if s >= 1.0:
        return None
    return math.degrees(2.0 * math.asin(s))


def neighbors_within(idx: SpatialIndex, center: GeoPoint, radius_km: float) -> list[int]:
    """Handles of all indexed points within `radius_km` (inclusive) of center.

    Scans a conservative cell window (1/cos(lat) column widening, full
    longitude range when the window reaches a pole) and filters each
    candidate by exact haversine distance. Returns handles ascending.
    """
    if radius_km <= 0.0:
        raise ValueError("radius_km must be positive")
    spec = idx.spec
    res = spec.resolution_deg
    center_cell = cell_of(center, spec)
    # +1 covers the center's offset inside its own cell.
    dr = math.ceil(radius_km / (KM_PER_DEG * res)) + 1
    found: list[int] = []
    for row in range(center_cell.row - dr, center_cell.row + dr + 1):
        if row < 0 or row >= spec.n_rows:
            continue
        lat_lo = spec.origin.lat + row * res
        lat_hi = lat_lo + res
        # Widest the window can get anywhere in this row's latitude band.
        band_lat = max(abs(lat_lo), abs(lat_hi))
        dlon = _max_dlon_deg(center.lat, band_lat, radius_km)
        if dlon is None or abs(center.lat) + radius_km / KM_PER_DEG >= 90.0:
            cols = range(spec.n_cols)
        else:
            dc = math.ceil(dlon / res) + 1
            if 2 * dc + 1 >= spec.n_cols:
                cols = range(spec.n_cols)
            else:
                cols = ((center_cell.col + d) % spec.n_cols for d in range(-dc, dc + 1))
        for col in cols:
            for handle in idx.buckets.get(CellId(row, col), ()):
                if haversine_km(center, idx.points[handle]) <= radius_km:
                    found.append(handle)
    found.sort()
    return found
