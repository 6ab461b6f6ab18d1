"""WGS84 <-> local metric frame conversion.

Survey areas are a few hundred meters across, so an equirectangular tangent
approximation is used: latitude offsets scale by a constant number of meters
per degree and longitude offsets additionally by ``cos(origin latitude)``.
The result is then rotated so the frame's x-axis can follow the river.

Haversine distance on a sphere is provided as an independent check on the
projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError, DomainError

EARTH_RADIUS_M = 6_371_000.0
# Meters per degree of latitude on the haversine sphere, so that projected
# distances and great-circle distances share one Earth model.
METERS_PER_DEG_LAT = EARTH_RADIUS_M * math.pi / 180.0
# Commonly quoted constant (equatorial degree of the WGS84 ellipsoid).
METERS_PER_DEG_LAT_WGS84_EQUATOR = 111_320.0

MAX_ORIGIN_LAT = 89.0


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise DomainError(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise DomainError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise DomainError(f"longitude {self.lon} outside [-180, 180]")

    def __iter__(self) -> Iterator[float]:
        yield self.lat
        yield self.lon


@dataclass(frozen=True)
class LocalPoint:
    """Position in meters along the rotated axes of a :class:`LocalFrame`."""

    x: float
    y: float

    def __iter__(self) -> Iterator[float]:
        yield self.x
        yield self.y

    def distance_to(self, other: LocalPoint) -> float:
        return math.hypot(other.x - self.x, other.y - self.y)


@dataclass(frozen=True)
class LocalFrame:
    origin: GeoPoint
    rotation: float
    meters_per_deg_lat: float
    meters_per_deg_lon: float

    def __post_init__(self):
        if not self.meters_per_deg_lat > 0:
            raise ConfigError("meters_per_deg_lat must be positive")
        if not math.isfinite(self.rotation):
            raise ConfigError("rotation must be finite")


def make_local_frame(
    origin: GeoPoint,
    rotation: float = 0.0,
    meters_per_deg_lat: float = METERS_PER_DEG_LAT,
) -> LocalFrame:
    """Build a local frame centred on ``origin``.

    ``rotation`` is the angle (radians, counter-clockwise from east) of the
    frame's x-axis. Latitudes within 1 degree of a pole are rejected because
    the longitude scale collapses there.
    """
    if abs(origin.lat) >= MAX_ORIGIN_LAT:
        raise DomainError(f"origin latitude {origin.lat} too close to a pole")
    mlon = meters_per_deg_lat * math.cos(math.radians(origin.lat))
    return LocalFrame(origin, float(rotation), float(meters_per_deg_lat), mlon)


def project(frame: LocalFrame, p: GeoPoint) -> LocalPoint:
    east = (p.lon - frame.origin.lon) * frame.meters_per_deg_lon
    north = (p.lat - frame.origin.lat) * frame.meters_per_deg_lat
    c, s = math.cos(frame.rotation), math.sin(frame.rotation)
    return LocalPoint(c * east + s * north, -s * east + c * north)


def unproject(frame: LocalFrame, p: LocalPoint) -> GeoPoint:
    c, s = math.cos(frame.rotation), math.sin(frame.rotation)
    east = c * p.x - s * p.y
    north = s * p.x + c * p.y
    return GeoPoint(
        frame.origin.lat + north / frame.meters_per_deg_lat,
        frame.origin.lon + east / frame.meters_per_deg_lon,
    )


def project_arrays(frame: LocalFrame, lat, lon) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`project`; returns ``(x, y)`` arrays."""
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    east = (lon - frame.origin.lon) * frame.meters_per_deg_lon
    north = (lat - frame.origin.lat) * frame.meters_per_deg_lat
    c, s = math.cos(frame.rotation), math.sin(frame.rotation)
    return c * east + s * north, -s * east + c * north


def unproject_arrays(frame: LocalFrame, x, y) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`unproject`; returns ``(lat, lon)`` arrays."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c, s = math.cos(frame.rotation), math.sin(frame.rotation)
    east = c * x - s * y
    north = s * x + c * y
    return (
        frame.origin.lat + north / frame.meters_per_deg_lat,
        frame.origin.lon + east / frame.meters_per_deg_lon,
    )


def geodesic_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle (haversine) distance in meters."""
    lat1, lat2 = math.radians(a.lat), math.radians(b.lat)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon - a.lon)
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _segments_cross(p1, p2, p3, p4) -> bool:
    d1 = _cross(p3, p4, p1)
    d2 = _cross(p3, p4, p2)
    d3 = _cross(p1, p2, p3)
    d4 = _cross(p1, p2, p4)
    return d1 * d2 < 0 and d3 * d4 < 0


@dataclass(frozen=True)
class SurveyRegion:
    """Four survey corners, in traversal order."""

    corners: tuple[GeoPoint, GeoPoint, GeoPoint, GeoPoint]

    def __post_init__(self):
        if len(self.corners) != 4:
            raise ConfigError("a survey region needs exactly 4 corners")
        frame = make_local_frame(self.corners[0])
        pts = [tuple(project(frame, c)) for c in self.corners]
        if _segments_cross(pts[0], pts[1], pts[2], pts[3]) or _segments_cross(
            pts[1], pts[2], pts[3], pts[0]
        ):
            raise ConfigError("survey region is self-intersecting")
        if abs(_shoelace(pts)) <= 0.0:
            raise ConfigError("survey region has zero area")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> SurveyRegion:
        return cls(tuple(GeoPoint(float(lat), float(lon)) for lat, lon in pairs))

    def local_corners(self, frame: LocalFrame) -> list[LocalPoint]:
        return [project(frame, c) for c in self.corners]

    def edge_lengths(self, frame: LocalFrame) -> list[float]:
        pts = self.local_corners(frame)
        return [pts[i].distance_to(pts[(i + 1) % 4]) for i in range(4)]

    def area(self, frame: LocalFrame) -> float:
        return abs(_shoelace([tuple(p) for p in self.local_corners(frame)]))

    def bounding_rect(self, frame: LocalFrame) -> tuple[float, float, float, float]:
        """Axis-aligned ``(x0, y0, width, height)`` of the corners in ``frame``."""
        pts = self.local_corners(frame)
        xs = [p.x for p in pts]
        ys = [p.y for p in pts]
        return min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys)


def _shoelace(pts) -> float:
    n = len(pts)
    return 0.5 * sum(
        pts[i][0] * pts[(i + 1) % n][1] - pts[(i + 1) % n][0] * pts[i][1] for i in range(n)
    )


def longest_edge_rotation(region: SurveyRegion) -> float:
    """Rotation that aligns a frame's x-axis with the region's longest edge.

    The angle is folded into (-pi/2, pi/2] so x still points roughly east.
    """
    frame = make_local_frame(region.corners[0])
    pts = region.local_corners(frame)
    lengths = region.edge_lengths(frame)
    i = max(range(4), key=lambda k: lengths[k])
    a, b = pts[i], pts[(i + 1) % 4]
    angle = math.atan2(b.y - a.y, b.x - a.x)
    if angle <= -math.pi / 2:
        angle += math.pi
    elif angle > math.pi / 2:
        angle -= math.pi
    return angle
