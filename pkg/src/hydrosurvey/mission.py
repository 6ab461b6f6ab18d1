"""Coverage (lawnmower) and cross-river transect mission plans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .errors import ConfigError, DegenerateSegmentError, InvalidSpacingError
from .geo import LocalPoint

DEFAULT_SPACING_M = 5.0
DEFAULT_CAPTURE_RADIUS_M = 1.0


class PlanKind(str, Enum):
    LAWNMOWER = "lawnmower"
    TRANSECT = "transect"


class LaneAxis(str, Enum):
    ALONG_WIDTH = "along_width"
    ALONG_HEIGHT = "along_height"


@dataclass(frozen=True)
class Waypoint:
    position: LocalPoint
    capture_radius: float = DEFAULT_CAPTURE_RADIUS_M

    def __post_init__(self):
        if not self.capture_radius > 0:
            raise ConfigError("capture_radius must be positive")


@dataclass(frozen=True)
class MissionPlan:
    kind: PlanKind
    waypoints: tuple[Waypoint, ...]
    lane_spacing: float | None = None
    passes: int | None = None
    lane_offsets: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise ConfigError("a mission plan needs at least 2 waypoints")
        if self.kind is PlanKind.LAWNMOWER and len(self.waypoints) % 2:
            raise ConfigError("lawnmower plans have an even number of waypoints")
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            if a.position == b.position:
                raise ConfigError("consecutive waypoints must differ")

    @property
    def points(self) -> list[LocalPoint]:
        return [w.position for w in self.waypoints]


def lane_offsets(extent: float, spacing: float) -> list[float]:
    """Lane positions across ``extent``: 0, s, 2s, ... with the last on the far edge."""
    if not (spacing > 0 and math.isfinite(spacing)):
        raise InvalidSpacingError(f"spacing must be positive, got {spacing}")
    if spacing > extent:
        raise InvalidSpacingError(
            f"spacing {spacing} m exceeds the cross-lane extent {extent} m"
        )
    tol = 1e-9 * extent
    offsets = []
    k = 0
    while k * spacing < extent - tol:
        offsets.append(k * spacing)
        k += 1
    offsets.append(extent)
    return offsets


def plan_lawnmower(
    rect: Sequence[float],
    spacing: float = DEFAULT_SPACING_M,
    lane_axis: LaneAxis | str = LaneAxis.ALONG_WIDTH,
    capture_radius: float = DEFAULT_CAPTURE_RADIUS_M,
) -> MissionPlan:
    """Serpentine coverage of the rectangle ``(x0, y0, width, height)``.

    Lanes run parallel to ``lane_axis`` and are stacked across the other
    axis. The first lane runs in the positive direction, the next back, and
    so on. Both rectangle edges are always surveyed.
    """
    x0, y0, width, height = map(float, rect)
    if not (width > 0 and height > 0):
        raise ConfigError(f"rectangle must have positive size, got {width} x {height}")
    lane_axis = LaneAxis(lane_axis)
    if lane_axis is LaneAxis.ALONG_WIDTH:
        length, cross = width, height
    else:
        length, cross = height, width
    offsets = lane_offsets(cross, spacing)

    waypoints = []
    for i, off in enumerate(offsets):
        ends = (0.0, length) if i % 2 == 0 else (length, 0.0)
        for along in ends:
            if lane_axis is LaneAxis.ALONG_WIDTH:
                p = LocalPoint(x0 + along, y0 + off)
            else:
                p = LocalPoint(x0 + off, y0 + along)
            waypoints.append(Waypoint(p, capture_radius))
    return MissionPlan(
        PlanKind.LAWNMOWER,
        tuple(waypoints),
        lane_spacing=float(spacing),
        lane_offsets=tuple(offsets),
    )


def plan_transect(
    a: LocalPoint,
    b: LocalPoint,
    passes: int = 2,
    capture_radius: float = DEFAULT_CAPTURE_RADIUS_M,
) -> MissionPlan:
    """Back-and-forth traversals of segment ``ab`` (``passes`` crossings)."""
    if a == b:
        raise DegenerateSegmentError("transect endpoints coincide")
    if int(passes) != passes or passes < 1:
        raise ConfigError(f"passes must be a positive integer, got {passes}")
    pts = [a if i % 2 == 0 else b for i in range(int(passes) + 1)]
    return MissionPlan(
        PlanKind.TRANSECT,
        tuple(Waypoint(p, capture_radius) for p in pts),
        passes=int(passes),
    )


def path_length(plan: MissionPlan) -> float:
    pts = plan.points
    return sum(p.distance_to(q) for p, q in zip(pts, pts[1:]))


def plan_to_dict(plan: MissionPlan) -> dict:
    radius = plan.waypoints[0].capture_radius
    out = {
        "kind": plan.kind.value,
        "spacing": plan.lane_spacing,
        "waypoints": [[w.position.x, w.position.y] for w in plan.waypoints],
        "capture_radius": radius,
    }
    if plan.passes is not None:
        out["passes"] = plan.passes
    return out


def plan_from_dict(data: dict) -> MissionPlan:
    try:
        kind = PlanKind(data["kind"])
        radius = float(data.get("capture_radius", DEFAULT_CAPTURE_RADIUS_M))
        wps = tuple(
            Waypoint(LocalPoint(float(x), float(y)), radius) for x, y in data["waypoints"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed plan file: {exc}") from exc
    spacing = data.get("spacing")
    return MissionPlan(
        kind,
        wps,
        lane_spacing=None if spacing is None else float(spacing),
        passes=data.get("passes"),
    )
