"""Riverbed cross-sections from transect passes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import ConfigError, DegenerateSegmentError, EmptyInputError

DEFAULT_WINDOW_M = 2.0
DEFAULT_STATION_STEP_M = 0.5


@dataclass(frozen=True)
class CrossSectionProfile:
    stations: np.ndarray
    depths: np.ndarray
    window: float

    def __post_init__(self):
        if np.any(np.diff(self.stations) <= 0):
            raise ValueError("stations must be strictly increasing")


def chord_project(a, b, positions) -> tuple[np.ndarray, np.ndarray]:
    """Distance along the chord a->b and signed lateral offset (left positive)."""
    ax, ay = map(float, a)
    bx, by = map(float, b)
    dx, dy = bx - ax, by - ay
    length = math.hypot(dx, dy)
    if length == 0:
        raise DegenerateSegmentError("transect endpoints coincide")
    ux, uy = dx / length, dy / length
    pts = np.asarray([tuple(p) for p in positions], dtype=float).reshape(-1, 2)
    rx, ry = pts[:, 0] - ax, pts[:, 1] - ay
    return rx * ux + ry * uy, -rx * uy + ry * ux


def cross_section(
    tracks: Iterable[Sequence[tuple[float, float]]],
    station_step: float = DEFAULT_STATION_STEP_M,
    window: float = DEFAULT_WINDOW_M,
) -> CrossSectionProfile:
    """Sliding-window mean depth along a transect, pooling every pass.

    ``tracks`` holds one sequence of ``(chord_distance, depth)`` pairs per
    pass. Stations are the multiples of ``station_step`` inside the pooled
    distance range; each takes the mean of all samples within
    ``window / 2``. Windows are truncated at the ends, and stations with no
    samples are dropped.
    """
    if not (station_step > 0 and window >= station_step):
        raise ConfigError("need window >= station_step > 0")
    pooled = [(float(d), float(z)) for track in tracks for d, z in track]
    if not pooled:
        raise EmptyInputError("no cross-section samples")
    # sorting makes the result independent of pass and sample order
    pooled.sort()
    dist = np.array([d for d, _ in pooled])
    depth = [z for _, z in pooled]

    half = window / 2 * (1 + 1e-9)
    k_lo = math.ceil(dist[0] / station_step - 1e-9)
    k_hi = math.floor(dist[-1] / station_step + 1e-9)
    stations, depths = [], []
    for k in range(k_lo, k_hi + 1):
        s = k * station_step
        lo = np.searchsorted(dist, s - half, side="left")
        hi = np.searchsorted(dist, s + half, side="right")
        if hi > lo:
            stations.append(s)
            depths.append(math.fsum(depth[lo:hi]) / (hi - lo))
    return CrossSectionProfile(np.array(stations), np.array(depths), float(window))
