"""Piecewise-linear interpolation of scattered samples onto a regular grid."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from ..errors import ConfigError, DegenerateInputError, ParseError
from .delaunay import Triangulation, triangulate
from .predicates import orient2d

DEFAULT_CELL_M = 1.0
DUPLICATE_TOL_M = 1e-6
NODATA = -9999


@dataclass(frozen=True)
class ScatterSet:
    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if len(pts) != len(vals):
            raise ConfigError("points and values differ in length")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    @classmethod
    def from_records(cls, records: Iterable, parameter: str) -> ScatterSet:
        """Positions and values of ``parameter`` from synchronised records, skipping gaps."""
        pts, vals = [], []
        for r in records:
            v = r.values.get(parameter)
            if v is not None:
                pts.append((r.position.x, r.position.y))
                vals.append(v)
        return cls(np.array(pts, dtype=float).reshape(-1, 2), np.array(vals, dtype=float))

    def merged(self, tol: float = DUPLICATE_TOL_M) -> ScatterSet:
        """Average the values of points closer than ``tol`` (repeat measurements)."""
        n = len(self)
        if n < 2:
            return self
        pairs = cKDTree(self.points).query_pairs(tol, output_type="ndarray")
        if len(pairs) == 0:
            return self
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i, j in pairs:
            ri, rj = find(int(i)), find(int(j))
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
        roots = np.array([find(i) for i in range(n)])
        keep = np.unique(roots)
        pts = np.array([self.points[roots == r].mean(axis=0) for r in keep])
        vals = np.array([self.values[roots == r].mean() for r in keep])
        return ScatterSet(pts, vals)


def interp_at(tri: Triangulation, values, p, hint: int = 0) -> float | None:
    """Linearly interpolate ``values`` (one per vertex) at ``p``.

    Returns ``None`` outside the convex hull. Points on an edge are
    interpolated along that edge only, so both adjacent triangles agree.
    """
    t = tri.locate(p, hint)
    if t < 0:
        return None
    return _interp_in(tri, values, t, (float(p[0]), float(p[1])))


def _interp_in(tri: Triangulation, values, t: int, p) -> float:
    P = tri._pts
    ia, ib, ic = tri._tris[t]
    a, b, c = P[ia], P[ib], P[ic]
    zero = [
        orient2d(b, c, p) == 0,  # opposite a
        orient2d(c, a, p) == 0,  # opposite b
        orient2d(a, b, p) == 0,  # opposite c
    ]
    idx = (ia, ib, ic)
    if sum(zero) >= 2:
        k = next(k for k in range(3) if not zero[k])
        return float(values[idx[k]])
    if sum(zero) == 1:
        k = zero.index(True)
        u, v = sorted((idx[(k + 1) % 3], idx[(k + 2) % 3]))
        pu, pv = P[u], P[v]
        dx, dy = pv[0] - pu[0], pv[1] - pu[1]
        s = ((p[0] - pu[0]) * dx + (p[1] - pu[1]) * dy) / (dx * dx + dy * dy)
        fu, fv = float(values[u]), float(values[v])
        return min(max(fu + s * (fv - fu), min(fu, fv)), max(fu, fv))

    fa, fb, fc = float(values[ia]), float(values[ib]), float(values[ic])
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    wb = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det
    wc = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det
    f = fa + wb * (fb - fa) + wc * (fc - fa)
    return min(max(f, min(fa, fb, fc)), max(fa, fb, fc))


@dataclass(frozen=True)
class RasterGrid:
    """Cell-centred grid; ``values[j, i]`` is the cell at column i, row j (row 0 south).

    ``mask`` is True for cells whose centre lies outside the data hull;
    those cells hold NaN.
    """

    origin: tuple[float, float]
    cell: float
    values: np.ndarray
    mask: np.ndarray

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        xs = self.origin[0] + (np.arange(self.nx) + 0.5) * self.cell
        ys = self.origin[1] + (np.arange(self.ny) + 0.5) * self.cell
        return np.meshgrid(xs, ys)


def rasterize(
    scatter: ScatterSet,
    cell: float = DEFAULT_CELL_M,
    bounds: Sequence[float] | None = None,
) -> RasterGrid:
    """Interpolate a scatter set onto cell centres of a regular grid.

    ``bounds`` is ``(x0, y0, width, height)``; by default the bounding box
    of the scatter points is used. Duplicate points are merged first.
    """
    if not (cell > 0 and math.isfinite(cell)):
        raise ConfigError(f"cell size must be positive, got {cell}")
    scatter = scatter.merged()
    if len(scatter) < 3:
        raise DegenerateInputError(f"need at least 3 distinct points, got {len(scatter)}")
    tri = triangulate(scatter.points)
    if bounds is None:
        lo = scatter.points.min(axis=0)
        hi = scatter.points.max(axis=0)
        x0, y0, w, h = (float(v) for v in (lo[0], lo[1], hi[0] - lo[0], hi[1] - lo[1]))
    else:
        x0, y0, w, h = map(float, bounds)
        if not (w > 0 and h > 0):
            raise ConfigError("raster bounds must have positive size")
    nx = max(1, math.ceil(w / cell - 1e-9))
    ny = max(1, math.ceil(h / cell - 1e-9))

    values = np.full((ny, nx), np.nan)
    mask = np.ones((ny, nx), dtype=bool)
    vals = scatter.values
    hint = 0
    for j in range(ny):
        y = y0 + (j + 0.5) * cell
        cols = range(nx) if j % 2 == 0 else range(nx - 1, -1, -1)
        for i in cols:
            p = (x0 + (i + 0.5) * cell, y)
            t = tri.locate(p, hint)
            if t < 0:
                continue
            hint = t
            values[j, i] = _interp_in(tri, vals, t, p)
            mask[j, i] = False
    return RasterGrid((float(x0), float(y0)), float(cell), values, mask)


def format_esri_ascii(grid: RasterGrid) -> str:
    lines = [
        f"ncols {grid.nx}",
        f"nrows {grid.ny}",
        f"xllcorner {grid.origin[0]!r}",
        f"yllcorner {grid.origin[1]!r}",
        f"cellsize {grid.cell!r}",
        f"NODATA_value {NODATA}",
    ]
    for j in range(grid.ny - 1, -1, -1):
        row = [
            str(NODATA) if grid.mask[j, i] else repr(float(grid.values[j, i]))
            for i in range(grid.nx)
        ]
        lines.append(" ".join(row))
    return "\n".join(lines) + "\n"


def write_esri_ascii(grid: RasterGrid, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_esri_ascii(grid))


def read_esri_ascii(path) -> RasterGrid:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    keys = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "NODATA_value"]
    header = {}
    for n, key in enumerate(keys):
        parts = lines[n].split() if n < len(lines) else []
        if len(parts) != 2 or parts[0].lower() != key.lower():
            raise ParseError(f"expected header {key}", n + 1, os.fspath(path))
        header[key] = float(parts[1])
    nx, ny = int(header["ncols"]), int(header["nrows"])
    rows = [list(map(float, line.split())) for line in lines[6 : 6 + ny]]
    data = np.array(rows, dtype=float)[::-1]
    if data.shape != (ny, nx):
        raise ParseError("grid body does not match header", None, os.fspath(path))
    mask = data == header["NODATA_value"]
    data[mask] = np.nan
    return RasterGrid((header["xllcorner"], header["yllcorner"]), header["cellsize"], data, mask)
