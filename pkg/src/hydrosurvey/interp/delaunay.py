"""Incremental Delaunay triangulation (Bowyer-Watson with ghost triangles).

The convex hull is closed off by "ghost" triangles that share a symbolic
vertex at infinity, so points outside the current hull are inserted by the
same cavity-carving step as interior points. All geometric decisions go
through the exact predicates in :mod:`.predicates`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError
from .predicates import incircle, orient2d

GHOST = -1


def _strictly_between(a, b, p) -> bool:
    # a, b, p known collinear
    if a[0] != b[0]:
        return min(a[0], b[0]) < p[0] < max(a[0], b[0])
    return min(a[1], b[1]) < p[1] < max(a[1], b[1])


class _Builder:
    def __init__(self, pts):
        self.pts = pts
        self.tris: dict[int, tuple[int, int, int]] = {}
        self.edge: dict[tuple[int, int], int] = {}
        self._next = 0
        self.last = None
        self.rng = random.Random(0)

    def add(self, a, b, c):
        if a == GHOST:
            a, b, c = b, c, a
        elif b == GHOST:
            a, b, c = c, a, b
        tid = self._next
        self._next += 1
        self.tris[tid] = (a, b, c)
        self.edge[(a, b)] = tid
        self.edge[(b, c)] = tid
        self.edge[(c, a)] = tid
        if c != GHOST:
            self.last = tid
        return tid

    def remove(self, tid):
        a, b, c = self.tris.pop(tid)
        for e in ((a, b), (b, c), (c, a)):
            if self.edge.get(e) == tid:
                del self.edge[e]

    def conflicts(self, tid, p) -> bool:
        a, b, c = self.tris[tid]
        P = self.pts
        if c == GHOST:
            o = orient2d(P[a], P[b], p)
            return o > 0 or (o == 0 and _strictly_between(P[a], P[b], p))
        return incircle(P[a], P[b], P[c], p) > 0

    def locate(self, p) -> int:
        P = self.pts
        t = self.last if self.last in self.tris else next(iter(self.tris))
        for _ in range(4 * len(self.tris) + 16):
            a, b, c = self.tris[t]
            if c == GHOST:
                if self.conflicts(t, p):
                    return t
                t = self.edge[(b, a)]
                continue
            edges = ((a, b), (b, c), (c, a))
            k0 = int(self.rng.random() * 3)
            for k in range(3):
                u, v = edges[(k0 + k) % 3]
                if orient2d(P[u], P[v], p) < 0:
                    t = self.edge[(v, u)]
                    break
            else:
                return t
        for t in self.tris:
            if self.conflicts(t, p):
                return t
        raise RuntimeError("point location failed")  # pragma: no cover

    def insert(self, i):
        p = self.pts[i]
        start = self.locate(p)
        cavity = {start}
        stack = [start]
        seen = {start}
        while stack:
            a, b, c = self.tris[stack.pop()]
            for u, v in ((a, b), (b, c), (c, a)):
                nb = self.edge[(v, u)]
                if nb not in seen:
                    seen.add(nb)
                    if self.conflicts(nb, p):
                        cavity.add(nb)
                        stack.append(nb)
        boundary = []
        for tid in cavity:
            a, b, c = self.tris[tid]
            for u, v in ((a, b), (b, c), (c, a)):
                if self.edge[(v, u)] not in cavity:
                    boundary.append((u, v))
        for tid in cavity:
            self.remove(tid)
        for u, v in boundary:
            self.add(u, v, i)


@dataclass(frozen=True)
class Triangulation:
    """Delaunay mesh: CCW vertex-index triples plus edge adjacency.

    ``neighbors[t, k]`` is the triangle across the edge from vertex ``k`` to
    vertex ``k + 1`` of triangle ``t``, or -1 on the convex hull.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    neighbors: np.ndarray

    def __post_init__(self):
        # plain-list copies keep the pure-Python walk fast
        object.__setattr__(self, "_pts", [tuple(v) for v in self.vertices.tolist()])
        object.__setattr__(self, "_tris", [tuple(t) for t in self.triangles.tolist()])
        object.__setattr__(self, "_nbrs", [tuple(n) for n in self.neighbors.tolist()])

    def __len__(self):
        return len(self.triangles)

    def area(self) -> float:
        v = self.vertices[self.triangles]
        d1 = v[:, 1] - v[:, 0]
        d2 = v[:, 2] - v[:, 0]
        return float(0.5 * np.sum(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]))

    def hull_edges(self) -> list[tuple[int, int]]:
        out = []
        for t, nb in zip(self._tris, self._nbrs):
            for k in range(3):
                if nb[k] == -1:
                    out.append((t[k], t[(k + 1) % 3]))
        return out

    def locate(self, p, hint: int = 0) -> int:
        """Index of a triangle containing ``p`` (closed), or -1 outside the hull.

        When ``p`` lies on an edge shared by two triangles, the lower index wins.
        """
        P, T, N = self._pts, self._tris, self._nbrs
        p = (float(p[0]), float(p[1]))
        t = hint if 0 <= hint < len(T) else 0
        for _ in range(len(T) + 8):
            tri = T[t]
            for k in range(3):
                if orient2d(P[tri[k]], P[tri[(k + 1) % 3]], p) < 0:
                    t = N[t][k]
                    if t == -1:
                        return -1
                    break
            else:
                return self._lowest_on_edge(t, p)
        return self._locate_scan(p)

    def _lowest_on_edge(self, t, p) -> int:
        P, tri = self._pts, self._tris[t]
        zeros = [k for k in range(3) if orient2d(P[tri[k]], P[tri[(k + 1) % 3]], p) == 0]
        if len(zeros) == 1:
            nb = self._nbrs[t][zeros[0]]
            if nb != -1 and nb < t:
                return nb
        return t

    def _locate_scan(self, p) -> int:
        P = self._pts
        for t, tri in enumerate(self._tris):
            if all(orient2d(P[tri[k]], P[tri[(k + 1) % 3]], p) >= 0 for k in range(3)):
                return self._lowest_on_edge(t, p)
        return -1


def _hilbert_index(x: np.ndarray, y: np.ndarray, order: int = 16) -> np.ndarray:
    """Position of integer grid cells along a Hilbert curve of side 2**order."""
    x = x.astype(np.int64).copy()
    y = y.astype(np.int64).copy()
    d = np.zeros_like(x)
    s = 1 << (order - 1)
    while s > 0:
        rx = (x & s) > 0
        ry = (y & s) > 0
        d += s * s * ((3 * rx) ^ ry)
        flip = ~ry
        swap_x = flip & rx
        x[swap_x] = s - 1 - x[swap_x]
        y[swap_x] = s - 1 - y[swap_x]
        x[flip], y[flip] = y[flip], x[flip].copy()
        s >>= 1
    return d


def _insertion_order(pts: np.ndarray, skip) -> list[int]:
    """Biased randomized insertion order.

    A random permutation split into rounds of doubling size, each round
    sorted along a Hilbert curve, so consecutive points are close and the
    point-location walk stays short while keeping randomized behaviour.
    """
    idx = np.array([k for k in range(len(pts)) if k not in skip], dtype=np.int64)
    np.random.default_rng(12345).shuffle(idx)
    if len(idx) == 0:
        return []
    lo = pts.min(axis=0)
    span = float(np.max(pts.max(axis=0) - lo)) or 1.0
    cells = np.floor((pts[idx] - lo) / span * 65535).astype(np.int64)
    key = _hilbert_index(cells[:, 0], cells[:, 1])
    order = []
    start, size = 0, 8
    while start < len(idx):
        end = len(idx) if len(idx) - start <= 2 * size else start + size
        chunk = np.arange(start, end)
        order.extend(idx[chunk[np.argsort(key[chunk], kind="stable")]].tolist())
        start, size = end, size * 2
    return order


def triangulate(points) -> Triangulation:
    """Delaunay triangulation of a 2-D point set.

    Raises :class:`DegenerateInputError` for fewer than three points, exact
    duplicates, or an entirely collinear set.
    """
    pts = [(float(x), float(y)) for x, y in np.asarray(points, dtype=float).reshape(-1, 2)]
    n = len(pts)
    if n < 3:
        raise DegenerateInputError(f"need at least 3 points, got {n}")
    if not all(np.isfinite(pts).ravel()):
        raise DegenerateInputError("non-finite coordinates")
    if len(set(pts)) != n:
        raise DegenerateInputError("duplicate points; merge them before triangulating")

    i0, i1 = 0, 1
    i2 = next((k for k in range(2, n) if orient2d(pts[i0], pts[i1], pts[k]) != 0), None)
    if i2 is None:
        raise DegenerateInputError("all points are collinear")
    if orient2d(pts[i0], pts[i1], pts[i2]) < 0:
        i1, i2 = i2, i1

    b = _Builder(pts)
    b.add(i0, i1, i2)
    for u, v in ((i0, i1), (i1, i2), (i2, i0)):
        b.add(v, u, GHOST)

    for k in _insertion_order(np.array(pts), (i0, i1, i2)):
        b.insert(k)

    solid = []
    for a, bb, c in b.tris.values():
        if c == GHOST:
            continue
        # rotate so the smallest index leads; keeps output canonical
        r = min(range(3), key=lambda j: (a, bb, c)[j])
        solid.append(tuple((a, bb, c)[(r + j) % 3] for j in range(3)))
    solid.sort()
    index = {}
    for t, (a, bb, c) in enumerate(solid):
        index[(a, bb)] = t
        index[(bb, c)] = t
        index[(c, a)] = t
    nbrs = [
        [index.get((tri[(k + 1) % 3], tri[k]), -1) for k in range(3)] for tri in solid
    ]
    return Triangulation(
        np.array(pts, dtype=float),
        np.array(solid, dtype=np.int64).reshape(-1, 3),
        np.array(nbrs, dtype=np.int64).reshape(-1, 3),
    )
