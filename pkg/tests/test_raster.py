from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hydrosurvey.errors import ConfigError, DegenerateInputError, ParseError
from hydrosurvey.interp import ScatterSet, interp_at, rasterize, read_esri_ascii, triangulate, write_esri_ascii
from hydrosurvey.interp.raster import NODATA, format_esri_ascii

from oracles import convex_hull, in_hull


def _affine(p):
    return 2 * p[:, 0] - 3 * p[:, 1] + 1


class TestInterpAt:
    pts = np.array([(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)])
    vals = np.array([1.0, 5.0, 9.0])

    def test_vertex_exact(self):
        tri = triangulate(self.pts)
        for p, v in zip(self.pts, self.vals):
            assert interp_at(tri, self.vals, p) == v

    def test_centroid_is_mean(self):
        tri = triangulate(self.pts)
        c = self.pts.mean(axis=0)
        assert interp_at(tri, self.vals, c) == pytest.approx(self.vals.mean(), abs=1e-12)

    def test_outside_is_none(self):
        tri = triangulate(self.pts)
        assert interp_at(tri, self.vals, (5.0, 5.0)) is None

    def test_linear_field_reproduced(self):
        rng = np.random.default_rng(30)
        pts = rng.uniform(0, 10, (30, 2))
        tri = triangulate(pts)
        vals = _affine(pts)
        hull = convex_hull(pts)
        checked = 0
        while checked < 100:
            q = rng.uniform(0, 10, 2)
            if not in_hull(hull, q):
                continue
            got = interp_at(tri, vals, q)
            assert got == pytest.approx(2 * q[0] - 3 * q[1] + 1, abs=1e-9)
            checked += 1

    def test_shared_edge_agrees(self):
        # the midpoint of the square's diagonal lies on the shared edge
        pts = np.array([(0, 0), (1, 0), (1, 1), (0, 1)], dtype=float)
        vals = np.array([0.3, 7.0, 2.0, -4.0])
        tri = triangulate(pts)
        counts = Counter(tuple(sorted(map(int, e))) for t in tri.triangles for e in zip(t, np.roll(t, -1)))
        ((u, v),) = [e for e, c in counts.items() if c == 2]
        mid = (pts[u] + pts[v]) / 2
        expect = (vals[u] + vals[v]) / 2
        for t in range(len(tri)):
            assert interp_at(tri, vals, mid, hint=t) == pytest.approx(expect, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 40))
def test_values_within_vertex_bounds(seed, n):
    rng = np.random.default_rng(seed)
    pts = np.unique(rng.uniform(-5, 5, (n, 2)), axis=0)
    if len(convex_hull(pts)) < 3:
        return
    vals = rng.normal(size=len(pts)) * 10
    grid = rasterize(ScatterSet(pts, vals), cell=0.7)
    got = grid.values[~grid.mask]
    assert np.all(got >= vals.min()) and np.all(got <= vals.max())


class TestRasterize:
    def test_unit_square_half_cells(self):
        pts = np.array([(0, 0), (1, 0), (1, 1), (0, 1)], dtype=float)
        grid = rasterize(ScatterSet(pts, pts[:, 1]), cell=0.5)
        assert (grid.nx, grid.ny) == (2, 2)
        assert not grid.mask.any()
        _, cy = grid.centers()
        np.testing.assert_allclose(grid.values, cy, atol=1e-12)

    def test_bounds_outside_hull_all_masked(self):
        pts = np.array([(0, 0), (1, 0), (0, 1)], dtype=float)
        grid = rasterize(ScatterSet(pts, [1, 2, 3]), cell=1.0, bounds=(10, 10, 5, 5))
        assert grid.mask.all()
        assert np.isnan(grid.values).all()

    def test_cell_larger_than_hull(self):
        pts = np.array([(0, 0), (1, 0), (0, 1)], dtype=float)
        grid = rasterize(ScatterSet(pts, [1, 2, 3]), cell=5.0, bounds=(-5, -5, 10, 10))
        assert (~grid.mask).sum() <= 1

    def test_mask_matches_hull(self):
        rng = np.random.default_rng(11)
        pts = rng.uniform(0, 20, (80, 2))
        grid = rasterize(ScatterSet(pts, _affine(pts)), cell=0.5, bounds=(-2, -2, 24, 24))
        hull = convex_hull(pts)
        cx, cy = grid.centers()
        inside = np.array([[in_hull(hull, (x, y)) for x, y in zip(rx, ry)] for rx, ry in zip(cx, cy)])
        np.testing.assert_array_equal(~grid.mask, inside)
        truth = 2 * cx - 3 * cy + 1
        np.testing.assert_allclose(grid.values[inside], truth[inside], atol=1e-9)

    def test_too_few_points(self):
        with pytest.raises(DegenerateInputError):
            rasterize(ScatterSet([(0, 0), (1, 1)], [1, 2]))

    def test_bad_cell(self):
        pts = np.array([(0, 0), (1, 0), (0, 1)], dtype=float)
        with pytest.raises(ConfigError):
            rasterize(ScatterSet(pts, [1, 2, 3]), cell=0.0)

    def test_duplicates_averaged(self):
        pts = np.array([(0, 0), (1, 0), (0, 1), (1, 0)], dtype=float)
        grid = rasterize(ScatterSet(pts, [0.0, 2.0, 0.0, 4.0]), cell=1.0, bounds=(0, 0, 1, 1))
        # centre (0.5, 0.5) lies on the hypotenuse: mean of 3.0 and 0.0
        assert grid.values[0, 0] == pytest.approx(1.5)


def test_merge_tolerance():
    s = ScatterSet([(0, 0), (0, 5e-7), (3, 3)], [1.0, 3.0, 9.0]).merged()
    assert len(s) == 2
    assert sorted(s.values) == [2.0, 9.0]


class TestEsri:
    def _grid(self):
        pts = np.array([(0, 0), (3, 0), (3, 2), (0, 2), (1, 1.5)], dtype=float)
        return rasterize(ScatterSet(pts, pts[:, 0] + 10 * pts[:, 1]), cell=0.5, bounds=(-1, 0, 5, 2))

    def test_header_and_row_order(self):
        text = format_esri_ascii(self._grid())
        lines = text.splitlines()
        assert [ln.split()[0] for ln in lines[:6]] == [
            "ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "NODATA_value"
        ]
        assert lines[5].split()[1] == str(NODATA)
        first = [float(v) for v in lines[6].split()]
        last = [float(v) for v in lines[-1].split()]
        # top row is the northernmost, so larger y values
        assert max(first) > max(last)
        assert first[0] == NODATA

    def test_round_trip(self, tmp_path):
        g = self._grid()
        p = tmp_path / "g.asc"
        write_esri_ascii(g, p)
        back = read_esri_ascii(p)
        assert back.origin == g.origin and back.cell == g.cell
        np.testing.assert_array_equal(back.mask, g.mask)
        np.testing.assert_array_equal(back.values[~g.mask], g.values[~g.mask])

    def test_bad_header(self, tmp_path):
        p = tmp_path / "bad.asc"
        p.write_text("ncols 2\nrows 2\n")
        with pytest.raises(ParseError):
            read_esri_ascii(p)
