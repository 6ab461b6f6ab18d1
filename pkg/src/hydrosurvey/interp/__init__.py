"""Triangulation-based gridding and riverbed cross-sections."""

from .delaunay import Triangulation, triangulate
from .profile import CrossSectionProfile, chord_project, cross_section
from .raster import RasterGrid, ScatterSet, interp_at, rasterize, read_esri_ascii, write_esri_ascii

__all__ = [
    "CrossSectionProfile",
    "RasterGrid",
    "ScatterSet",
    "Triangulation",
    "chord_project",
    "cross_section",
    "interp_at",
    "rasterize",
    "read_esri_ascii",
    "triangulate",
    "write_esri_ascii",
]
