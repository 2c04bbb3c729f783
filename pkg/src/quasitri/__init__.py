"""Quasi-uniform point sets on triangles.

Bounded Voronoi diagrams and exact covering radii, greedy packing and
low-discrepancy constructions, mesh-ratio bounds, and an RBF benchmark.
"""
from .geometry import Triangle, parse_triangle, triangle_from_angles
from .bounded_voronoi import build, covering_radius_exact, covering_radius_grid
from .generators import GENERATORS, PointSet, RandomConfig, generate, vg_sequence
from .metrics import mesh_stats, separation_radius, triangle_bounds

__version__ = "0.1.0"

__all__ = [
    "GENERATORS",
    "PointSet",
    "RandomConfig",
    "Triangle",
    "build",
    "covering_radius_exact",
    "covering_radius_grid",
    "generate",
    "mesh_stats",
    "parse_triangle",
    "separation_radius",
    "triangle_bounds",
    "triangle_from_angles",
    "vg_sequence",
]
