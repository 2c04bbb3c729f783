"""Voronoi diagrams clipped to a triangle and largest-empty-disk candidates.

Each cell is built by clipping the triangle with the bisector half-planes of
the other sites, visited in order of distance; clipping stops once the next
bisector lies beyond the current cell's farthest vertex, so only the sites
that can actually touch the cell are used.  Cell vertices are then merged
across cells into Voronoi vertices, boundary intersections and corners.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import CollinearPoints, GeometryError, Triangle, barycentric_grid, circumcircle

MERGE_TOL = 1e-10  # relative to the triangle diameter
CLIP_TOL = 1e-13
INCIDENCE_RTOL = 1e-9
TIE_RTOL = 1e-10
NEIGHBOURS = 24  # first batch of neighbours tried when clipping a cell

INTERIOR = "interior_voronoi_vertex"
BOUNDARY = "boundary_intersection"
CORNER = "triangle_vertex"


class DuplicateSites(GeometryError):
    pass


class SiteOutsideDomain(GeometryError):
    pass


@dataclass(frozen=True)
class CandidatePoint:
    location: tuple[float, float]
    empty_radius: float
    kind: str
    sites: tuple[int, ...] = ()


@dataclass
class BoundedVoronoiDiagram:
    sites: np.ndarray
    domain: Triangle
    cells: list[np.ndarray]
    interior_vertices: list[tuple[tuple[float, float], tuple[int, ...]]]
    boundary_intersections: list[tuple[tuple[float, float], tuple[int, ...]]]
    corners: list[tuple[tuple[float, float], tuple[int, ...]]]
    skeleton_edges: list[tuple[tuple[float, float], tuple[float, float], tuple[int, int]]]
    _candidates: list[CandidatePoint] = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "domain": self.domain.to_json(),
            "sites": self.sites.tolist(),
            "interior_vertices": [
                {"point": list(p), "sites": list(s)} for p, s in self.interior_vertices
            ],
            "boundary_intersections": [
                {"point": list(p), "sites": list(s)} for p, s in self.boundary_intersections
            ],
            "skeleton_edges": [
                {"start": list(p), "end": list(q), "sites": list(s)}
                for p, q, s in self.skeleton_edges
            ],
            "cells": [c.tolist() for c in self.cells],
        }


def _clip_cell(i, sites, order, dists, poly, labels, tol):
    """Clip polygon ``poly`` (ccw, edge labels) to the cell of site ``i``.

    ``order``/``dists`` list candidate neighbours by increasing distance.
    Returns the clipped polygon, its edge labels, and whether a neighbour
    too far to matter was reached (so the remaining sites are irrelevant).
    """
    xi, yi = sites[i]
    rmax = max(math.hypot(px - xi, py - yi) for px, py in poly)
    for j, d in zip(order, dists):
        if j == i:
            continue
        if 0.5 * d > rmax + tol:
            return poly, labels, True
        xj, yj = sites[j]
        nx, ny = (xj - xi) / d, (yj - yi) / d
        mx, my = 0.5 * (xi + xj), 0.5 * (yi + yj)
        s = [(px - mx) * nx + (py - my) * ny for px, py in poly]
        if max(s) <= tol:
            continue
        out_p, out_l = [], []
        nv = len(poly)
        for k in range(nv):
            k1 = (k + 1) % nv
            sp, sq = s[k], s[k1]
            p_out, q_out = sp > tol, sq > tol
            if not p_out:
                out_p.append(poly[k])
                if not q_out:
                    out_l.append(labels[k])
                elif sp < -tol:
                    t = sp / (sp - sq)
                    px, py = poly[k]
                    qx, qy = poly[k1]
                    out_l.append(labels[k])
                    out_p.append((px + t * (qx - px), py + t * (qy - py)))
                    out_l.append(j)
                else:
                    out_l.append(j)
            elif sq < -tol:
                t = sp / (sp - sq)
                px, py = poly[k]
                qx, qy = poly[k1]
                out_p.append((px + t * (qx - px), py + t * (qy - py)))
                out_l.append(labels[k])
        poly, labels = out_p, out_l
        rmax = max(math.hypot(px - xi, py - yi) for px, py in poly)
    return poly, labels, False


def _validate_sites(sites: np.ndarray, t: Triangle) -> None:
    if len(sites) < 1:
        raise GeometryError("need at least one site")
    if not np.all(np.isfinite(sites)):
        raise GeometryError("non-finite site coordinates")
    inside = t.contains(sites)
    if not np.all(inside):
        bad = np.flatnonzero(~inside)[0]
        raise SiteOutsideDomain(f"site {bad} {sites[bad].tolist()} lies outside the triangle")
    if len(sites) > 1:
        pairs = cKDTree(sites).query_pairs(1e-12 * t.diameter)
        if pairs:
            i, j = sorted(pairs)[0]
            raise DuplicateSites(f"sites {i} and {j} coincide")


def _polish(loc, incident, sites, t, on_side):
    """Recompute a merged vertex from its defining sites for full precision."""
    try:
        if len(incident) >= 3:
            # best-conditioned triple: the one spanning the largest area
            cand = incident[:6]
            best, best_area = None, -1.0
            for a in range(len(cand)):
                for b in range(a + 1, len(cand)):
                    for c in range(b + 1, len(cand)):
                        p, q, r = sites[cand[a]], sites[cand[b]], sites[cand[c]]
                        area = abs((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
                        if area > best_area:
                            best, best_area = (p, q, r), area
            center, _ = circumcircle(*best)
            return center
        if len(incident) == 2 and on_side is not None:
            p, q = sites[incident[0]], sites[incident[1]]
            u, v = t.vertices[(on_side + 1) % 3], t.vertices[(on_side + 2) % 3]
            # bisector: (x - m) . (q - p) = 0 with x = u + s (v - u)
            n = (q[0] - p[0], q[1] - p[1])
            m = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
            den = (v[0] - u[0]) * n[0] + (v[1] - u[1]) * n[1]
            if den == 0.0:
                return loc
            s = ((m[0] - u[0]) * n[0] + (m[1] - u[1]) * n[1]) / den
            if -1e-9 <= s <= 1 + 1e-9:
                s = min(max(s, 0.0), 1.0)
                return (u[0] + s * (v[0] - u[0]), u[1] + s * (v[1] - u[1]))
    except CollinearPoints:
        pass
    return loc


def build(sites, t: Triangle) -> BoundedVoronoiDiagram:
    """Voronoi diagram of ``sites`` restricted to the closed triangle ``t``."""
    sites = np.asarray(getattr(sites, "points", sites), dtype=float).reshape(-1, 2)
    _validate_sites(sites, t)
    n = len(sites)
    diam = t.diameter
    tol = CLIP_TOL * diam
    site_list = [tuple(map(float, s)) for s in sites]

    tri = [tuple(map(float, v)) for v in t.ccw_vertices]
    # label -1-k marks the triangle side starting at ccw vertex k
    tri_labels = [-1, -2, -3]

    cells, cell_labels = [], []
    if n == 1:
        cells.append(np.array(tri))
        cell_labels.append(list(tri_labels))
    else:
        tree = cKDTree(sites)
        k0 = min(n, NEIGHBOURS)
        near_d, near_i = tree.query(sites, k=k0)
        for i in range(n):
            poly, labels, done = _clip_cell(i, site_list, near_i[i].tolist(), near_d[i].tolist(), tri, tri_labels, tol)
            if not done and k0 < n:
                # cell still reaches past the nearest k0 sites: use them all
                dists_i, order = tree.query(sites[i], k=n)
                poly, labels, _ = _clip_cell(i, site_list, order.tolist(), dists_i.tolist(), tri, tri_labels, tol)
            cells.append(np.array(poly))
            cell_labels.append(labels)

    # skeleton edges from cells, each shared edge reported once
    skeleton = []
    for i, (poly, labels) in enumerate(zip(cells, cell_labels)):
        nv = len(poly)
        for k, lab in enumerate(labels):
            if lab > i:
                p, q = poly[k], poly[(k + 1) % nv]
                if math.dist(p, q) > MERGE_TOL * diam:
                    skeleton.append((tuple(map(float, p)), tuple(map(float, q)), (i, lab)))

    # merge cell vertices across cells
    all_v = np.concatenate(cells, axis=0)
    groups = _cluster(all_v, MERGE_TOL * diam)
    reps = np.array([all_v[g].mean(axis=0) for g in groups])
    corners = t.ccw_vertices
    # exact corners for vertices that sit on one
    for k in range(len(reps)):
        dc = np.hypot(*(corners - reps[k]).T)
        c = int(np.argmin(dc))
        if dc[c] <= MERGE_TOL * diam:
            reps[k] = corners[c]

    sdist = np.sqrt(((reps[:, None, :] - sites[None, :, :]) ** 2).sum(axis=2))
    rmin = sdist.min(axis=1)
    lam_dist = t.barycentric(reps) * (2.0 * t.area / np.array(t.side_lengths()))
    # side opposite label vertex k in t.vertices order
    interior_v, boundary_v, corner_v, candidates, found = [], [], [], [], []
    corner_set = {tuple(map(float, c)) for c in corners}
    for k, loc in enumerate(reps):
        inc = np.flatnonzero(sdist[k] <= rmin[k] * (1 + INCIDENCE_RTOL) + 1e-14 * diam)
        inc_t = tuple(int(v) for v in inc)
        loc_t = (float(loc[0]), float(loc[1]))
        is_corner = loc_t in corner_set
        side = int(np.argmin(lam_dist[k]))
        on_boundary = lam_dist[k, side] <= 1e-12 * diam
        if is_corner and len(inc_t) < 2:
            kind = CORNER
        elif on_boundary or is_corner:
            kind = BOUNDARY
            if not is_corner:
                loc_t = tuple(map(float, _polish(loc_t, inc_t, site_list, t, side)))
        else:
            kind = INTERIOR
            if len(inc_t) >= 3:
                polished = _polish(loc_t, inc_t, site_list, t, None)
                if math.dist(polished, loc_t) <= 1e-8 * diam:
                    loc_t = tuple(map(float, polished))
        found.append((loc_t, kind, inc_t))
    locs = np.array([f[0] for f in found])
    radii = np.min(np.hypot(sites[None, :, 0] - locs[:, None, 0], sites[None, :, 1] - locs[:, None, 1]), axis=1)
    for (loc_t, kind, inc_t), r in zip(found, radii.tolist()):
        candidates.append(CandidatePoint(loc_t, r, kind, inc_t))
        if kind == INTERIOR:
            interior_v.append((loc_t, inc_t))
        elif kind == BOUNDARY:
            boundary_v.append((loc_t, inc_t))
        else:
            corner_v.append((loc_t, inc_t))

    return BoundedVoronoiDiagram(
        sites=sites,
        domain=t,
        cells=cells,
        interior_vertices=interior_v,
        boundary_intersections=boundary_v,
        corners=corner_v,
        skeleton_edges=skeleton,
        _candidates=candidates,
    )


def _cluster(pts: np.ndarray, tol: float) -> list[list[int]]:
    parent = list(range(len(pts)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in cKDTree(pts).query_pairs(tol):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for a in range(len(pts)):
        groups.setdefault(find(a), []).append(a)
    return list(groups.values())


def candidate_set(d: BoundedVoronoiDiagram, include_triangle_vertices: bool = False) -> list[CandidatePoint]:
    """Voronoi vertices and boundary intersections, optionally with the corners.

    Corners are always reported with their empty radius, whether or not a
    Voronoi edge happens to end there.
    """
    out = [c for c in d._candidates if c.kind != CORNER]
    if include_triangle_vertices:
        have = {c.location for c in out}
        for v in d.domain.vertices:
            if v not in have:
                r = float(np.min(np.hypot(d.sites[:, 0] - v[0], d.sites[:, 1] - v[1])))
                inc = tuple(int(i) for i in np.flatnonzero(
                    np.hypot(d.sites[:, 0] - v[0], d.sites[:, 1] - v[1]) <= r * (1 + INCIDENCE_RTOL)))
                out.append(CandidatePoint(v, r, CORNER, inc))
    return out


def _needs_corners(sites: np.ndarray, t: Triangle) -> bool:
    tol = 1e-12 * t.diameter
    for v in t.vertices:
        if np.min(np.hypot(sites[:, 0] - v[0], sites[:, 1] - v[1])) > tol:
            return True
    return False


def _pick(cands: list[CandidatePoint]) -> tuple[float, list[CandidatePoint]]:
    rmax = max(c.empty_radius for c in cands)
    ties = [c for c in cands if c.empty_radius >= rmax * (1 - TIE_RTOL)]
    return rmax, ties


def covering_candidates(sites, t: Triangle, diagram: BoundedVoronoiDiagram | None = None):
    sites = np.asarray(getattr(sites, "points", sites), dtype=float).reshape(-1, 2)
    d = diagram if diagram is not None else build(sites, t)
    return candidate_set(d, include_triangle_vertices=_needs_corners(sites, t))


def covering_radius_exact(sites, t: Triangle) -> tuple[float, tuple[float, float]]:
    """Covering radius and a maximizing point.

    Among maximizers (within a relative 1e-10 of the maximum) the
    lexicographically smallest location wins.
    """
    cands = covering_candidates(sites, t)
    rmax, ties = _pick(cands)
    best = min(ties, key=lambda c: c.location)
    return rmax, best.location


def covering_maximizers(sites, t: Triangle) -> list[tuple[float, float]]:
    _, ties = _pick(covering_candidates(sites, t))
    return sorted(c.location for c in ties)


def covering_radius_grid(sites, t: Triangle, resolution: int) -> float:
    """Brute-force covering radius over a barycentric grid of ``t``."""
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    sites = np.asarray(getattr(sites, "points", sites), dtype=float).reshape(-1, 2)
    grid = barycentric_grid(t, resolution)
    _, idx = cKDTree(sites).query(grid)
    # same distance arithmetic as the exact path, so coincident points agree
    near = sites[idx]
    return float(np.max(np.hypot(near[:, 0] - grid[:, 0], near[:, 1] - grid[:, 1])))


def cell_areas(d: BoundedVoronoiDiagram) -> np.ndarray:
    out = []
    for poly in d.cells:
        x, y = poly[:, 0], poly[:, 1]
        out.append(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))
    return np.array(out)
