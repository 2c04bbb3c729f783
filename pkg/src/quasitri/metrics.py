"""Mesh ratio, closed-form bounds, and empirical checks."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import bounded_voronoi as bv
from .generators import greedy_steps, kronecker_reference_points
from .geometry import (
    Triangle,
    condition_number,
    isoperimetric_quotient,
    medians,
    reference_map,
    sorted_side_lengths,
)

RHO_TOL = 1e-12
KRONECKER_CONSTANT = 2 * math.sqrt(2 + math.sqrt(2)) + 3 * math.sqrt(2) + 2
LATTICE_LEG = math.sqrt(2) + 1
LATTICE_DISTANCE_BOUND = math.sqrt(2 + math.sqrt(2)) + 1 / math.sqrt(2)


class TooFewPoints(ValueError):
    pass


class NoInteriorVertices(ValueError):
    pass


@dataclass(frozen=True)
class MeshStats:
    separation: float
    covering: float
    ratio: float
    covering_argmax: tuple[float, float]


def _points(p) -> np.ndarray:
    return np.asarray(getattr(p, "points", p), dtype=float).reshape(-1, 2)


def separation_radius(p) -> float:
    """Half the minimum pairwise distance."""
    pts = _points(p)
    if len(pts) < 2:
        raise TooFewPoints("separation radius needs at least two points")
    d, idx = cKDTree(pts).query(pts, k=2)
    i = int(np.argmin(d[:, 1]))
    # recompute the closest pair with math.dist so q matches side lengths exactly
    return 0.5 * math.dist(pts[i], pts[idx[i, 1]])


def mesh_stats(p, t: Triangle | None = None) -> MeshStats:
    pts = _points(p)
    t = t if t is not None else p.domain
    q = separation_radius(pts)
    h, arg = bv.covering_radius_exact(pts, t)
    return MeshStats(q, h, h / q, arg)


def circumradius(t: Triangle) -> float:
    a, b, c = t.side_lengths()
    return a * b * c / (4.0 * t.area)


def vertex_config_stats(t: Triangle) -> tuple[float, float, float]:
    """``(q, h, rho)`` of the vertex set from the two-branch closed form."""
    a, b, c = sorted_side_lengths(t)
    q = c / 2.0
    if a * a > b * b + c * c:
        h = a * b * b / (a * a + b * b - c * c)
    else:
        h = circumradius(t)
    return q, h, h / q


def corollary_bound(t: Triangle) -> float:
    """``1 / sin(theta_min)``, evaluated as ``a b / (2 area)`` for the two longest sides."""
    a, b, _ = sorted_side_lengths(t)
    return a * b / (2.0 * t.area)


def k_bound(t: Triangle) -> tuple[int, int]:
    """Number of VG points after which the mesh ratio is at most 2.

    Returns the floor expression in area/perimeter form and the closed form
    in side lengths as printed; the latter carries ``4A/c^2`` where the
    former has ``4A/(pi c^2)`` and so is never smaller.
    """
    a, b, c = sorted_side_lengths(t)
    q = c / 2.0
    primary = math.floor((t.area + t.perimeter * q + math.pi * q * q) / (math.pi * q * q))
    s = (a + b) / c
    radicand = (s + 1) * (s - 1) * (1 + (a - b) / c) * (1 + (b - a) / c)
    edge_form = math.floor(math.sqrt(max(radicand, 0.0)) + 2.0 / math.pi * (s + 1) + 1)
    return primary, edge_form


@dataclass(frozen=True)
class VdcBounds:
    """Van der Corput mesh-ratio bounds.

    ``uniform_bound`` / ``filled_level_rho`` evaluate the printed expression
    ``4 m_max min{1/m_min, 2/(3 c_min)}``.  The ``corrected_*`` fields use
    ``max`` in place of ``min``, which is what the covering and separation
    radii of the filled levels actually give.
    """

    uniform_bound: float
    filled_level_rho: float
    corrected_uniform_bound: float
    corrected_filled_level_rho: float


def vdc_bounds(t: Triangle) -> VdcBounds:
    m = medians(t)
    c_min = min(t.side_lengths())
    m_max, m_min = max(m), min(m)
    printed = 4.0 * m_max * min(1.0 / m_min, 2.0 / (3.0 * c_min))
    corrected = 4.0 * m_max * max(1.0 / m_min, 2.0 / (3.0 * c_min))
    return VdcBounds(printed, printed / 2.0, corrected, corrected / 2.0)


def kronecker_bound(t: Triangle) -> float:
    return KRONECKER_CONSTANT * condition_number(reference_map(t))


@dataclass(frozen=True)
class TriangleBounds:
    vertex_q: float
    vertex_h: float
    vertex_rho: float
    corollary_bound: float
    k_bound_primary: int
    k_bound_edge_form: int
    vdc_bound: float
    vdc_filled_level_rho: float
    vdc_bound_corrected: float
    vdc_filled_level_rho_corrected: float
    kronecker_bound: float
    iso_quotient: float

    def to_json(self, t: Triangle | None = None) -> dict:
        out = asdict(self)
        if t is not None:
            out["triangle"] = t.to_json()
        return out


def triangle_bounds(t: Triangle) -> TriangleBounds:
    q, h, rho = vertex_config_stats(t)
    kp, ke = k_bound(t)
    vb = vdc_bounds(t)
    return TriangleBounds(
        vertex_q=q,
        vertex_h=h,
        vertex_rho=rho,
        corollary_bound=corollary_bound(t),
        k_bound_primary=kp,
        k_bound_edge_form=ke,
        vdc_bound=vb.uniform_bound,
        vdc_filled_level_rho=vb.filled_level_rho,
        vdc_bound_corrected=vb.corrected_uniform_bound,
        vdc_filled_level_rho_corrected=vb.corrected_filled_level_rho,
        kronecker_bound=kronecker_bound(t),
        iso_quotient=isoperimetric_quotient(t),
    )


@dataclass
class VGTrace:
    """Prefix statistics of one VG run, indexed by ``n = 3, 4, ...``."""

    points: np.ndarray
    n: np.ndarray
    q: np.ndarray
    h: np.ndarray
    maximizers: list

    @property
    def rho(self) -> np.ndarray:
        return self.h / self.q


def vg_trace(t: Triangle, n_max: int, stop_when_below_2: bool = False) -> VGTrace:
    """Run VG to ``n_max`` points, recording ``q(P_n)`` and ``h(P_n)``.

    ``h(P_n)`` is the empty radius of the point chosen as ``x_{n+1}``, so
    the run performs ``n_max - 2`` diagram builds.
    """
    if n_max < 3:
        raise ValueError("n_max must be >= 3")
    verts = np.array(t.vertices)
    q = separation_radius(verts)
    ns, qs, hs, maxis = [], [], [], []
    pts = [tuple(v) for v in t.vertices]
    for step in greedy_steps(t, verts):
        ns.append(step.n)
        qs.append(q)
        hs.append(step.covering)
        maxis.append(step.maximizers)
        if step.n >= n_max or (stop_when_below_2 and step.covering / q <= 2 * (1 + RHO_TOL)):
            break
        d = min(math.dist(step.point, p) for p in pts)
        q = min(q, d / 2.0)
        pts.append(step.point)
    return VGTrace(np.array(pts), np.array(ns), np.array(qs), np.array(hs), maxis)


def empirical_k(t: Triangle, n_max: int) -> int | None:
    """Smallest ``n`` in ``[3, n_max]`` with ``rho(VG P_n) <= 2``; ``None`` if not reached."""
    tr = vg_trace(t, n_max, stop_when_below_2=True)
    hit = np.flatnonzero(tr.rho <= 2 * (1 + RHO_TOL))
    return int(tr.n[hit[0]]) if len(hit) else None


def site_triangle_sines(p, t: Triangle, include_boundary: bool = False) -> list[tuple[tuple[int, int, int], float]]:
    """Minimum angle sine of the site triangle around every interior Voronoi vertex.

    A vertex shared by more than three cocircular sites is split into the
    fan of triangles formed by consecutive sites around its circle.  With
    ``include_boundary`` the boundary points where three cells meet are
    checked as well.
    """
    pts = _points(p)
    d = bv.build(pts, t)
    verts = list(d.interior_vertices)
    if include_boundary:
        verts += d.boundary_intersections
    verts = [(loc, inc) for loc, inc in verts if len(inc) >= 3]
    out = []
    for loc, inc in verts:
        ang = sorted(inc, key=lambda i: math.atan2(pts[i][1] - loc[1], pts[i][0] - loc[0]))
        tris = [(ang[0], ang[k], ang[k + 1]) for k in range(1, len(ang) - 1)]
        for tri in tris:
            out.append((tri, _min_angle_sine(pts[list(tri)])))
    return out


def _min_angle_sine(tri: np.ndarray) -> float:
    best = 1.0
    for k in range(3):
        p, q, r = tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]
        u, v = q - p, r - p
        s = abs(u[0] * v[1] - u[1] * v[0]) / (math.hypot(*u) * math.hypot(*v))
        best = min(best, s)
    return best


def voronoi_angle_check(p, t: Triangle, include_boundary: bool = False) -> float:
    sines = site_triangle_sines(p, t, include_boundary)
    if not sines:
        raise NoInteriorVertices("diagram has no Voronoi vertex")
    return min(s for _, s in sines)


@dataclass(frozen=True)
class LatticeReport:
    trials: int
    violations: int
    max_distance: float
    distance_bound: float
    min_points_contained: int


def _lattice_points_in(tri: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    lo = np.floor(tri.min(axis=0)).astype(int)
    hi = np.ceil(tri.max(axis=0)).astype(int)
    gx, gy = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
    cand = np.column_stack([gx.ravel(), gy.ravel()]).astype(float)
    return cand[Triangle(*tri).contains(cand, tol=tol)]


def lattice_containment_check(leg: float = LATTICE_LEG, trials: int = 10_000, seed: int = 0,
                              samples_per_trial: int = 8) -> LatticeReport:
    """Randomly placed closed isosceles right triangles with the given leg.

    Each placement must contain an integer point, and random points of the
    triangle must lie within ``sqrt(2+sqrt(2)) + 1/sqrt(2)`` of a contained
    integer point.
    """
    if leg < LATTICE_LEG - 1e-15:
        raise ValueError("leg must be at least sqrt(2) + 1")
    rng = np.random.default_rng(seed)
    base = np.array([[0.0, 0.0], [leg, 0.0], [0.0, leg]])
    violations, worst, fewest = 0, 0.0, math.inf
    for _ in range(trials):
        theta = rng.uniform(0, 2 * math.pi)
        shift = rng.uniform(0, 1, size=2)
        c, s = math.cos(theta), math.sin(theta)
        tri = base @ np.array([[c, s], [-s, c]]) + shift
        inside = _lattice_points_in(tri)
        fewest = min(fewest, len(inside))
        if len(inside) == 0:
            violations += 1
            continue
        uv = rng.random((samples_per_trial, 2))
        flip = uv.sum(axis=1) > 1
        uv[flip] = 1 - uv[flip]
        x = tri[0] + uv[:, :1] * (tri[1] - tri[0]) + uv[:, 1:] * (tri[2] - tri[0])
        x = np.vstack([x, tri])
        dist, _ = cKDTree(inside).query(x)
        worst = max(worst, float(dist.max()))
        if dist.max() > LATTICE_DISTANCE_BOUND + 1e-9:
            violations += 1
    return LatticeReport(trials, violations, worst, LATTICE_DISTANCE_BOUND, int(fewest))


def kronecker_min_spacing(big_n: int, alpha: float) -> float:
    ref = kronecker_reference_points(big_n, alpha)
    if len(ref) < 2:
        return math.inf
    return 2.0 * separation_radius(ref)

