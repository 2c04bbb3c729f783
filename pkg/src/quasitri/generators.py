"""Point-set constructions on triangles.

Greedy packing (seeded by the vertices or by arbitrary points), the
triangular van der Corput sequence, the rotated Kronecker lattice, the
barycentric grid with farthest-point fill-up, and two random baselines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import bounded_voronoi as bv
from .geometry import Triangle, barycentric_grid, reference_map


class InvalidCount(ValueError):
    pass


@dataclass
class PointSet:
    points: np.ndarray
    domain: Triangle
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if len(self.points) and not np.all(self.domain.contains(self.points)):
            raise ValueError("point set leaves its domain")

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, idx):
        return self.points[idx]

    def prefix(self, n: int) -> "PointSet":
        return PointSet(self.points[:n], self.domain, dict(self.meta))


@dataclass(frozen=True)
class RandomConfig:
    seed: int = 0
    inhibition_coefficient: float = 0.7
    max_attempts: int = 5000
    shrink_factor: float = 0.95

    def __post_init__(self):
        if not self.inhibition_coefficient > 0:
            raise ValueError("inhibition_coefficient must be positive")
        if not 0 < self.shrink_factor < 1:
            raise ValueError("shrink_factor must lie in (0, 1)")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


@dataclass(frozen=True)
class GreedyStep:
    """One insertion: the prefix had covering radius ``covering`` attained at ``point``."""

    n: int
    covering: float
    point: tuple[float, float]
    maximizers: tuple[tuple[float, float], ...]


def greedy_steps(t: Triangle, seeds) -> Iterator[GreedyStep]:
    """Endless greedy farthest-point insertion starting from ``seeds``.

    Triangle vertices join the candidate set whenever they are not all
    seeds already; otherwise only Voronoi vertices and boundary
    intersections are searched.
    """
    pts = [tuple(map(float, p)) for p in np.asarray(seeds, dtype=float).reshape(-1, 2)]
    if not pts:
        raise InvalidCount("greedy packing needs at least one seed")
    while True:
        arr = np.array(pts)
        cands = bv.covering_candidates(arr, t)
        rmax, ties = bv._pick(cands)
        best = min(ties, key=lambda c: c.location)
        yield GreedyStep(len(pts), rmax, best.location, tuple(sorted(c.location for c in ties)))
        pts.append(best.location)


def greedy_packing(t: Triangle, seeds, n: int) -> PointSet:
    seeds = np.asarray(getattr(seeds, "points", seeds), dtype=float).reshape(-1, 2)
    if len(seeds) < 1 or n < len(seeds):
        raise InvalidCount(f"need n >= number of seeds >= 1, got n={n}, seeds={len(seeds)}")
    pts = [tuple(p) for p in seeds]
    coverings = []
    steps = greedy_steps(t, seeds)
    while len(pts) < n:
        step = next(steps)
        pts.append(step.point)
        coverings.append(step.covering)
    return PointSet(np.array(pts), t, {"generator": "greedy", "n_seeds": len(seeds), "coverings": coverings})


def vg_sequence(t: Triangle, n: int) -> PointSet:
    """Voronoi-guided greedy packing: ``A, B, C`` then farthest candidates."""
    if n < 3:
        raise InvalidCount(f"VG needs n >= 3, got {n}")
    ps = greedy_packing(t, np.array(t.vertices), n)
    ps.meta["generator"] = "vg"
    return ps


def vdc_point(t: Triangle, k: int) -> np.ndarray:
    a, b, c = (np.asarray(v, dtype=float) for v in t.vertices)
    i = k
    while i > 0:
        d = i % 4
        if d == 0:
            a, b, c = (b + c) / 2, (c + a) / 2, (a + b) / 2
        elif d == 1:
            a, b, c = a, (a + b) / 2, (a + c) / 2
        elif d == 2:
            a, b, c = b, (b + c) / 2, (b + a) / 2
        else:
            a, b, c = c, (c + a) / 2, (c + b) / 2
        i //= 4
    return (a + b + c) / 3


def vdc_sequence(t: Triangle, n: int) -> PointSet:
    """First ``n`` points of the triangular van der Corput sequence."""
    if n < 1:
        raise InvalidCount(f"need n >= 1, got {n}")
    pts = np.array([vdc_point(t, k) for k in range(n)])
    return PointSet(pts, t, {"generator": "vdc"})


def kronecker_reference_points(big_n: int, alpha: float) -> np.ndarray:
    """Rotated, scaled integer lattice clipped to ``((0,0), (0,1), (1,0))``."""
    if big_n < 2:
        raise InvalidCount(f"need N >= 2, got {big_n}")
    s = math.sqrt(2 * big_n)
    m = math.ceil(s) + 1
    k1, k2 = np.meshgrid(np.arange(-m, m + 1), np.arange(-m, m + 1), indexing="ij")
    lat = np.column_stack([k1.ravel(), k2.ravel()]).astype(float)
    ca, sa = math.cos(alpha), math.sin(alpha)
    x = (ca * lat[:, 0] - sa * lat[:, 1]) / s
    y = (sa * lat[:, 0] + ca * lat[:, 1]) / s
    tol = 1e-12
    keep = (x >= -tol) & (y >= -tol) & (x + y <= 1 + tol)
    return np.column_stack([x[keep], y[keep]])


def kronecker_lattice(t: Triangle, big_n: int, alpha: float = 3 * math.pi / 8) -> PointSet:
    if not 0 <= alpha < 2 * math.pi:
        raise ValueError("alpha must lie in [0, 2 pi)")
    ref = kronecker_reference_points(big_n, alpha)
    pts = reference_map(t)(ref)
    return PointSet(pts, t, {"generator": "kronecker", "N": big_n, "alpha": alpha})


def grid_level(n: int) -> int:
    """Largest ``m`` with ``(m+1)(m+2)/2 <= n``."""
    m = 1
    while (m + 2) * (m + 3) // 2 <= n:
        m += 1
    return m


def barycentric_grid_hybrid(t: Triangle, n: int) -> PointSet:
    """Complete barycentric lattice, topped up to ``n`` by farthest-point insertion."""
    if n < 3:
        raise InvalidCount(f"need n >= 3, got {n}")
    m = grid_level(n)
    lattice = barycentric_grid(t, m)
    ps = greedy_packing(t, lattice, n)
    ps.meta.update(generator="grid", m=m, inserted=n - len(lattice))
    return ps


def iid_uniform(t: Triangle, n: int, cfg: RandomConfig = RandomConfig()) -> PointSet:
    if n < 1:
        raise InvalidCount(f"need n >= 1, got {n}")
    rng = np.random.default_rng(cfg.seed)
    uv = rng.random((n, 2))
    flip = uv.sum(axis=1) > 1
    uv[flip] = 1.0 - uv[flip]
    A, B, C = (np.asarray(v) for v in t.vertices)
    pts = A + uv[:, :1] * (B - A) + uv[:, 1:] * (C - A)
    return PointSet(pts, t, {"generator": "iid", "seed": cfg.seed})


def poisson_disk(t: Triangle, n: int, cfg: RandomConfig = RandomConfig()) -> PointSet:
    """Sequential inhibition: reject darts closer than ``r`` to accepted points.

    ``r`` starts at ``inhibition_coefficient * sqrt(area / n)`` and shrinks by
    ``shrink_factor`` after ``max_attempts`` consecutive rejections.
    """
    if n < 1:
        raise InvalidCount(f"need n >= 1, got {n}")
    rng = np.random.default_rng(cfg.seed)
    A, B, C = (np.asarray(v) for v in t.vertices)
    radius = cfg.inhibition_coefficient * math.sqrt(t.area / n)
    pts = np.empty((n, 2))
    count, fails, shrinks = 0, 0, 0
    batch = 256
    while count < n:
        uv = rng.random((batch, 2))
        flip = uv.sum(axis=1) > 1
        uv[flip] = 1.0 - uv[flip]
        darts = A + uv[:, :1] * (B - A) + uv[:, 1:] * (C - A)
        for p in darts:
            if count == 0 or np.min(np.hypot(*(pts[:count] - p).T)) >= radius:
                pts[count] = p
                count += 1
                fails = 0
                if count == n:
                    break
            else:
                fails += 1
                if fails >= cfg.max_attempts:
                    radius *= cfg.shrink_factor
                    shrinks += 1
                    fails = 0
    return PointSet(pts, t, {
        "generator": "poisson",
        "seed": cfg.seed,
        "final_radius": radius,
        "shrinks": shrinks,
        "inhibition_coefficient": cfg.inhibition_coefficient,
        "shrink_factor": cfg.shrink_factor,
        "max_attempts": cfg.max_attempts,
    })


GENERATORS = ("vg", "grid", "vdc", "kronecker", "poisson", "iid")


def generate(name: str, t: Triangle, n: int, seed: int = 0, alpha: float = 3 * math.pi / 8) -> PointSet:
    """Dispatch by generator name; ``n`` is the target size (Kronecker: ``N``)."""
    if name == "vg":
        return vg_sequence(t, n)
    if name == "grid":
        return barycentric_grid_hybrid(t, n)
    if name == "vdc":
        return vdc_sequence(t, n)
    if name == "kronecker":
        return kronecker_lattice(t, n, alpha)
    if name == "iid":
        return iid_uniform(t, n, RandomConfig(seed=seed))
    if name == "poisson":
        return poisson_disk(t, n, RandomConfig(seed=seed))
    raise ValueError(f"unknown generator {name!r}; choose from {', '.join(GENERATORS)}")
