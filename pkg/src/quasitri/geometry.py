"""Planar primitives for triangular domains.

Points are plain ``(x, y)`` float pairs or ``(n, 2)`` numpy arrays; a
:class:`Triangle` keeps its vertex labels ``A, B, C`` exactly as given.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

DEGENERACY_EPS = 1e-14
ANGLE_EPS = 1e-12


class GeometryError(ValueError):
    pass


class DegenerateTriangle(GeometryError):
    pass


class CollinearPoints(GeometryError):
    pass


class InvalidAngles(GeometryError):
    pass


def _as_point(p) -> tuple[float, float]:
    x, y = (float(v) for v in p)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise GeometryError(f"non-finite coordinate in {p!r}")
    return (x, y)


def _cross(o, p, q) -> float:
    return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])


@dataclass(frozen=True)
class Triangle:
    """Non-degenerate triangle with labelled vertices ``A``, ``B``, ``C``."""

    A: tuple[float, float]
    B: tuple[float, float]
    C: tuple[float, float]

    def __post_init__(self):
        for name in "ABC":
            object.__setattr__(self, name, _as_point(getattr(self, name)))
        longest = max(self.side_lengths())
        if abs(signed_area(self)) <= DEGENERACY_EPS * longest**2:
            raise DegenerateTriangle(f"degenerate triangle {self.vertices}")

    @property
    def vertices(self) -> tuple[tuple[float, float], ...]:
        return (self.A, self.B, self.C)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    @property
    def ccw_vertices(self) -> np.ndarray:
        """Vertices in counter-clockwise order (labels dropped)."""
        v = self.array
        return v if signed_area(self) > 0 else v[[0, 2, 1]]

    def side_lengths(self) -> tuple[float, float, float]:
        return side_lengths(self)

    @property
    def area(self) -> float:
        return abs(signed_area(self))

    @property
    def perimeter(self) -> float:
        return sum(self.side_lengths())

    @property
    def diameter(self) -> float:
        return max(self.side_lengths())

    @property
    def centroid(self) -> tuple[float, float]:
        v = self.array.mean(axis=0)
        return (float(v[0]), float(v[1]))

    def angles(self) -> tuple[float, float, float]:
        """Interior angles at A, B, C (atan2 form, accurate for needles)."""
        out = []
        for o, p, q in ((self.A, self.B, self.C), (self.B, self.C, self.A), (self.C, self.A, self.B)):
            ux, uy = p[0] - o[0], p[1] - o[1]
            vx, vy = q[0] - o[0], q[1] - o[1]
            out.append(math.atan2(abs(ux * vy - uy * vx), ux * vx + uy * vy))
        return (out[0], out[1], out[2])

    def scaled(self, factor: float) -> "Triangle":
        return Triangle(*(tuple(factor * np.asarray(v)) for v in self.vertices))

    def barycentric(self, pts) -> np.ndarray:
        """Barycentric coordinates ``(l_A, l_B, l_C)`` of each row of ``pts``."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        a, b, c = self.array
        det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        dx = pts[:, 0] - a[0]
        dy = pts[:, 1] - a[1]
        lb = (dx * (c[1] - a[1]) - dy * (c[0] - a[0])) / det
        lc = ((b[0] - a[0]) * dy - (b[1] - a[1]) * dx) / det
        return np.column_stack([1.0 - lb - lc, lb, lc])

    def contains(self, pts, tol: float = 1e-12) -> np.ndarray:
        """Closed point-in-triangle test, tolerance relative to the diameter."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        lam = self.barycentric(pts)
        # barycentric l_X is (distance to opposite side) / (height from X)
        heights = 2.0 * self.area / np.array(self.side_lengths())
        dist = lam * heights
        return np.all(dist >= -tol * self.diameter, axis=1)

    def boundary_distance(self, pts) -> np.ndarray:
        """Signed distance to the nearest side (positive inside)."""
        lam = self.barycentric(pts)
        heights = 2.0 * self.area / np.array(self.side_lengths())
        return np.min(lam * heights, axis=1)

    def to_json(self) -> dict:
        return {"A": list(self.A), "B": list(self.B), "C": list(self.C)}

    @classmethod
    def from_json(cls, obj: dict) -> "Triangle":
        return cls(tuple(obj["A"]), tuple(obj["B"]), tuple(obj["C"]))


def signed_area(t: Triangle) -> float:
    return 0.5 * _cross(t.A, t.B, t.C)


def side_lengths(t: Triangle) -> tuple[float, float, float]:
    """Lengths ``(a, b, c)`` of the sides opposite ``A``, ``B``, ``C``."""
    return (math.dist(t.B, t.C), math.dist(t.C, t.A), math.dist(t.A, t.B))


def sorted_side_lengths(t: Triangle) -> tuple[float, float, float]:
    """Side lengths in non-increasing order, i.e. ``a >= b >= c``."""
    a, b, c = sorted(side_lengths(t), reverse=True)
    return (a, b, c)


def medians(t: Triangle) -> tuple[float, float, float]:
    A, B, C = (np.asarray(v) for v in t.vertices)
    return (
        float(np.hypot(*(A - (B + C) / 2))),
        float(np.hypot(*(B - (C + A) / 2))),
        float(np.hypot(*(C - (A + B) / 2))),
    )


def circumcircle(p, q, r) -> tuple[tuple[float, float], float]:
    """Circumcenter and circumradius of three points.

    Coordinates are shifted to ``p`` before solving, which keeps the
    determinant well scaled for small triangles far from the origin.
    """
    p, q, r = _as_point(p), _as_point(q), _as_point(r)
    bx, by = q[0] - p[0], q[1] - p[1]
    cx, cy = r[0] - p[0], r[1] - p[1]
    d = 2.0 * (bx * cy - by * cx)
    scale = max(bx * bx + by * by, cx * cx + cy * cy, (q[0] - r[0]) ** 2 + (q[1] - r[1]) ** 2)
    if abs(d) <= 2.0 * 2.0 * DEGENERACY_EPS * scale:
        raise CollinearPoints(f"collinear points {p}, {q}, {r}")
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    return (p[0] + ux, p[1] + uy), math.hypot(ux, uy)


def isoperimetric_quotient(t: Triangle) -> float:
    """``12 sqrt(3) area / perimeter**2``; equals 1 for equilateral triangles."""
    return 12.0 * math.sqrt(3.0) * t.area / t.perimeter**2


def triangle_from_angles(alpha: float, beta: float) -> Triangle:
    """Unit-perimeter triangle with angles ``alpha`` at A and ``beta`` at B.

    Side ``c = |AB|`` lies on the x-axis with ``A`` at the origin and ``C``
    in the upper half-plane.
    """
    gamma = math.pi - alpha - beta
    # pi - alpha - beta can come out as ~1e-16 instead of 0
    if not (alpha > 0 and beta > 0 and gamma > ANGLE_EPS):
        raise InvalidAngles(f"invalid angles alpha={alpha}, beta={beta}")
    sa, sb, sc = math.sin(alpha), math.sin(beta), math.sin(gamma)
    total = sa + sb + sc
    b, c = sb / total, sc / total
    return Triangle((0.0, 0.0), (c, 0.0), (b * math.cos(alpha), b * math.sin(alpha)))


@dataclass(frozen=True)
class AffineMap:
    """``x -> linear_part @ x + offset``."""

    linear_part: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.linear_part, dtype=float).reshape(2, 2)
        object.__setattr__(self, "linear_part", m)
        object.__setattr__(self, "offset", np.asarray(self.offset, dtype=float).reshape(2))
        if abs(np.linalg.det(m)) <= DEGENERACY_EPS * np.sum(m * m):
            raise GeometryError("affine map is not invertible")

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return pts @ self.linear_part.T + self.offset

    def inverse(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.linalg.solve(self.linear_part, (pts - self.offset).T).T


def reference_map(t: Triangle) -> AffineMap:
    """Map from ``((0,0), (0,1), (1,0))`` onto ``t``: ``A + x1 (C - A) + x2 (B - A)``."""
    A, B, C = (np.asarray(v) for v in t.vertices)
    return AffineMap(np.column_stack([C - A, B - A]), A)


def condition_number(m: AffineMap) -> float:
    """Spectral condition number from the closed-form eigenvalues of ``M^T M``."""
    g = m.linear_part.T @ m.linear_part
    tr = g[0, 0] + g[1, 1]
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    disc = math.sqrt(max(tr * tr / 4.0 - det, 0.0))
    lmax = tr / 2.0 + disc
    # det / lmax avoids cancellation in tr/2 - disc
    lmin = det / lmax
    return max(1.0, math.sqrt(lmax / lmin))


def barycentric_grid(t: Triangle, m: int) -> np.ndarray:
    """All points with barycentric coordinates ``(i, j, k) / m``, ``i+j+k = m``.

    Rows run over ``i`` (weight of A) descending, then ``j`` (weight of B).
    """
    if m < 1:
        raise ValueError("grid resolution must be >= 1")
    A, B, C = (np.asarray(v) for v in t.vertices)
    i, j = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="ij")
    keep = i + j <= m
    i, j = i[keep], j[keep]
    k = m - i - j
    pts = (i[:, None] * A + j[:, None] * B + k[:, None] * C) / m
    # exact vertices where a weight equals m
    pts[i == m] = A
    pts[j == m] = B
    pts[k == m] = C
    return pts


def rotate(pts, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.asarray(pts, dtype=float) @ np.array([[c, s], [-s, c]])


PRESETS = {
    "equilateral": ((0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0)),
    "reference": ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0)),
    "skinny": ((0.0, 0.0), (1.0, 0.0), (0.028, 0.045)),
}


def parse_triangle(spec: str | Iterable) -> Triangle:
    """Triangle from a preset name, ``"x1,y1,x2,y2,x3,y3"`` or a vertex list."""
    if isinstance(spec, Triangle):
        return spec
    if isinstance(spec, str):
        key = spec.strip().lower()
        if key in PRESETS:
            return Triangle(*PRESETS[key])
        try:
            vals = [float(v) for v in key.replace(";", ",").split(",")]
        except ValueError as exc:
            raise GeometryError(f"cannot parse triangle spec {spec!r}") from exc
        if len(vals) != 6:
            raise GeometryError(f"triangle spec needs 6 numbers, got {len(vals)}")
        return Triangle(vals[0:2], vals[2:4], vals[4:6])
    verts = list(spec)
    if len(verts) != 3:
        raise GeometryError("triangle needs three vertices")
    return Triangle(*verts)
