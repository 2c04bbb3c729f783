"""RBF interpolation benchmark: kernels, test functions, RMSE on a grid."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .geometry import Triangle, barycentric_grid

KERNELS = ("gaussian", "matern52", "wendland_c2")
TEST_FUNCTIONS = ("franke", "fourier2d", "ridge", "runge")
VALIDATION_RESOLUTION = 120

SHIFT_START = 1e-10
SHIFT_STOP = 1e-4


class SingularSystem(np.linalg.LinAlgError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    lengthscale: float

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError(f"unknown kernel {self.kind!r}")
        if not self.lengthscale > 0:
            raise ValueError("lengthscale must be positive")

    def __call__(self, r) -> np.ndarray:
        return kernel_eval(self, r)


def kernel_eval(k: KernelSpec, r) -> np.ndarray:
    x = np.asarray(r, dtype=float) / k.lengthscale
    if k.kind == "gaussian":
        return np.exp(-x * x)
    if k.kind == "matern52":
        s5 = math.sqrt(5.0) * x
        return (1.0 + s5 + 5.0 / 3.0 * x * x) * np.exp(-s5)
    u = np.clip(1.0 - x, 0.0, None)
    return u**4 * (4.0 * x + 1.0)


def lengthscale(c: float, area: float, n: int) -> float:
    if not (c > 0 and area > 0 and n >= 1):
        raise ValueError("need c > 0, area > 0, n >= 1")
    return c * math.sqrt(area / n)


@dataclass
class Interpolant:
    nodes: np.ndarray
    weights: np.ndarray
    kernel: KernelSpec
    regularization_shift: float = 0.0
    residual: float = 0.0

    def __call__(self, q) -> np.ndarray:
        return evaluate(self, q)


def system_matrix(nodes: np.ndarray, k: KernelSpec) -> np.ndarray:
    return kernel_eval(k, cdist(nodes, nodes))


def fit(nodes, values, k: KernelSpec) -> Interpolant:
    """Solve ``Phi w = f`` by Cholesky, with a diagonal-shift fallback.

    The shift starts at ``1e-10 * max(diag)`` and doubles up to
    ``1e-4 * max(diag)``; ``residual`` is the max node residual of the
    unshifted system relative to the value range.
    """
    nodes = np.asarray(getattr(nodes, "points", nodes), dtype=float).reshape(-1, 2)
    f = np.asarray(values, dtype=float).ravel()
    if len(f) != len(nodes) or len(nodes) < 1:
        raise DimensionMismatch(f"{len(nodes)} nodes but {len(f)} values")
    phi = system_matrix(nodes, k)
    dmax = float(np.max(np.diag(phi)))
    shift = 0.0
    while True:
        try:
            factor = scipy.linalg.cho_factor(phi + shift * np.eye(len(f)), lower=True, check_finite=False)
            w = scipy.linalg.cho_solve(factor, f, check_finite=False)
            if np.all(np.isfinite(w)):
                break
        except np.linalg.LinAlgError:
            pass
        shift = SHIFT_START * dmax if shift == 0.0 else 2.0 * shift
        if shift > SHIFT_STOP * dmax:
            raise SingularSystem("Cholesky failed for every diagonal shift")
    scale = max(float(np.ptp(f)), float(np.max(np.abs(f))), 1e-300)
    # extended-precision residual: in double the product itself carries
    # rounding of order eps * |Phi| |w|, which is large for big weights
    r = phi.astype(np.longdouble) @ w.astype(np.longdouble) - f.astype(np.longdouble)
    resid = float(np.max(np.abs(r))) / scale
    return Interpolant(nodes, w, k, shift, resid)


def evaluate(s: Interpolant, q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(-1, 2)
    out = np.empty(len(q))
    chunk = 4096
    for start in range(0, len(q), chunk):
        block = q[start:start + chunk]
        out[start:start + chunk] = kernel_eval(s.kernel, cdist(block, s.nodes)) @ s.weights
    return out


def franke(x, y):
    return (
        0.75 * np.exp(-((9 * x - 2) ** 2 + (9 * y - 2) ** 2) / 4)
        + 0.75 * np.exp(-((9 * x + 1) ** 2 / 49 + (9 * y + 1) / 10))
        + 0.5 * np.exp(-((9 * x - 7) ** 2 + (9 * y - 3) ** 2) / 4)
        - 0.2 * np.exp(-((9 * x - 4) ** 2 + (9 * y - 7) ** 2))
    )


def fourier2d(x, y):
    return np.sin(9 * np.pi * x) * np.cos(9 * np.pi * y)


def ridge(x, y):
    return np.arctan(2 * (x + 3 * y - 1)) / np.arctan(2 * (math.sqrt(10) + 1))


def runge(x, y):
    return 25.0 / (25.0 + (x - 0.2) ** 2 + 2 * y**2)


_FUNCS = {"franke": franke, "fourier2d": fourier2d, "ridge": ridge, "runge": runge}


def test_function_eval(name: str, p) -> np.ndarray:
    if name not in _FUNCS:
        raise ValueError(f"unknown test function {name!r}")
    p = np.asarray(p, dtype=float)
    return _FUNCS[name](p[..., 0], p[..., 1])


test_function_eval.__test__ = False  # not a pytest test


def validation_grid(t: Triangle, resolution: int = VALIDATION_RESOLUTION) -> np.ndarray:
    return barycentric_grid(t, resolution)


def e2_error(s: Interpolant, f, t: Triangle, grid_resolution: int = VALIDATION_RESOLUTION) -> float:
    """RMSE of ``s - f`` over the barycentric grid; ``f`` is a name or callable."""
    if grid_resolution < 1:
        raise ValueError("grid_resolution must be >= 1")
    g = validation_grid(t, grid_resolution)
    truth = test_function_eval(f, g) if isinstance(f, str) else np.asarray(f(g[:, 0], g[:, 1]))
    return float(np.sqrt(np.mean((evaluate(s, g) - truth) ** 2)))


def voronoi_nn_predict(nodes, values, t: Triangle | None, q) -> np.ndarray:
    """Piecewise-constant predictor: value of the nearest node.

    Within ``t`` this is the value of the Voronoi cell containing the query.
    Ties go to the lowest node index.
    """
    nodes = np.asarray(getattr(nodes, "points", nodes), dtype=float).reshape(-1, 2)
    values = np.asarray(values, dtype=float).ravel()
    if len(values) != len(nodes) or len(nodes) < 1:
        raise DimensionMismatch(f"{len(nodes)} nodes but {len(values)} values")
    if t is not None and not np.all(t.contains(nodes)):
        raise ValueError("nodes must lie in the triangle")
    q = np.asarray(q, dtype=float).reshape(-1, 2)
    k = min(len(nodes), 4)
    dist, idx = cKDTree(nodes).query(q, k=k)
    dist, idx = dist.reshape(len(q), k), idx.reshape(len(q), k)
    # among exact-distance ties keep the smallest index
    near = dist <= dist[:, :1] * (1 + 1e-12)
    choice = np.where(near, idx, len(nodes)).min(axis=1)
    return values[choice]


# coefficient c per (test function, kernel) used in the benchmark
EXPERIMENT_C = {
    ("franke", "gaussian"): 4.0,
    ("franke", "matern52"): 4.0,
    ("fourier2d", "gaussian"): 2.0,
    ("fourier2d", "matern52"): 2.0,
    ("ridge", "wendland_c2"): 5.0,
    ("runge", "wendland_c2"): 5.0,
}
