import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quasitri import rbf
from quasitri.bounded_voronoi import covering_radius_exact
from quasitri.generators import barycentric_grid_hybrid, vg_sequence
from quasitri.geometry import barycentric_grid

from conftest import SQRT3, random_points_in


def test_kernel_examples():
    assert rbf.kernel_eval(rbf.KernelSpec("gaussian", 1.0), 0.0) == 1.0
    assert rbf.kernel_eval(rbf.KernelSpec("wendland_c2", 1.0), 1.2) == 0.0
    assert rbf.kernel_eval(rbf.KernelSpec("gaussian", 2.0), 2.0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert rbf.kernel_eval(rbf.KernelSpec("gaussian", 2.0), 2.0) == pytest.approx(0.3678794, abs=1e-7)


@pytest.mark.parametrize("kind", rbf.KERNELS)
def test_kernel_invariants(kind):
    k = rbf.KernelSpec(kind, 0.7)
    r = np.linspace(0, 3, 301)
    v = k(r)
    assert v[0] == 1.0 and np.all(v >= 0)
    if kind == "wendland_c2":
        assert np.all(v[r >= 0.7] == 0)
    # closed forms
    x = r / 0.7
    want = {
        "gaussian": np.exp(-x * x),
        "matern52": (1 + math.sqrt(5) * x + 5 / 3 * x * x) * np.exp(-math.sqrt(5) * x),
        "wendland_c2": np.clip(1 - x, 0, None) ** 4 * (4 * x + 1),
    }[kind]
    np.testing.assert_allclose(v, want, rtol=1e-14, atol=0)


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        rbf.KernelSpec("cubic", 1.0)
    with pytest.raises(ValueError):
        rbf.KernelSpec("gaussian", 0.0)


def test_lengthscale():
    assert rbf.lengthscale(1, 1, 1) == 1
    assert rbf.lengthscale(4, SQRT3 / 4, 45) == pytest.approx(4 * math.sqrt(SQRT3 / 4 / 45), rel=1e-15)
    assert rbf.lengthscale(4, SQRT3 / 4, 45) == pytest.approx(0.3924, abs=1e-4)
    assert rbf.lengthscale(3, 0.5, 400) == pytest.approx(rbf.lengthscale(3, 0.5, 100) / 2, rel=1e-15)
    with pytest.raises(ValueError):
        rbf.lengthscale(0, 1, 1)


def test_single_node_fit():
    k = rbf.KernelSpec("matern52", 0.3)
    s = rbf.fit(np.array([[0.2, 0.3]]), [2.5], k)
    assert s.weights[0] == pytest.approx(2.5)
    q = np.array([[0.5, 0.5], [0.2, 0.3]])
    np.testing.assert_allclose(s(q), 2.5 * k(np.hypot(*(q - [0.2, 0.3]).T)), rtol=1e-15)


@pytest.mark.parametrize("kind", rbf.KERNELS)
def test_reproduces_kernel_translate(kind, equilateral):
    rng = np.random.default_rng(0)
    nodes = random_points_in(equilateral, 30, rng)
    k = rbf.KernelSpec(kind, rbf.lengthscale(2, equilateral.area, 30))
    f = k(np.hypot(*(nodes - nodes[4]).T))
    s = rbf.fit(nodes, f, k)
    assert np.max(np.abs(s(nodes) - f)) <= 1e-10


def test_shift_ladder_engages():
    rng = np.random.default_rng(1)
    nodes = 0.5 + 0.01 * rng.random((45, 2))
    k = rbf.KernelSpec("gaussian", 2.0)
    s = rbf.fit(nodes, np.sin(nodes[:, 0]), k)
    assert s.regularization_shift > 0
    assert rbf.SHIFT_START <= s.regularization_shift <= rbf.SHIFT_STOP


def test_dimension_mismatch():
    with pytest.raises(rbf.DimensionMismatch):
        rbf.fit(np.zeros((3, 2)), [1.0, 2.0], rbf.KernelSpec("gaussian", 1.0))
    with pytest.raises(rbf.DimensionMismatch):
        rbf.voronoi_nn_predict(np.zeros((3, 2)), [1.0], None, [[0, 0]])


def test_evaluate_at_nodes_and_wendland_support(equilateral):
    nodes = barycentric_grid(equilateral, 6)
    f = rbf.test_function_eval("runge", nodes)
    k = rbf.KernelSpec("wendland_c2", 0.3)
    s = rbf.fit(nodes, f, k)
    assert np.max(np.abs(s(nodes) - f)) <= 1e-8 * np.ptp(f)
    assert s.regularization_shift == 0
    assert np.all(s(np.array([[5.0, 5.0], [-3, 1]])) == 0)
    phi = rbf.system_matrix(nodes, k)
    d = np.hypot(*(nodes[:, None, :] - nodes[None, :, :]).transpose(2, 0, 1))
    assert np.all(phi[d >= 0.3] == 0)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(a, b):
    tri_nodes = barycentric_grid(__import__("quasitri").parse_triangle("equilateral"), 5)
    k = rbf.KernelSpec("matern52", 0.3)
    f = rbf.test_function_eval("franke", tri_nodes)
    g = rbf.test_function_eval("ridge", tri_nodes)
    sf, sg = rbf.fit(tri_nodes, f, k), rbf.fit(tri_nodes, g, k)
    sh = rbf.fit(tri_nodes, a * f + b * g, k)
    assert sf.regularization_shift == sg.regularization_shift == sh.regularization_shift == 0
    q = np.random.default_rng(0).random((50, 2)) * 0.5
    np.testing.assert_allclose(sh(q), a * sf(q) + b * sg(q), atol=1e-8)


def test_system_symmetric_positive(equilateral):
    nodes = random_points_in(equilateral, 40, np.random.default_rng(2))
    for kind in ("gaussian", "matern52"):
        phi = rbf.system_matrix(nodes, rbf.KernelSpec(kind, 0.1))
        assert np.max(np.abs(phi - phi.T)) <= 1e-14
        np.linalg.cholesky(phi)  # positive pivots


def test_e2_examples(equilateral):
    nodes = barycentric_grid(equilateral, 10)
    k = rbf.KernelSpec("wendland_c2", 0.4)
    s = rbf.fit(nodes, rbf.test_function_eval("runge", nodes), k)
    assert rbf.e2_error(s, "runge", equilateral, 10) <= 1e-8
    z = rbf.fit(nodes, np.zeros(len(nodes)), k)
    assert np.all(z.weights == 0)
    assert rbf.e2_error(z, lambda x, y: 0 * x, equilateral, 20) == 0.0
    with pytest.raises(ValueError):
        rbf.e2_error(s, "runge", equilateral, 0)


def test_e2_grid_size(equilateral):
    assert len(rbf.validation_grid(equilateral)) == 7381


def test_test_function_values():
    assert rbf.test_function_eval("runge", [0.2, 0.0]) == 1.0
    assert rbf.test_function_eval("ridge", [[0.4, 0.2]])[0] == pytest.approx(0.0, abs=1e-15)
    want = 0.75 * math.exp(-2) + 0.75 * math.exp(-(1 / 49 + 1 / 10)) + 0.5 * math.exp(-14.5) - 0.2 * math.exp(-65)
    assert rbf.test_function_eval("franke", [0.0, 0.0]) == pytest.approx(want, rel=1e-15)
    assert want == pytest.approx(0.7664, abs=1e-4)
    assert rbf.test_function_eval("fourier2d", [0.5, 0.0]) == pytest.approx(math.sin(4.5 * math.pi))
    with pytest.raises(ValueError):
        rbf.test_function_eval("bogus", [0, 0])


def test_voronoi_nn_examples(equilateral):
    nodes = np.array([[0.2, 0.1], [0.7, 0.2], [0.5, 0.6]])
    vals = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(rbf.voronoi_nn_predict(nodes, vals, equilateral, nodes), vals)
    q = barycentric_grid(equilateral, 10)
    assert np.all(rbf.voronoi_nn_predict(nodes[:1], [4.0], equilateral, q) == 4.0)
    # a query equidistant from nodes 0 and 1 takes the lower index
    mid = (nodes[0] + nodes[1]) / 2
    assert rbf.voronoi_nn_predict(nodes[:2], vals[:2], None, [mid])[0] == 1.0
    assert rbf.voronoi_nn_predict(nodes[:2][::-1], vals[:2][::-1], None, [mid])[0] == 2.0


def test_piecewise_constant_bound(equilateral):
    q = barycentric_grid(equilateral, 300)
    truth = q[:, 0] + q[:, 1]
    for n in (10, 45):
        ps = vg_sequence(equilateral, n)
        pred = rbf.voronoi_nn_predict(ps, ps.points.sum(axis=1), equilateral, q)
        h, _ = covering_radius_exact(ps.points, equilateral)
        assert np.max(np.abs(pred - truth)) <= math.sqrt(2) * h + 1e-9


def test_fit_residual_reported(equilateral):
    nodes = barycentric_grid_hybrid(equilateral, 55).points
    k = rbf.KernelSpec("matern52", rbf.lengthscale(4, equilateral.area, 55))
    s = rbf.fit(nodes, rbf.test_function_eval("franke", nodes), k)
    assert 0 <= s.residual <= 1e-8
