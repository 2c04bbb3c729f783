import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from quasitri.geometry import Triangle, parse_triangle

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("default")

SQRT3 = math.sqrt(3.0)

coord = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False)


@st.composite
def triangles(draw, min_quotient=1e-3):
    """Random triangles, rejecting shapes flatter than ``min_quotient``."""
    from quasitri.geometry import DegenerateTriangle, isoperimetric_quotient
    pts = [(draw(coord), draw(coord)) for _ in range(3)]
    try:
        t = Triangle(*pts)
    except DegenerateTriangle:
        from hypothesis import assume
        assume(False)
    from hypothesis import assume
    assume(isoperimetric_quotient(t) >= min_quotient and t.diameter > 1e-2)
    return t


def random_triangle(rng: np.random.Generator, min_quotient: float = 0.02) -> Triangle:
    from quasitri.geometry import isoperimetric_quotient
    while True:
        pts = rng.uniform(-1, 1, size=(3, 2))
        try:
            t = Triangle(*map(tuple, pts))
        except ValueError:
            continue
        if isoperimetric_quotient(t) >= min_quotient:
            return t


def random_points_in(t: Triangle, n: int, rng: np.random.Generator) -> np.ndarray:
    uv = rng.random((n, 2))
    flip = uv.sum(axis=1) > 1
    uv[flip] = 1 - uv[flip]
    A, B, C = (np.asarray(v) for v in t.vertices)
    return A + uv[:, :1] * (B - A) + uv[:, 1:] * (C - A)


@pytest.fixture
def equilateral() -> Triangle:
    return parse_triangle("equilateral")


@pytest.fixture
def right_triangle() -> Triangle:
    return Triangle((0, 0), (1, 0), (0, 1))


@pytest.fixture
def obtuse322() -> Triangle:
    # a = |BC| = 3, b = |CA| = 2, c = |AB| = 2
    x = 1.5
    return Triangle((x, math.sqrt(4 - x * x)), (0, 0), (3, 0))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for _, (_, line) in sorted(mod.RESULTS.items(), key=lambda kv: (len(kv[0]), kv[0])):
        terminalreporter.write_line(line)
