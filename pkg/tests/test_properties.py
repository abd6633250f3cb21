"""Property-based checks of the structural invariants."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nehari.energy import ConcaveConvex, Kirchhoff, PQConvex, Superlinear
from nehari.fibering import FiberingProfile, classify
from nehari.grid import Grid1D, diff_power_sum, power_sum
from nehari.solver import nehari_scale

N = 24
GRID = Grid1D(N)

vectors = st.lists(st.floats(-3, 3), min_size=N, max_size=N).map(np.array).filter(
    lambda x: np.abs(x).max() > 1e-2
)
scales = st.floats(1e-2, 1e2)
exponents = st.floats(1.2, 7.0)


@given(x=vectors, t=scales, s=exponents)
def test_power_integrals_are_homogeneous(x, t, s):
    h = GRID.h
    assert power_sum(t * x, h, s) == pytest.approx(t**s * power_sum(x, h, s), rel=1e-12)
    assert diff_power_sum(t * x, h, s) == pytest.approx(t**s * diff_power_sum(x, h, s), rel=1e-12)


@given(x=vectors, y=vectors)
def test_power_integral_triangle_inequality(x, y):
    # Minkowski: || x + y ||_s <= || x ||_s + || y ||_s
    h, s = GRID.h, 3.0
    lhs = diff_power_sum(x + y, GRID.h, s) ** (1 / s)
    rhs = diff_power_sum(x, h, s) ** (1 / s) + diff_power_sum(y, h, s) ** (1 / s)
    assert lhs <= rhs * (1 + 1e-12)


@given(
    x=vectors,
    t=scales,
    lam=st.floats(0.1, 20),
    b=st.floats(-2, 2),
)
def test_energy_along_ray_equals_profile(x, t, lam, b):
    m = ConcaveConvex(N, lam=lam, b=b)
    assert m.profile(x)(t) == pytest.approx(m.energy(t * x), rel=1e-10, abs=1e-12)


@given(x=vectors, lam=st.floats(-5, 30), mu=st.floats(-5, 100))
def test_euler_identity(x, lam, mu):
    m = Kirchhoff(N, lam=lam, mu=mu)
    J = m.nehari(x)
    gx = float(m.grad(x) @ x)
    assert J == pytest.approx(gx, rel=1e-9, abs=1e-9 * max(1.0, abs(J)))


@given(x=vectors, t=scales)
def test_cone_membership_is_scale_invariant(x, t):
    m = PQConvex(N, lam=3.0, b="sign_change(0.4)")
    a, b = m.cones(x), m.cones(t * x)
    assert (a.in_Y1, a.in_Y2) == (b.in_Y1, b.in_Y2) or min(abs(a.Y1_value), abs(a.Y2_value)) < 1e-12


@given(x=vectors, t=scales)
def test_nehari_scale_is_equivariant(x, t):
    m = Superlinear(N, b=1.0)
    s1, _, _ = nehari_scale(m, x)
    s2, _, _ = nehari_scale(m, t * x)
    assert s2 * t == pytest.approx(s1, rel=1e-10)
    assert abs(m.nehari(s1 * x)) <= 1e-9 * m.pieces(s1 * x)[0][1]


@given(
    c=st.lists(st.floats(0.05, 20) | st.floats(-20, -0.05), min_size=3, max_size=3),
    d=st.lists(st.floats(1.1, 9.0), min_size=3, max_size=3, unique=True),
    k=st.floats(0.01, 100),
)
def test_classification_ignores_positive_rescaling(c, d, k):
    # multiplying phi by k > 0 keeps every critical point and its type
    p = FiberingProfile(list(zip(c, d)))
    q = FiberingProfile([(k * ci, di) for ci, di in zip(c, d)])
    gp, gq = classify(p), classify(q)
    assert gp.label == gq.label
    np.testing.assert_allclose(
        [cp.t for cp in gp.critical_points], [cp.t for cp in gq.critical_points], rtol=1e-9
    )
