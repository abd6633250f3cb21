import numpy as np
import pytest
from conftest import fd_gradient
from sklearn.base import clone

from nehari.energy import (
    FAMILIES,
    ConcaveConvex,
    GeneralizedQuasi,
    GeneralKirchhoff,
    GradientSystem,
    Kirchhoff,
    PQConcave,
    PQConvex,
    PQEigen,
    Superlinear,
    cone_membership,
    evaluate,
    fibering_profile,
    gradient,
    make_model,
    nehari_residual,
)
from nehari.exceptions import InvalidInputError
from nehari.grid import Grid1D

N = 31


def sample_models():
    return {
        "superlinear": Superlinear(N, r=4, b="sin"),
        "pq_eigen": PQEigen(N, p=4, q=2, alpha=3.0, beta=2.0),
        "pq_convex": PQConvex(N, p=4, q=2, r=6, lam=2.0, b=1.0),
        "pq_concave": PQConcave(N, p=4, q=3, r=1.5, lam=1.0, b=1.0),
        "concave_convex": ConcaveConvex(N, lam=1.0, a=1.0, b="sign_change(0.5)"),
        "kirchhoff": Kirchhoff(N, a=1.0, b=1.0, lam=2.0, mu=3.0),
        "gradient_system": GradientSystem(N, q=3, r=4, lam=1.0, b=1.0),
        "generalized_quasi": GeneralizedQuasi(N, b1=0.0, b2=1.0),
        "general_kirchhoff": GeneralKirchhoff(N, m0=1.0, m1=0.5, b1="sin"),
    }


MODELS = sample_models()


def smooth_point(model, seed=0):
    rng = np.random.default_rng(seed)
    x = model.grid.x
    base = np.sin(np.pi * x) * (1 + 0.3 * rng.uniform(-1, 1, x.size))
    if model.is_pair:
        return np.concatenate([base, 0.7 * np.sin(np.pi * x) ** 2 + 0.1 * base])
    return base


def test_every_family_has_a_sample():
    assert set(MODELS) == set(FAMILIES)


def test_kirchhoff_sin_energy():
    # Phi(sin) = A/2 + A^2/4 - W_4/4 with A = lam_h / 2 and W_4 = 3/8 exactly
    for n in (15, 255):
        m = Kirchhoff(n, a=1.0, b=1.0, lam=0.0, mu=1.0)
        g = Grid1D(n)
        A = 2 * np.sin(np.pi * g.h / 2) ** 2 / g.h**2
        phi = m.energy(np.sin(np.pi * g.x))
        assert phi == pytest.approx(A / 2 + A**2 / 4 - 3 / 32, rel=1e-13)
    cont = 0.5 * np.pi**2 / 2 + 0.25 * (np.pi**2 / 2) ** 2 - 0.25 * 3 / 8
    assert phi == pytest.approx(cont, rel=1e-4)


def test_superlinear_sin_energy():
    m = Superlinear(127, r=4, b=1.0)
    g = m.grid
    A = 2 * np.sin(np.pi * g.h / 2) ** 2 / g.h**2
    assert m.energy(np.sin(np.pi * g.x)) == pytest.approx(A / 2 - 3 / 32, rel=1e-13)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_gradient_matches_finite_differences(name):
    m = MODELS[name]
    x = smooth_point(m)
    g = m.grad(x)
    fd = fd_gradient(m.energy, x, eps=1e-6)
    assert np.max(np.abs(g - fd)) <= 1e-6 * max(1.0, np.max(np.abs(g)))


@pytest.mark.parametrize("name", sorted(MODELS))
def test_nehari_functional_is_euler_identity(name):
    m = MODELS[name]
    x = smooth_point(m, 1)
    assert m.nehari(x) == pytest.approx(float(m.grad(x) @ x), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_profile_reproduces_energy_on_the_ray(name):
    m = MODELS[name]
    x = smooth_point(m, 2)
    prof = m.profile(x)
    for t in (0.3, 1.0, 2.7):
        assert prof(t) == pytest.approx(m.energy(t * x), rel=1e-11, abs=1e-13)
    assert prof.derivative(1.0) == pytest.approx(m.nehari(x), rel=1e-11, abs=1e-13)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_hessian_matches_finite_difference_of_gradient(name):
    m = MODELS[name]
    x = smooth_point(m, 3)
    H = m.hessian(x)
    assert np.allclose(H, H.T, atol=1e-8 * np.abs(H).max())
    d = np.random.default_rng(4).normal(size=x.size)
    eps = 1e-6
    fd = (m.grad(x + eps * d) - m.grad(x - eps * d)) / (2 * eps)
    assert np.max(np.abs(H @ d - fd)) <= 1e-5 * max(1.0, np.max(np.abs(fd)))


def test_hessian_absent_where_exponent_below_two():
    m = ConcaveConvex(N, lam=1.0)
    x = smooth_point(m)
    x[5] = 0.0
    with pytest.raises(InvalidInputError, match="Hessian"):
        m.hessian(x)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_cone_values_are_scale_invariant(name):
    m = MODELS[name]
    x = smooth_point(m, 5)
    a, b = m.cones(x), m.cones(3.7 * x)
    assert a.Y1_value == pytest.approx(b.Y1_value, rel=1e-12, abs=1e-15)
    assert a.Y2_value == pytest.approx(b.Y2_value, rel=1e-12, abs=1e-15)
    assert a.in_Y1 == (a.Y1_value < 0)


def test_superlinear_cones():
    m = Superlinear(N, b=1.0)
    x = smooth_point(m)
    rep = m.cones(x)
    assert rep.in_Y1 and not rep.in_Y2
    assert m.in_cone(x, "whole")


def test_kirchhoff_cone_signs():
    m = Kirchhoff(N, a=1.0, b=1.0, lam=20.0, mu=1.0)
    x = np.sin(np.pi * m.grid.x)
    rep = m.cones(x)
    # lam = 20 > lambda_1: the first eigenfunction lies in Y2; mu small: not in Y1
    assert rep.in_Y2 and not rep.in_Y1


@pytest.mark.parametrize(
    "factory, message",
    [
        (lambda: PQConvex(N, p=4, q=4, r=6), "PQConvex requires 1 < q < p < r"),
        (lambda: PQConcave(N, p=4, q=3, r=3.5), "PQConcave"),
        (lambda: PQEigen(N, p=2, q=3), "PQEigen"),
        (lambda: ConcaveConvex(N, p=2, q=2.5, r=4), "ConcaveConvex"),
        (lambda: ConcaveConvex(N, lam=-1.0), "ConcaveConvex"),
        (lambda: Kirchhoff(N, a=0.0), "Kirchhoff"),
        (lambda: GradientSystem(N, q=2, r=4), "GradientSystem requires 2 < q < r"),
        (lambda: GeneralizedQuasi(N, b1=1.0, b2=1.0), "b1"),
        (lambda: GeneralizedQuasi(N, b1=-1.0), "b1"),
        (lambda: GeneralKirchhoff(N, r1=2.0, r2=3.0), "r1"),
        (lambda: Superlinear(N, r=2.0), "Superlinear"),
    ],
)
def test_ordering_violations_are_named(factory, message):
    with pytest.raises(InvalidInputError, match=message):
        factory()


def test_set_params_revalidates_and_clone_works():
    m = PQConvex(N)
    with pytest.raises(InvalidInputError):
        m.set_params(q=5.0)
    m2 = clone(PQConvex(N, lam=3.0))
    assert m2.lam == 3.0 and m2.grid.n == N


def test_make_model_by_family_and_class_name():
    assert isinstance(make_model("kirchhoff", n=N), Kirchhoff)
    assert isinstance(make_model("PQConvex", n=N), PQConvex)
    with pytest.raises(InvalidInputError, match="unknown family"):
        make_model("nope")


def test_functional_api_agrees_with_methods():
    m = MODELS["concave_convex"]
    x = smooth_point(m)
    u = m.wrap(x)
    assert evaluate(m, u) == m.energy(x)
    assert nehari_residual(m, u) == m.nehari(x)
    np.testing.assert_array_equal(gradient(m, u).values, m.grad(x))
    assert fibering_profile(m, u).terms == m.profile(x).terms
    assert cone_membership(m, u) == m.cones(x)


def test_functional_api_rejects_wrong_grid():
    m = MODELS["superlinear"]
    other = Grid1D(N + 2)
    with pytest.raises(InvalidInputError):
        evaluate(m, other.sample(np.sin))
    with pytest.raises(InvalidInputError):
        m.profile(np.zeros(N))


def test_describe_is_plain():
    d = MODELS["kirchhoff"].describe()
    assert d["family"] == "kirchhoff" and d["mu"] == 3.0
