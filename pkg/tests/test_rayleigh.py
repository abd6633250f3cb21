import numpy as np
import pytest
from conftest import fd_gradient
from hypothesis import given
from hypothesis import strategies as st

from nehari.energy import ConcaveConvex, GradientSystem, PQConcave, PQConvex, Superlinear
from nehari.exceptions import DomainError, InvalidInputError, NotFoundError
from nehari.fibering import critical_points
from nehari.rayleigh import (
    C_rq,
    ParametricProfile,
    QuotientSpec,
    brute_force_parameter,
    extremal_parameter,
    oracle_gap,
    parametric_profile,
    quotient,
    quotient_and_grad,
)
from nehari.grid import diff_power_sum
from nehari.spectrum import start_functions

N = 63
SPECS = {
    "concave_convex": QuotientSpec(ConcaveConvex(N, p=2, q=1.5, r=4, lam=1.0)),
    "pqr_alpha": QuotientSpec(PQConcave(N, p=4, q=3, r=1.5, lam=1.0, b=1.0)),
    "pqr_beta": QuotientSpec(PQConvex(N, p=4, q=2, r=6, lam=1.0, b=1.0)),
    # a small weight keeps lam(u) well above N / 2C, where the t^2 coefficient
    # changes sign, so most draws stay in the three-sign regime at 0.99 lam(u)
    "gradient_system": QuotientSpec(GradientSystem(N, q=3, r=4, lam=1.0, b=0.01)),
}


def admissible_inputs(spec, count, seed):
    """Random positive inputs inside the quotient's domain.

    For the coupled system the t^2 coefficient ``N - 2 lam C`` must stay
    negative at ``0.99 lam(u, v)``, otherwise the 1% perturbation leaves the
    three-sign regime where the quotient describes the merge.
    """
    grid = spec.grid
    if spec.family != "gradient_system":
        return start_functions(grid, count, seed, positive_fraction=1.0)
    out, k = [], 0
    while len(out) < count:
        us = start_functions(grid, count, seed + 1000 * k, positive_fraction=1.0)
        vs = start_functions(grid, count, seed + 1000 * k + 1, positive_fraction=1.0)
        for u, v in zip(us, vs):
            # unit Dirichlet norm per component: the quotient is not
            # invariant under separate scalings of u and v
            u = u / np.sqrt(diff_power_sum(u, grid.h, 2))
            v = v / np.sqrt(diff_power_sum(v, grid.h, 2))
            x = np.concatenate((u, v))
            if parametric_profile(spec, x).at(0.99 * quotient(spec, x)).terms[0][0] < 0:
                out.append(x)
        k += 1
    return out[:count]


def test_family_names():
    assert {k: s.family for k, s in SPECS.items()} == {k: k for k in SPECS}
    with pytest.raises(InvalidInputError, match="no Rayleigh quotient"):
        QuotientSpec(Superlinear(N))


def test_hand_template_transition_at_25():
    # phi = (lam/25) t^2/2 - t^4/2 + t^6/6, phi' = t (lam/25 - 2 t^2 + t^4)
    tpl = ParametricProfile(((0.0, 1 / 50, 2.0), (-0.5, 0.0, 4.0), (1 / 6, 0.0, 6.0)))
    assert tpl.count(24.0) == 2 and tpl.count(26.0) == 0
    assert brute_force_parameter(tpl) == pytest.approx(25.0, rel=1e-10)


def test_brute_force_reports_missing_transition():
    tpl = ParametricProfile(((1.0, 0.0, 2.0), (1.0, 0.0, 4.0), (0.0, 1.0, 6.0)))
    with pytest.raises(NotFoundError) as err:
        brute_force_parameter(tpl)
    assert len(err.value.scanned["counts"]) == 161
    with pytest.raises(InvalidInputError):
        brute_force_parameter(ParametricProfile(((1.0, 0.0, 2.0), (0.0, 1.0, 4.0))))


@pytest.mark.parametrize("name", sorted(SPECS))
def test_parametric_profile_matches_model(name):
    spec = SPECS[name]
    x = admissible_inputs(spec, 1, 3)[0]
    tpl = parametric_profile(spec, x)
    prof = spec.model.profile(x)
    lam = getattr(spec.model, spec.model.lambda_param)
    np.testing.assert_allclose(np.array(tpl.at(lam).terms), np.array(prof.terms), rtol=1e-12)


@pytest.mark.parametrize("name", sorted(SPECS))
def test_closed_form_matches_brute_force(name):
    spec = SPECS[name]
    for x in admissible_inputs(spec, 10, 11):
        assert oracle_gap(spec, x) < 1e-8


@pytest.mark.parametrize("name", sorted(SPECS))
def test_threshold_semantics(name):
    spec = SPECS[name]
    for x in admissible_inputs(spec, 10, 17):
        lam = quotient(spec, x)
        tpl = parametric_profile(spec, x)
        assert len(critical_points(tpl.at(0.99 * lam))) == 2
        assert len(critical_points(tpl.at(1.01 * lam))) == 0


@pytest.mark.parametrize("name", sorted(SPECS))
def test_gradient_matches_finite_differences(name):
    spec = SPECS[name]
    x = admissible_inputs(spec, 1, 5)[0]
    val, g = quotient_and_grad(spec, x)
    fd = fd_gradient(lambda z: quotient(spec, z), x, eps=1e-7)
    assert np.max(np.abs(g - fd)) <= 1e-6 * max(1.0, np.abs(g).max())
    assert val == quotient(spec, x)


@pytest.mark.parametrize("name", sorted(SPECS))
@given(s=st.floats(1e-3, 1e3))
def test_quotient_is_zero_homogeneous(name, s):
    spec = SPECS[name]
    x = admissible_inputs(spec, 1, 0)[0]
    assert quotient(spec, s * x) == pytest.approx(quotient(spec, x), rel=1e-12)


def test_outside_cone():
    spec = QuotientSpec(ConcaveConvex(N, lam=1.0, b=-1.0))
    x = np.sin(np.pi * spec.grid.x)
    with pytest.raises(DomainError, match="b"):
        quotient(spec, x)
    val, g = quotient_and_grad(spec, x)
    assert val == np.inf and not g.any()
    pair = SPECS["gradient_system"]
    u = np.sin(np.pi * pair.grid.x)
    with pytest.raises(DomainError, match="uv"):
        quotient(pair, np.concatenate((u, -u)))


def test_c_rq():
    # minimum over t > 0 of (t^{q-2} ... ) reduces to 1 when q -> 2
    assert C_rq(4.0, 2.000001) == pytest.approx(1.0, rel=1e-4)
    assert C_rq(4.0, 3.0) == pytest.approx(0.5 * 0.5)


def test_extremal_parameter_concave_convex():
    res = extremal_parameter(SPECS["concave_convex"], seed=0, n_starts=6)
    assert res.oracle_gap < 1e-8
    assert res.value == pytest.approx(quotient(SPECS["concave_convex"], res.argmin), rel=1e-12)
    # the minimizer beats every random admissible start
    others = [quotient(SPECS["concave_convex"], x) for x in admissible_inputs(SPECS["concave_convex"], 20, 99)]
    assert res.value <= min(others)
    assert res.diagnostics["seed"] == 0 and res.diagnostics["starts"] >= 1


def test_extremal_gradient_system_exceeds_lambda1():
    from nehari.spectrum import discrete_laplacian_eigenvalue

    spec = QuotientSpec(GradientSystem(N, q=3, r=4, lam=1.0, b=1.0))
    res = extremal_parameter(spec, seed=0, n_starts=6)
    assert res.value > discrete_laplacian_eigenvalue(spec.grid)
    assert res.oracle_gap < 1e-8
