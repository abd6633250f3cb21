"""Nonlinear Rayleigh quotients and extremal parameters.

For a three-term fibering map whose coefficients depend linearly on a
parameter ``lam``, the quotient ``lam(u)`` is the unique ``lam`` at which
``phi_u' = phi_u'' = 0`` has a solution: below it the map has a local minimum
and a local maximum, above it none. Four closed forms are provided:

``concave_convex``  ``lam(u)`` for ``||u||^p/p - lam int a|u|^q/q - int b|u|^r/r``
``pqr_alpha``       ``alpha(u)`` for the (p,q) problem with ``theta = p``, ``r < q < p``
``pqr_beta``        ``beta(u)`` for the (p,q) problem with ``theta = q``, ``q < p < r``
``gradient_system`` ``lam(u, v)`` for the coupled system, ``2 < q < r``

Each closed form is a sum of monomials in grid integrals, which gives exact
gradients by logarithmic differentiation. :func:`brute_force_parameter`
recovers the same number independently by bisection on the number of
critical points returned by :mod:`nehari.fibering`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .energy import ConcaveConvex, EnergyModel, GradientSystem, PQConcave, PQConvex
from .exceptions import DomainError, InfeasibleError, InvalidInputError, NotFoundError
from .fibering import FiberingProfile, critical_points
from .grid import (
    GridFunction,
    PairGridFunction,
    StiffnessPreconditioner,
    diff_power_grad,
    diff_power_sum,
    power_sum,
    power_sum_grad,
)
from .optimize import sphere_descent
from .spectrum import start_functions

__all__ = [
    "QuotientSpec",
    "ParametricProfile",
    "ExtremalResult",
    "quotient",
    "quotient_and_grad",
    "parametric_profile",
    "brute_force_parameter",
    "oracle_gap",
    "extremal_parameter",
    "C_rq",
]

_SPEC_FAMILIES = {
    ConcaveConvex: "concave_convex",
    PQConcave: "pqr_alpha",
    PQConvex: "pqr_beta",
    GradientSystem: "gradient_system",
}


def C_rq(r: float, q: float) -> float:
    """``((r-q)/(r-2)) ((q-2)/(r-2))^{(q-2)/(r-q)}``."""
    return (r - q) / (r - 2) * ((q - 2) / (r - 2)) ** ((q - 2) / (r - q))


@dataclass(frozen=True)
class QuotientSpec:
    """A Rayleigh quotient attached to the model whose exponents and weights it uses."""

    model: EnergyModel

    def __post_init__(self):
        if type(self.model) not in _SPEC_FAMILIES:
            raise InvalidInputError(
                f"no Rayleigh quotient for {type(self.model).__name__}; use "
                "ConcaveConvex, PQConcave, PQConvex or GradientSystem"
            )

    @property
    def family(self) -> str:
        return _SPEC_FAMILIES[type(self.model)]

    @property
    def grid(self):
        return self.model.grid


# -- integrals and monomials -------------------------------------------------------


def _integrals(spec: QuotientSpec, x):
    """Named integrals ``{name: (value, gradient)}`` used by the closed forms."""
    m = spec.model
    h = m.grid.h
    if spec.family == "gradient_system":
        n = m.grid.n
        u, v = x[:n], x[n:]
        b = m._weights["b"]
        z = np.zeros(n)
        return {
            "N": (
                diff_power_sum(u, h, 2) + diff_power_sum(v, h, 2),
                np.concatenate((diff_power_grad(u, h, 2), diff_power_grad(v, h, 2))),
            ),
            "C": (h * float(u @ v), h * np.concatenate((v, u))),
            "P": (power_sum(v, h, m.q), np.concatenate((z, power_sum_grad(v, h, m.q)))),
            "R": (power_sum(u, h, m.r, b), np.concatenate((power_sum_grad(u, h, m.r, b), z))),
        }
    b = m._weights["b"]
    out = {"R": (power_sum(x, h, m.r, b), power_sum_grad(x, h, m.r, b))}
    if spec.family == "concave_convex":
        a = m._weights["a"]
        out["P"] = (diff_power_sum(x, h, m.p), diff_power_grad(x, h, m.p))
        out["Q"] = (power_sum(x, h, m.q, a), power_sum_grad(x, h, m.q, a))
    else:
        for s, key in ((m.p, "p"), (m.q, "q")):
            out["A" + key] = (diff_power_sum(x, h, s), diff_power_grad(x, h, s))
            out["B" + key] = (power_sum(x, h, s), power_sum_grad(x, h, s))
    return out


def _monomials(spec: QuotientSpec):
    """Closed form as ``[(K, {integral: exponent})]`` plus positivity requirements."""
    m = spec.model
    f = spec.family
    if f == "concave_convex":
        p, q, r = m.p, m.q, m.r
        e = (p - q) / (r - p)
        K = (r - p) / (r - q) * ((p - q) / (r - q)) ** e
        return [(K, {"P": (r - q) / (r - p), "Q": -1.0, "R": -e})], ("Q", "R")
    if f == "pqr_alpha":
        p, q, r = m.p, m.q, m.r
        K = (q - r) / (p - q) * ((p - q) / (p - r)) ** ((p - r) / (q - r))
        return [
            (1.0, {"Ap": 1.0, "Bp": -1.0}),
            (K, {"Aq": (p - r) / (q - r), "Bp": -1.0, "R": -(p - q) / (q - r)}),
        ], ("R",)
    if f == "pqr_beta":
        p, q, r = m.p, m.q, m.r
        e = (p - q) / (r - p)
        K = (r - p) / (r - q) * ((p - q) / (r - q)) ** e
        return [
            (1.0, {"Aq": 1.0, "Bq": -1.0}),
            (K, {"Ap": (r - q) / (r - p), "Bq": -1.0, "R": -e}),
        ], ("R",)
    q, r = m.q, m.r
    return [
        (0.5, {"N": 1.0, "C": -1.0}),
        (0.5 * C_rq(r, q), {"P": (r - 2) / (r - q), "R": -(q - 2) / (r - q), "C": -1.0}),
    ], ("R", "C")


_NAMES = {"R": "int b|u|^r", "Q": "int a|u|^q", "C": "int uv"}


def _evaluate(spec, x, need_grad):
    ints = _integrals(spec, x)
    monos, positive = _monomials(spec)
    for key in positive:
        if not ints[key][0] > 0:
            return None, key
    val = 0.0
    grad = np.zeros_like(x) if need_grad else None
    for K, expo in monos:
        term = K * np.prod([ints[k][0] ** e for k, e in expo.items()])
        val += term
        if need_grad:
            grad += term * sum(e * ints[k][1] / ints[k][0] for k, e in expo.items())
    return (float(val), grad), None


def _as_array(spec, u):
    return spec.model.as_array(u)


def quotient(spec: QuotientSpec, u) -> float:
    """Closed-form nonlinear Rayleigh quotient of ``u``.

    Raises :class:`DomainError` if ``u`` is outside the admissible cone.
    """
    out, bad = _evaluate(spec, _as_array(spec, u), False)
    if out is None:
        raise DomainError(f"quotient undefined: {_NAMES.get(bad, bad)} must be > 0")
    return out[0]


def quotient_and_grad(spec: QuotientSpec, x):
    """``(value, gradient)`` on raw arrays; ``(inf, 0)`` outside the cone."""
    out, _ = _evaluate(spec, np.asarray(x, dtype=float), True)
    if out is None:
        return np.inf, np.zeros_like(x)
    return out


# -- brute-force oracle --------------------------------------------------------------


@dataclass(frozen=True)
class ParametricProfile:
    """Fibering profile with coefficients ``c0 + lam * c1`` per degree."""

    terms: tuple  # ((c0, c1, d), ...)

    def at(self, lam: float) -> FiberingProfile:
        return FiberingProfile([(c0 + lam * c1, d) for c0, c1, d in self.terms])

    def count(self, lam: float) -> int:
        return len(critical_points(self.at(lam)))


def parametric_profile(spec: QuotientSpec, u) -> ParametricProfile:
    """Profile of ``u`` as an affine function of the model's parameter ``lam``."""
    m = spec.model
    x = _as_array(spec, u)
    rows = []
    for lam in (1.0, 2.0):
        mm = clone(m).set_params(**{m.lambda_param: lam})
        rows.append({d: v / d for d, v, _, _ in mm.pieces(x)})
    terms = []
    for d in sorted(rows[0]):
        c1 = rows[1][d] - rows[0][d]
        terms.append((rows[0][d] - c1, c1, d))
    return ParametricProfile(tuple(terms))


def brute_force_parameter(
    template: ParametricProfile, lam_range=(1e-8, 1e8), rtol=1e-12
) -> float:
    """Parameter at which the two critical points of ``template`` merge and vanish.

    Scans ``lam`` on a log grid over ``lam_range`` for the first value with no
    critical point, then bisects the transition to relative width ``rtol``.
    """
    if len(template.terms) != 3:
        raise InvalidInputError("template must have exactly three terms")
    lams = np.logspace(np.log10(lam_range[0]), np.log10(lam_range[1]), 161)
    counts = []
    hi = None
    for i, lam in enumerate(lams):
        try:
            c = template.count(lam)
        except InvalidInputError:
            c = -1
        counts.append(c)
        if c == 0 and i > 0 and counts[i - 1] > 0:
            hi = i
            break
    if hi is None:
        raise NotFoundError(
            f"no transition to zero critical points for lam in "
            f"[{lam_range[0]:g}, {lam_range[1]:g}]",
            scanned={"lam": lams[: len(counts)].tolist(), "counts": counts},
        )
    lo_v, hi_v = float(lams[hi - 1]), float(lams[hi])
    while hi_v - lo_v > rtol * hi_v:
        mid = 0.5 * (lo_v + hi_v)
        if template.count(mid) == 0:
            hi_v = mid
        else:
            lo_v = mid
    return 0.5 * (lo_v + hi_v)


def oracle_gap(spec: QuotientSpec, u) -> float:
    """Relative gap between the closed form and the brute-force parameter."""
    val = quotient(spec, u)
    bf = brute_force_parameter(parametric_profile(spec, u))
    return abs(val - bf) / abs(val)


# -- extremal parameters -------------------------------------------------------------


@dataclass
class ExtremalResult:
    value: float
    argmin: object
    oracle_gap: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {"value": self.value, "oracle_gap": self.oracle_gap, **self.diagnostics}


def _starts(spec, n_starts, seed):
    grid = spec.grid
    base = start_functions(grid, n_starts, seed, positive_fraction=0.75)
    if spec.family != "gradient_system":
        return base
    other = start_functions(grid, n_starts, None if seed is None else seed + 1, 0.75)
    return [np.concatenate((u, v)) for u, v in zip(base, other)]


def extremal_parameter(
    spec: QuotientSpec, seed=0, n_starts: int = 20, max_iter: int = 5000
) -> ExtremalResult:
    """Infimum of the quotient over its admissible cone (multi-start descent)."""
    m = spec.model
    pre = StiffnessPreconditioner(m.grid, blocks=2 if m.is_pair else 1)
    fun = lambda x: quotient_and_grad(spec, x)  # noqa: E731
    starts = [x for x in _starts(spec, n_starts, seed) if np.isfinite(fun(x)[0])]
    if not starts:
        raise InfeasibleError(
            f"no admissible start found for the {spec.family} quotient "
            f"({n_starts} probes)"
        )
    best = None
    for x0 in starts:
        res = sphere_descent(fun, x0, pre, max_iter=max_iter, gtol=1e-9, ftol=1e-14)
        if best is None or res.fun < best.fun:
            best = res
    x = best.x if best.x.sum() >= 0 else -best.x
    arg = m.wrap(x)
    return ExtremalResult(
        float(best.fun),
        arg,
        oracle_gap(spec, x),
        {
            "seed": seed,
            "starts": len(starts),
            "residual": best.residual,
            "iterations": best.n_iter,
            "converged": best.converged,
        },
    )
