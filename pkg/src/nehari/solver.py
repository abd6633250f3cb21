"""Minimization of the energy over the Nehari set inside a cone.

Along each ray ``t -> t u`` the Nehari points are the critical points of the
fibering map. Choosing one of them (the first minimum, the unique critical
point or the last maximum) defines the reduced functional

    Psi(u) = Phi(t_u u),   Psi'(u) = t_u Phi'(t_u u)

(the second term of the chain rule vanishes because ``J(t_u u) = 0``). ``Psi``
is 0-homogeneous, so it is minimized by descent on the sphere, with steps
that leave the cone rejected. The limit is polished by Newton's method on
``Phi' = 0`` when the Hessian exists, and finally projected back to the
Nehari set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import ConeReport, EnergyModel, Kirchhoff, PQEigen, Superlinear
from .exceptions import (
    GeometryError,
    InfeasibleError,
    InvalidInputError,
    NonConvergenceError,
    NotFoundError,
)
from .fibering import GeometryClass, classify, critical_points, first_min, last_max
from .grid import StiffnessPreconditioner
from .optimize import sphere_descent
from .spectrum import eigen_p, start_functions

__all__ = [
    "SolveReport",
    "nehari_scale",
    "project_to_nehari",
    "minimize_relative_ground_state",
    "second_solution_search",
    "classify_level",
    "verify_critical",
    "initial_guesses",
]

MODES = ("first_min", "unique", "last_max", "auto")
DISTINCT_TOL = 1e-3
N_SAMPLES = 500


@dataclass
class SolveReport:
    level: float
    solution: object
    fibering: GeometryClass
    residual: float
    classification: str
    cone: ConeReport
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self, include_solution=False):
        out = {
            "level": self.level,
            "residual": self.residual,
            "classification": self.classification,
            "fibering": self.fibering.to_dict(),
            "cone": self.cone.to_dict(),
            "diagnostics": {k: v for k, v in self.diagnostics.items() if k != "reference"},
        }
        if include_solution:
            out["solution"] = self.solution.values.tolist()
        return out


# -- Nehari projection --------------------------------------------------------------


def _select(geo: GeometryClass, mode: str):
    if mode not in MODES:
        raise InvalidInputError(f"unknown mode {mode!r}; use one of {MODES}")
    try:
        if mode == "first_min":
            return first_min(geo)
        if mode == "last_max":
            return last_max(geo)
        if mode == "unique":
            if len(geo.critical_points) != 1 or geo.degenerate:
                raise GeometryError(
                    f"ray has {len(geo.critical_points)} critical points, not exactly one "
                    f"(geometry {geo.label})",
                    geometry=geo,
                )
            return geo.critical_points[0]
        # auto: the lowest Nehari point on the ray for H1/H2/H3/H5 geometries
        if "H3" in geo.hypotheses:
            return first_min(geo)
        if "H1" in geo.hypotheses:
            return geo.critical_points[0]
    except NotFoundError as exc:
        raise GeometryError(str(exc), geometry=geo) from None
    raise GeometryError(f"no Nehari point for geometry {geo.label}", geometry=geo)


def nehari_scale(model: EnergyModel, u, mode: str = "auto"):
    """``(t, critical point, geometry)`` of the Nehari point on the ray of ``u``."""
    x = model.as_array(u)
    geo = classify(model.profile(x))
    cp = _select(geo, mode)
    return cp.t, cp, geo


def project_to_nehari(model: EnergyModel, u, mode: str = "auto"):
    """``t u`` with ``t`` the Nehari scale chosen by ``mode``."""
    t, _, _ = nehari_scale(model, u, mode)
    return model.wrap(t * model.as_array(u))


def _reduced(model, mode):
    zero = np.zeros(model.size)

    def fun(x):
        try:
            t, cp, _ = nehari_scale(model, x, mode)
        except (GeometryError, InvalidInputError):
            return np.inf, zero
        return cp.value, t * model.grad(t * x)

    return fun


# -- starts, probing and polishing --------------------------------------------------


def initial_guesses(model: EnergyModel, count: int, seed):
    """``sin(pi x)`` followed by seeded smooth perturbations (pairs: independent seeds)."""
    grid = model.grid
    s = np.sin(np.pi * grid.x)
    us = [s] + start_functions(grid, count - 1, seed, positive_fraction=0.6)
    if not model.is_pair:
        return us
    vs = [s] + start_functions(grid, count - 1, None if seed is None else seed + 7919, 0.6)
    return [np.concatenate((u, v)) for u, v in zip(us, vs)]


def _probe_cone(model, cone, starts, pre):
    """Descend the normalized cone functional until a start enters the cone."""
    eps = 1e-7

    def fun(x):
        f = model.cone_value(x, cone)
        g = np.empty_like(x)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = eps
            g[i] = (model.cone_value(x + e, cone) - model.cone_value(x - e, cone)) / (2 * eps)
        return f, g

    for x0 in starts[:3]:
        res = sphere_descent(fun, x0, pre, max_iter=200, gtol=1e-8)
        if model.in_cone(res.x, cone):
            return res.x
    return None


def _newton_polish(model, z, max_iter=50):
    """Newton iterations on ``Phi'(z) = 0``; None if the Hessian is unavailable."""
    g = model.grad(z)
    r0 = np.abs(g).max()
    for _ in range(max_iter):
        if np.abs(g).max() < 1e-15 * max(1.0, np.abs(z).max()):
            break
        try:
            d = np.linalg.solve(model.hessian(z), g)
        except (InvalidInputError, np.linalg.LinAlgError):
            return None
        alpha = 1.0
        while alpha > 1e-4:
            zt = z - alpha * d
            gt = model.grad(zt)
            if np.linalg.norm(gt) < np.linalg.norm(g):
                break
            alpha *= 0.5
        else:
            break
        z, g = zt, gt
    return z if np.abs(g).max() <= r0 else None


def _positive_orientation(x):
    return x if x.sum() >= 0 else -x


def verify_critical(model: EnergyModel, u, tol: float = 1e-6) -> dict:
    """Sup and Euclidean norms of the nodal gradient of ``Phi`` at ``u``."""
    g = model.grad(model.as_array(u))
    sup = float(np.abs(g).max()) if g.size else 0.0
    return {"sup": sup, "l2": float(np.linalg.norm(g)), "passed": bool(sup < tol)}


def _run(model, cone, mode, seed, n_starts, tol, max_iter, label, initial=None):
    if cone not in ("Y1", "Y2", "whole"):
        raise InvalidInputError(f"unknown cone {cone!r}; use Y1, Y2 or whole")
    pre = StiffnessPreconditioner(model.grid, blocks=2 if model.is_pair else 1)
    fun = _reduced(model, mode)
    if initial is not None:
        starts = [np.array(model.as_array(initial), dtype=float)]
    else:
        starts = initial_guesses(model, n_starts, seed)
    inside = [x for x in starts if model.in_cone(x, cone)]
    probed = False
    if not inside:
        x = _probe_cone(model, cone, starts, pre)
        if x is None:
            raise InfeasibleError(f"no start found in cone {cone} for {type(model).__name__}")
        inside, probed = [x], True
    admissible = [x for x in inside if np.isfinite(fun(x)[0])]
    if not admissible:
        geo = classify(model.profile(inside[0]))
        raise GeometryError(
            f"{type(model).__name__} has no {mode} Nehari point in cone {cone} "
            f"(geometry {geo.label})",
            geometry=geo,
        )
    accept = None if cone == "whole" else (lambda x: model.in_cone(x, cone))
    best, runs = None, []
    for x0 in admissible:
        res = sphere_descent(fun, x0, pre, max_iter=max_iter, gtol=1e-10, ftol=1e-15, accept=accept)
        runs.append({"level": res.fun, "iterations": res.n_iter, "trapped": res.trapped})
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    try:
        t, _, _ = nehari_scale(model, best.x, mode)
    except GeometryError as exc:
        raise NonConvergenceError(
            f"{label} ended on a ray without a {mode} Nehari point ({exc})",
            best=model.wrap(best.x),
            diagnostics={"descent_level": best.fun, "seed": seed},
        ) from None
    z = t * best.x
    level0 = model.energy(z)
    polished = False
    zp = _newton_polish(model, z)
    if zp is not None and model.in_cone(zp, cone):
        try:
            tp, _, _ = nehari_scale(model, zp, mode)
        except GeometryError:
            tp = np.nan
        if abs(tp - 1.0) < 1e-6 and abs(model.energy(zp) - level0) <= 1e-6 * max(1.0, abs(level0)):
            z = tp * zp
            polished = True
    z = _positive_orientation(z)
    residual = verify_critical(model, z, tol)
    diagnostics = {
        "seed": seed,
        "starts": len(admissible),
        "probed": probed,
        "mode": mode,
        "cone_selector": cone,
        "newton": polished,
        "descent_level": best.fun,
        "descent_residual": best.residual,
        "iterations": int(sum(r["iterations"] for r in runs)),
        "trapped_runs": int(sum(r["trapped"] for r in runs)),
        "nehari_J": model.nehari(z),
        "residual_l2": residual["l2"],
    }
    if not residual["passed"]:
        raise NonConvergenceError(
            f"{label} stalled: gradient sup-norm {residual['sup']:.2e} >= {tol:g}",
            best=model.wrap(z),
            diagnostics=diagnostics,
        )
    geo = classify(model.profile(z))
    report = SolveReport(
        level=float(model.energy(z)),
        solution=model.wrap(z),
        fibering=geo,
        residual=residual["sup"],
        classification="relative_ground_state",
        cone=model.cones(z),
        diagnostics=diagnostics,
    )
    return report


def minimize_relative_ground_state(
    model: EnergyModel,
    cone: str = "Y1",
    seed=0,
    n_starts: int = 6,
    tol: float = 1e-6,
    max_iter: int = 4000,
    mode: str = "auto",
    classify_samples: int = N_SAMPLES,
    initial=None,
) -> SolveReport:
    """Minimize ``Phi`` over ``N`` intersected with ``cone`` (``Y1``, ``Y2`` or ``whole``).

    ``initial`` replaces the generated starts by a single user guess.
    """
    report = _run(
        model, cone, mode, seed, n_starts, tol, max_iter, "relative ground state", initial
    )
    label, extra = classify_level(model, report, cone, seed=seed, n_samples=classify_samples)
    report.classification = label
    report.diagnostics.update(extra)
    return report


def second_solution_search(
    model: EnergyModel,
    seed=0,
    cone: str | None = None,
    reference: SolveReport | None = None,
    n_starts: int = 6,
    tol: float = 1e-6,
    max_iter: int = 4000,
    initial=None,
) -> SolveReport:
    """Minimize ``Phi(s_u u)`` over ``cone`` with ``s_u`` the last maximum on each ray.

    ``cone`` defaults to ``Y2`` (``Y1`` for single-cone families). The result
    is compared with ``reference`` (computed by
    :func:`minimize_relative_ground_state` on ``Y1`` if not given); a
    sup-norm distance below 1e-3 is flagged as ``distinct = False``.
    """
    if cone is None:
        cone = "Y1" if model.single_cone else "Y2"
    report = _run(
        model, cone, "last_max", seed, n_starts, tol, max_iter, "second solution", initial
    )
    if reference is None:
        reference = minimize_relative_ground_state(model, "Y1", seed, n_starts, tol, max_iter)
    x = model.as_array(report.solution)
    y = model.as_array(reference.solution)
    dist = float(min(np.abs(x - y).max(), np.abs(x + y).max()))
    report.classification = "mountain_pass_type"
    report.diagnostics.update(
        {
            "distance_to_reference": dist,
            "distinct": bool(dist > DISTINCT_TOL),
            "reference_level": reference.level,
            "reference": reference,
        }
    )
    return report


# -- level classification -----------------------------------------------------------


def _analytic_ground_state(model, cone):
    """Side conditions that hold by inspection for the given family and cone."""
    if cone == "whole":
        return "every Nehari point lies in the cone"
    if isinstance(model, Superlinear) and np.all(model._weights["b"] >= 0):
        return "b >= 0, so the Nehari set lies in the cone"
    if isinstance(model, PQEigen) and cone == "Y1":
        if model.beta < eigen_p(model.q, model.grid).value:
            return "beta < lambda_1(q): Y2 is empty and J > 0 outside Y1"
    if isinstance(model, PQEigen) and cone == "Y2":
        return "on the Nehari set Phi = (1/q - 1/p) (A_q - beta W_q) >= 0 outside Y2"
    if isinstance(model, Kirchhoff) and cone == "Y1":
        if model.lam < model.a * eigen_p(2.0, model.grid).value:
            return "lam < a lambda_1: J > 0 outside Y1"
    return None


def classify_level(model: EnergyModel, report: SolveReport, cone: str, seed=0, n_samples=N_SAMPLES):
    """Label a computed level and return ``(label, diagnostics)``.

    ``ground_state`` needs ``Phi >= level`` on the Nehari points outside the
    cone. This is known analytically in some cases; otherwise it is checked on
    the Nehari points of ``n_samples`` random rays outside the cone. When the
    check fails, negative levels of minimum-type geometries are reported as
    ``local_min`` (the level is then a local minimum of ``Phi`` in the open
    cone) and the rest as ``relative_ground_state``.
    """
    diag = {}
    reason = _analytic_ground_state(model, cone)
    if reason is not None:
        diag["ground_state_evidence"] = "analytic"
        diag["ground_state_reason"] = reason
        return "ground_state", diag
    samples = initial_guesses(model, n_samples + 1, None if seed is None else seed + 104729)[1:]
    outside, lowest = 0, np.inf
    for x in samples:
        if model.in_cone(x, cone):
            continue
        outside += 1
        for cp in critical_points(model.profile(x)):
            lowest = min(lowest, cp.value)
    scale = max(1.0, abs(report.level))
    holds = bool(lowest >= report.level - 1e-10 * scale)
    diag.update(
        {
            "ground_state_evidence": "sampled",
            "samples": n_samples,
            "samples_outside_cone": outside,
            "lowest_outside_level": None if not np.isfinite(lowest) else float(lowest),
            "side_condition_holds": holds,
        }
    )
    if holds:
        return "ground_state", diag
    if report.level < 0 and "H3" in report.fibering.hypotheses:
        return "local_min", diag
    return "relative_ground_state", diag
