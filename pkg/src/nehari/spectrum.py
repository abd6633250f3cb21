"""First eigenvalues and cone-restricted spectral thresholds.

All quantities here are infima of 0-homogeneous quotients of the form

    Q(u) = coef * A_s(u)^k / W_t(u),     s * k = t,

(``A_s = int |u'|^s``, ``W_t = int |u|^t``), either unconstrained (first
eigenvalues) or over the closed cone ``{Q_c(u) <= threshold}`` of a second
quotient ``Q_c``. Unconstrained infima are computed by Sobolev-preconditioned
descent on the sphere; constrained ones by an exterior quadratic penalty with
warm-started weights ``10^0 .. 10^8`` from several starts, followed by a
feasibility restoration that moves the result into the closed cone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InfeasibleError, InvalidInputError, NonConvergenceError
from .grid import (
    Grid1D,
    GridFunction,
    StiffnessPreconditioner,
    diff_power_grad,
    diff_power_sum,
    power_sum,
    power_sum_grad,
)
from .optimize import sphere_descent

__all__ = [
    "EigenResult",
    "Quotient",
    "eigen_p",
    "kirchhoff_mu1",
    "cone_restricted_infimum",
    "beta_star",
    "alpha_star",
    "pq_corner_values",
    "kirchhoff_mu_star",
    "kirchhoff_lambda_star",
    "kirchhoff_corner_values",
    "discrete_laplacian_eigenvalue",
    "start_functions",
]

PENALTY_WEIGHTS = tuple(10.0**k for k in range(9))
N_STARTS = 20
FEAS_RTOL = 1e-10


@dataclass
class EigenResult:
    value: float
    minimizer: GridFunction
    iterations: int
    residual: float
    converged: bool = True
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "value": self.value,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "grid_n": self.minimizer.grid.n,
            **self.diagnostics,
        }


@dataclass(frozen=True)
class Quotient:
    """``coef * A_s^k / W_t`` with ``t = s * k`` (0-homogeneous)."""

    s: float
    k: int = 1
    coef: float = 1.0

    def __post_init__(self):
        if self.s <= 1:
            raise InvalidInputError(f"quotient needs a seminorm exponent > 1, got {self.s}")
        if self.coef <= 0:
            raise InvalidInputError("quotient coefficient must be positive")

    @property
    def t(self) -> float:
        return self.s * self.k

    def value(self, x, h) -> float:
        W = power_sum(x, h, self.t)
        if W <= 0:
            return np.inf
        return self.coef * diff_power_sum(x, h, self.s) ** self.k / W

    def value_and_grad(self, x, h):
        A = diff_power_sum(x, h, self.s)
        W = power_sum(x, h, self.t)
        if W <= 0:
            return np.inf, np.zeros_like(x)
        Ak = A**self.k
        gA = self.k * A ** (self.k - 1) * diff_power_grad(x, h, self.s)
        gW = power_sum_grad(x, h, self.t)
        val = self.coef * Ak / W
        return val, self.coef * (gA - Ak / W * gW) / W


def discrete_laplacian_eigenvalue(grid: Grid1D, k: int = 1) -> float:
    """``4 sin^2(k pi h / 2) / h^2``, the k-th eigenvalue of the grid Laplacian."""
    h = grid.h
    return 4.0 * np.sin(k * np.pi * h / 2) ** 2 / h**2


def _positive(x):
    return x if x.sum() >= 0 else -x


def _minimize_quotient(quot: Quotient, grid: Grid1D, x0=None, max_iter=20000, gtol=1e-10):
    h = grid.h
    pre = StiffnessPreconditioner(grid)
    x0 = np.sin(np.pi * grid.x) if x0 is None else x0
    res = sphere_descent(
        lambda x: quot.value_and_grad(x, h), x0, pre, max_iter=max_iter, gtol=gtol, ftol=1e-13
    )
    return res


def _eigen_result(res, quot, grid, normalize, name):
    if not res.converged:
        raise NonConvergenceError(
            f"{name} did not converge (residual {res.residual:.2e} after {res.n_iter} steps)",
            best=GridFunction(grid, res.x),
            diagnostics={"residual": res.residual, "iterations": res.n_iter},
        )
    x = _positive(res.x)
    x = x / normalize(x)
    return EigenResult(
        float(quot.value(x, grid.h)), GridFunction(grid, x), res.n_iter, res.residual
    )


def eigen_p(p: float, grid: Grid1D, max_iter: int = 20000) -> EigenResult:
    """``lambda_1(p) = inf A_p / W_p``; minimizer positive with ``W_p = 1``."""
    if not p > 1:
        raise InvalidInputError(f"eigen_p needs p > 1, got {p}")
    quot = Quotient(p)
    res = _minimize_quotient(quot, grid, max_iter=max_iter)
    return _eigen_result(
        res, quot, grid, lambda x: power_sum(x, grid.h, p) ** (1 / p), f"lambda_1({p})"
    )


def kirchhoff_mu1(grid: Grid1D, max_iter: int = 20000) -> EigenResult:
    """``mu_1 = inf A_2^2 / W_4``; minimizer positive with ``A_2 = 1``."""
    quot = Quotient(2.0, 2)
    res = _minimize_quotient(quot, grid, max_iter=max_iter)
    return _eigen_result(
        res, quot, grid, lambda x: np.sqrt(diff_power_sum(x, grid.h, 2)), "mu_1"
    )


def start_functions(grid: Grid1D, count: int, seed, positive_fraction=0.5):
    """Deterministic smooth starting guesses: positive and sign-changing.

    Positive starts are ``sin(pi x) exp(w(x))`` with ``w`` a random low-mode
    sine series; sign-changing starts are random combinations of the first
    six sine modes.
    """
    rng = np.random.default_rng(seed)
    x = grid.x
    modes = np.array([np.sin(k * np.pi * x) for k in range(1, 7)])
    out = []
    n_pos = int(round(count * positive_fraction))
    for i in range(count):
        if i < n_pos:
            w = rng.normal(scale=0.7, size=4) @ modes[:4]
            out.append(np.sin(np.pi * x) * np.exp(w))
        else:
            out.append(rng.normal(size=6) / np.arange(1, 7) @ modes)
    return out


def cone_restricted_infimum(
    objective: Quotient,
    constraint: Quotient,
    threshold: float,
    grid: Grid1D,
    seed=0,
    n_starts: int = N_STARTS,
    max_iter: int = 3000,
) -> EigenResult:
    """``inf { objective(u) : constraint(u) <= threshold, u != 0 }``.

    Raises :class:`InfeasibleError` when the constraint set contains only 0
    (the unconstrained minimum of ``constraint`` exceeds ``threshold``).
    """
    if not (np.isfinite(threshold) and threshold > 0):
        raise InvalidInputError(f"threshold must be a positive number, got {threshold}")
    h = grid.h
    pre = StiffnessPreconditioner(grid)
    cres = _minimize_quotient(constraint, grid)
    xc = _positive(cres.x)
    cmin = constraint.value(xc, h)
    if cmin > threshold * (1 + FEAS_RTOL):
        raise InfeasibleError(
            f"constraint set is empty: its quotient is at least {cmin:.6g} > {threshold:.6g}"
        )
    if cmin >= threshold * (1 - FEAS_RTOL):
        # only the constraint minimizer's ray is feasible
        x = xc / power_sum(xc, h, objective.t) ** (1 / objective.t)
        return EigenResult(
            float(objective.value(x, h)), GridFunction(grid, x), cres.n_iter, cres.residual,
            diagnostics={"active": True, "starts": 0, "constraint_min": float(cmin)},
        )
    scale = objective.value(xc, h)

    def feasible(x):
        return constraint.value(x, h) <= threshold * (1 + FEAS_RTOL)

    def restore(x):
        # blend toward the strictly feasible xc until the constraint holds
        x = x / pre.norm(x)
        if feasible(x):
            return x
        xcn = xc / pre.norm(xc)
        if x @ pre.apply(xcn) < 0:
            x = -x
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if feasible((1 - mid) * x + mid * xcn):
                hi = mid
            else:
                lo = mid
        return (1 - hi) * x + hi * xcn

    starts = start_functions(grid, n_starts, seed) + [xc]
    best = None
    total_iter = 0
    for x0 in starts:
        x = x0
        res = None
        for w in PENALTY_WEIGHTS:

            def fun(z, w=w):
                fo, go = objective.value_and_grad(z, h)
                fc, gc = constraint.value_and_grad(z, h)
                v = fc / threshold - 1.0
                if v <= 0:
                    return fo, go
                return fo + w * scale * v * v, go + (2 * w * scale * v / threshold) * gc

            res = sphere_descent(fun, x, pre, max_iter=max_iter, gtol=1e-10, ftol=1e-15)
            total_iter += res.n_iter
            x = res.x
        xr = restore(x)
        val = objective.value(xr, h)
        if np.isfinite(val) and (best is None or val < best[0]):
            best = (val, xr, res)
    if best is None:
        raise NonConvergenceError("all starts failed", diagnostics={"starts": len(starts)})
    val, x, res = best
    x = _positive(x)
    x = x / power_sum(x, h, objective.t) ** (1 / objective.t)
    return EigenResult(
        float(val),
        GridFunction(grid, x),
        total_iter,
        res.residual,
        converged=True,
        diagnostics={
            "starts": len(starts),
            "seed": seed,
            "constraint_min": float(cmin),
            "constraint_value": float(constraint.value(x, h)),
            "active": bool(constraint.value(x, h) >= threshold * (1 - 1e-6)),
        },
    )


# -- (p,q)-Laplacian thresholds ----------------------------------------------------


def beta_star(alpha, p, q, grid, seed=0, **kw) -> EigenResult:
    """``beta_*(alpha) = inf { R_q(u) : R_p(u) <= alpha }``."""
    return cone_restricted_infimum(Quotient(q), Quotient(p), alpha, grid, seed, **kw)


def alpha_star(beta, p, q, grid, seed=0, **kw) -> EigenResult:
    """``alpha_*(beta) = inf { R_p(u) : R_q(u) <= beta }``."""
    return cone_restricted_infimum(Quotient(p), Quotient(q), beta, grid, seed, **kw)


def pq_corner_values(p, q, grid) -> dict:
    """``lambda_1(p), lambda_1(q)`` and the curve endpoints ``alpha_0 = R_p(phi_q)``,
    ``beta_0 = R_q(phi_p)``."""
    ep, eq = eigen_p(p, grid), eigen_p(q, grid)
    h = grid.h
    return {
        "lambda1_p": ep.value,
        "lambda1_q": eq.value,
        "alpha0": Quotient(p).value(eq.minimizer.values, h),
        "beta0": Quotient(q).value(ep.minimizer.values, h),
    }


# -- Kirchhoff thresholds ----------------------------------------------------------


def kirchhoff_mu_star(lam, a, b, grid, seed=0, **kw) -> EigenResult:
    """``mu^*(lam) = inf { b A^2 / W_4 : a A <= lam W_2 }``."""
    return cone_restricted_infimum(
        Quotient(2.0, 2, b), Quotient(2.0, 1, a), lam, grid, seed, **kw
    )


def kirchhoff_lambda_star(mu, a, b, grid, seed=0, **kw) -> EigenResult:
    """``lambda^*(mu) = inf { a A / W_2 : b A^2 <= mu W_4 }``."""
    return cone_restricted_infimum(
        Quotient(2.0, 1, a), Quotient(2.0, 2, b), mu, grid, seed, **kw
    )


def kirchhoff_corner_values(a, b, grid) -> dict:
    """``a lambda_1``, ``b mu_1``, ``lambda^* = a R_2(psi_1)``, ``mu^* = b A(phi_1)^2/W_4(phi_1)``."""
    h = grid.h
    e2 = eigen_p(2.0, grid)
    m1 = kirchhoff_mu1(grid)
    return {
        "a_lambda1": a * e2.value,
        "b_mu1": b * m1.value,
        "lambda_star": Quotient(2.0, 1, a).value(m1.minimizer.values, h),
        "mu_star": Quotient(2.0, 2, b).value(e2.minimizer.values, h),
    }
