"""Descent on the unit sphere for 0-homogeneous functionals.

Every infimum in this package (first eigenvalues, cone-restricted thresholds,
nonlinear Rayleigh quotients, the reduced energy ``u -> Phi(t_u u)``) is the
minimum of a function that is invariant under ``u -> s u``, ``s > 0``. Such a
function can be minimized by plain gradient steps followed by renormalization;
the renormalization changes nothing but the scale of the iterate.

Steps use the Sobolev gradient ``K^{-1} g`` (see
:class:`~nehari.grid.StiffnessPreconditioner`), a Barzilai-Borwein trial step
and Armijo backtracking, so accepted values never increase.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["DescentResult", "sphere_descent"]

ARMIJO_C = 1e-4
MAX_REJECTIONS = 30


@dataclass
class DescentResult:
    x: np.ndarray
    fun: float
    residual: float
    n_iter: int
    converged: bool
    trapped: bool = False
    history: list = field(default_factory=list, repr=False)


def _residual(f, gd):
    return float(np.sqrt(max(gd, 0.0)) / max(abs(f), 1.0))


def sphere_descent(
    fun,
    x0,
    precond,
    *,
    max_iter=5000,
    gtol=1e-10,
    ftol=1e-14,
    accept=None,
    step0=None,
    keep_history=False,
):
    """Minimize a 0-homogeneous ``fun`` starting from ``x0``.

    Parameters
    ----------
    fun : callable
        ``fun(x) -> (value, gradient)``. ``value`` may be ``inf`` where the
        functional is undefined (outside its admissible cone); such trial
        points are rejected like failed Armijo steps.
    precond : StiffnessPreconditioner
        Supplies ``solve`` (Sobolev gradient) and ``norm`` (sphere scaling).
    gtol : float
        Stop when ``sqrt(g . K^{-1} g) / max(|f|, 1) < gtol``.
    ftol : float
        Also stop after five consecutive accepted steps whose relative
        decrease is below ``ftol``.
    accept : callable, optional
        ``accept(x) -> bool``; trial points returning False are rejected. After
        30 consecutive rejections the run stops with ``trapped=True``.
    """
    x = np.asarray(x0, dtype=float)
    x = x / precond.norm(x)
    f, g = fun(x)
    if not np.isfinite(f):
        return DescentResult(x, f, np.inf, 0, False, trapped=True)
    d = precond.solve(g)
    gd = float(g @ d)
    history = [f] if keep_history else []
    alpha = step0 if step0 is not None else 1.0 / max(np.sqrt(max(gd, 0.0)), 1e-300)
    x_prev = g_prev = None
    small = 0
    it = 0
    for it in range(1, max_iter + 1):
        res = _residual(f, gd)
        if res < gtol:
            return DescentResult(x, f, res, it - 1, True, history=history)
        if x_prev is not None:
            s = x - x_prev
            y = g - g_prev
            sy = float(s @ y)
            if sy > 0:
                alpha = float(s @ precond.apply(s)) / sy
        rejections = 0
        while True:
            xt = x - alpha * d
            ft, gt = fun(xt)
            ok = np.isfinite(ft) and (accept is None or accept(xt))
            if ok and ft <= f - ARMIJO_C * alpha * gd:
                break
            if ok and abs(f - ft) <= 4 * np.finfo(float).eps * abs(f) and alpha * np.sqrt(gd) < 1e-12:
                break
            rejections += 1
            alpha *= 0.5
            if rejections >= MAX_REJECTIONS:
                return DescentResult(x, f, res, it - 1, False, trapped=True, history=history)
        nrm = precond.norm(xt)
        x_prev, g_prev = x / 1.0, g
        # the rescaling keeps x on the sphere; values and directions are invariant
        x = xt / nrm
        f_old, f = f, ft
        g = gt * nrm
        x_prev = x_prev / nrm
        g_prev = g_prev * nrm
        d = precond.solve(g)
        gd = float(g @ d)
        if keep_history:
            history.append(f)
        if abs(f_old - f) <= ftol * max(abs(f), 1.0):
            small += 1
            if small >= 5:
                res = _residual(f, gd)
                return DescentResult(x, f, res, it, True, history=history)
        else:
            small = 0
    return DescentResult(x, f, _residual(f, gd), it, False, history=history)
