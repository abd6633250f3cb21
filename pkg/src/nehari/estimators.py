"""scikit-learn style front ends.

Rows of ``X`` are nodal vectors of grid functions (pairs stacked as
``[u; v]``), so a batch of trial functions can be classified, projected or
scored in one call. Fitted estimators store their results in trailing
underscore attributes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import GeometryError, InvalidInputError
from .fibering import classify
from .grid import Grid1D, diff_power_sum, power_sum
from .rayleigh import QuotientSpec, extremal_parameter, quotient_and_grad
from .solver import (
    minimize_relative_ground_state,
    project_to_nehari,
    second_solution_search,
)
from .spectrum import eigen_p, kirchhoff_mu1
from .validation import check_model, check_rows

__all__ = [
    "FirstEigenvalue",
    "FiberingClassifier",
    "RayleighQuotient",
    "ExtremalParameter",
    "NehariSolver",
]


class FirstEigenvalue(TransformerMixin, BaseEstimator):
    """First eigenvalue ``lambda_1(p)`` (or ``mu_1`` with ``kind="kirchhoff"``).

    ``transform`` returns the quotient ``A_p / W_p`` (``A_2^2 / W_4``) of each
    row, which is bounded below by ``value_``.
    """

    def __init__(self, p=2.0, n=255, kind="p"):
        self.p = p
        self.n = n
        self.kind = kind

    def fit(self, X=None, y=None):
        grid = Grid1D(self.n)
        res = kirchhoff_mu1(grid) if self.kind == "kirchhoff" else eigen_p(self.p, grid)
        self.grid_ = grid
        self.value_ = res.value
        self.minimizer_ = res.minimizer
        self.result_ = res
        return self

    def transform(self, X):
        check_is_fitted(self, "value_")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.grid_.n:
            raise ValueError(f"rows must have {self.grid_.n} nodal values")
        h = self.grid_.h
        if self.kind == "kirchhoff":
            q = [diff_power_sum(x, h, 2) ** 2 / power_sum(x, h, 4) for x in X]
        else:
            q = [diff_power_sum(x, h, self.p) / power_sum(x, h, self.p) for x in X]
        return np.array(q).reshape(-1, 1)


class FiberingClassifier(BaseEstimator):
    """Predict the fibering geometry label (H1..H5, NO_CRITICAL, OTHER) of each row."""

    def __init__(self, model=None):
        self.model = model

    def fit(self, X=None, y=None):
        check_model(self.model)
        self.classes_ = np.array(["H1", "H2", "H3", "H4", "H5", "NO_CRITICAL", "OTHER"])
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        X = check_rows(X, self.model)
        return np.array([classify(self.model.profile(x)).label for x in X])

    def geometries(self, X):
        """Full :class:`~nehari.fibering.GeometryClass` of each row."""
        X = check_rows(X, self.model)
        return [classify(self.model.profile(x)) for x in X]


class RayleighQuotient(TransformerMixin, BaseEstimator):
    """Nonlinear Rayleigh quotient of each row (``nan`` outside the admissible cone)."""

    def __init__(self, model=None):
        self.model = model

    def fit(self, X=None, y=None):
        self.spec_ = QuotientSpec(check_model(self.model))
        return self

    def transform(self, X):
        check_is_fitted(self, "spec_")
        X = check_rows(X, self.model)
        out = []
        for x in X:
            val, _ = quotient_and_grad(self.spec_, x)
            out.append(val if np.isfinite(val) else np.nan)
        return np.array(out).reshape(-1, 1)


class ExtremalParameter(BaseEstimator):
    """Infimum of the model's Rayleigh quotient over its admissible cone."""

    def __init__(self, model=None, seed=0, n_starts=20):
        self.model = model
        self.seed = seed
        self.n_starts = n_starts

    def fit(self, X=None, y=None):
        res = extremal_parameter(
            QuotientSpec(check_model(self.model)), seed=self.seed, n_starts=self.n_starts
        )
        self.value_ = res.value
        self.argmin_ = res.argmin
        self.oracle_gap_ = res.oracle_gap
        self.result_ = res
        return self


class NehariSolver(TransformerMixin, BaseEstimator):
    """Relative ground state (or second critical point) of ``model`` in ``cone``.

    ``fit`` runs the solver; ``transform`` projects rows onto the Nehari set
    with the same selection rule (rows without such a point become ``nan``).
    """

    def __init__(self, model=None, cone="Y1", seed=0, n_starts=6, tol=1e-6, second=False):
        self.model = model
        self.cone = cone
        self.seed = seed
        self.n_starts = n_starts
        self.tol = tol
        self.second = second

    def fit(self, X=None, y=None):
        model = check_model(self.model)
        kw = dict(seed=self.seed, n_starts=self.n_starts, tol=self.tol)
        if self.second:
            rep = second_solution_search(model, cone=self.cone, **kw)
        else:
            rep = minimize_relative_ground_state(model, self.cone, **kw)
        self.report_ = rep
        self.level_ = rep.level
        self.solution_ = rep.solution
        self.classification_ = rep.classification
        return self

    def transform(self, X):
        check_is_fitted(self, "report_")
        X = check_rows(X, self.model)
        mode = "last_max" if self.second else "auto"
        out = np.full_like(X, np.nan)
        for i, x in enumerate(X):
            try:
                out[i] = self.model.as_array(project_to_nehari(self.model, x, mode))
            except (GeometryError, InvalidInputError):
                continue
        return out
