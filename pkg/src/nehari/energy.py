"""Model energy functionals on the discrete interval.

Each family is a finite sum of homogeneous pieces,

    Phi(u) = sum_k H_k(u) / d_k,    H_k(t u) = t^{d_k} H_k(u),

so that ``Phi(t u) = sum_k (H_k(u) / d_k) t^{d_k}`` (the fibering profile) and
``J(u) = Phi'(u) u = sum_k H_k(u)`` by Euler's identity. The families only
differ in which pieces they assemble; evaluation, Nehari residual, gradient,
profile and Hessian are shared.

Notation used below (all discrete, see :mod:`nehari.grid`)::

    A_s(u)    = int |u'|^s          seminorm_power
    W_s(u; w) = int w |u|^s         integrate_weighted_power

Every model is a scikit-learn estimator (``get_params`` / ``set_params`` /
``clone``) whose constructor arguments are the family parameters plus the
grid size ``n``. Parameters are validated at construction and on every
``set_params``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import InvalidInputError
from .fibering import FiberingProfile
from .grid import (
    Grid1D,
    GridFunction,
    PairGridFunction,
    diff_power_grad,
    diff_power_sum,
    power_sum,
    power_sum_grad,
)
from .weights import resolve_weight

__all__ = [
    "EnergyModel",
    "Superlinear",
    "PQEigen",
    "PQConvex",
    "PQConcave",
    "ConcaveConvex",
    "Kirchhoff",
    "GradientSystem",
    "GeneralizedQuasi",
    "GeneralKirchhoff",
    "ConeReport",
    "FAMILIES",
    "make_model",
    "evaluate",
    "nehari_residual",
    "gradient",
    "fibering_profile",
    "cone_membership",
]


@dataclass(frozen=True)
class ConeReport:
    """Position of ``u`` relative to the model's two cones.

    ``Yk_value`` is the defining functional divided by ``||u||^degree`` so
    the report is the same for ``u`` and ``t u``; ``in_Yk`` is ``Yk_value < 0``.
    """

    in_Y1: bool
    in_Y2: bool
    Y1_value: float
    Y2_value: float

    def to_dict(self):
        return {
            "in_Y1": self.in_Y1,
            "in_Y2": self.in_Y2,
            "Y1_value": self.Y1_value,
            "Y2_value": self.Y2_value,
        }


# -- homogeneous building blocks ----------------------------------------------
# Each returns (value, gradient or None, hessian or None) for ``order`` 0/1/2.


def _diff_matrix(n, h):
    B = np.zeros((n + 1, n))
    idx = np.arange(n)
    B[idx, idx] = 1.0
    B[idx + 1, idx] = -1.0
    return B / h


def _seminorm(x, h, s, order):
    val = diff_power_sum(x, h, s)
    g = diff_power_grad(x, h, s) if order >= 1 else None
    H = None
    if order >= 2:
        B = _diff_matrix(x.size, h)
        d = B @ x
        H = (h * s * (s - 1.0)) * (B.T * np.abs(d) ** (s - 2.0)) @ B
    return val, g, H


def _power(x, h, s, w, order):
    val = power_sum(x, h, s, w)
    g = power_sum_grad(x, h, s, w) if order >= 1 else None
    H = np.diag(h * s * (s - 1.0) * w * np.abs(x) ** (s - 2.0)) if order >= 2 else None
    return val, g, H


def _square(piece, order):
    val, g, H = piece
    return (
        val * val,
        2.0 * val * g if order >= 1 else None,
        2.0 * np.outer(g, g) + 2.0 * val * H if order >= 2 else None,
    )


def _combine(order, *terms):
    """Linear combination of ``(coef, piece)`` pairs."""
    val = sum(c * p[0] for c, p in terms)
    g = sum(c * p[1] for c, p in terms) if order >= 1 else None
    H = sum(c * p[2] for c, p in terms) if order >= 2 else None
    return float(val), g, H


def _embed(piece, n, block, order):
    """Lift a piece of one component of a pair to the stacked vector."""
    val, g, H = piece
    G = Hf = None
    sl = slice(block * n, (block + 1) * n)
    if order >= 1:
        G = np.zeros(2 * n)
        G[sl] = g
    if order >= 2:
        Hf = np.zeros((2 * n, 2 * n))
        Hf[sl, sl] = H
    return val, G, Hf


def _check_exponent(name, value, lo=1.0):
    if not np.isfinite(value) or value <= lo:
        raise InvalidInputError(f"{name} must be a finite number > {lo}, got {value}")


class EnergyModel(BaseEstimator):
    """Common machinery; subclasses define ``_pieces`` and ``_cones``."""

    family = "base"
    is_pair = False
    _rule = ""
    # exponents whose second derivatives are needed for an exact Hessian
    _exponent_names: tuple = ()
    # parameter multiplied into the piece used by the Rayleigh quotients
    lambda_param: str | None = None
    # families whose second cone is a placeholder that is always empty
    single_cone = False

    def _post_init(self):
        self._validate()

    def set_params(self, **params):
        super().set_params(**params)
        self._validate()
        return self

    def _validate(self):
        self.grid_ = Grid1D(self.n)
        self._weights = {}

    def _weight(self, name, spec, nonneg=False):
        w = resolve_weight(spec, self.grid_)
        if nonneg and np.any(w < 0):
            raise InvalidInputError(f"{type(self).__name__} requires {name} >= 0")
        self._weights[name] = w
        return w

    def _fail(self):
        raise InvalidInputError(f"{type(self).__name__} requires {self._rule}")

    # -- shape helpers ---------------------------------------------------------

    @property
    def grid(self) -> Grid1D:
        return self.grid_

    @property
    def size(self) -> int:
        return self.grid_.n * (2 if self.is_pair else 1)

    @property
    def norm_exponent(self) -> float:
        """Exponent ``p`` of the norm ``||u|| = A_p(u)^{1/p}``."""
        return 2.0

    def as_array(self, u) -> np.ndarray:
        if isinstance(u, (GridFunction, PairGridFunction)):
            if self.is_pair != isinstance(u, PairGridFunction):
                raise InvalidInputError(
                    f"{type(self).__name__} expects a "
                    f"{'pair' if self.is_pair else 'single'} grid function"
                )
            if u.grid != self.grid_:
                raise InvalidInputError("function and model live on different grids")
            return u.values
        x = np.asarray(u, dtype=float)
        if x.shape != (self.size,):
            raise InvalidInputError(f"expected {self.size} values, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("input has non-finite values")
        return x

    def wrap(self, x):
        if self.is_pair:
            return PairGridFunction.from_flat(self.grid_, x)
        return GridFunction(self.grid_, x)

    def norm(self, x) -> float:
        x = self.as_array(x)
        h, p = self.grid_.h, self.norm_exponent
        if self.is_pair:
            n = self.grid_.n
            return float(np.sqrt(diff_power_sum(x[:n], h, 2) + diff_power_sum(x[n:], h, 2)))
        return diff_power_sum(x, h, p) ** (1.0 / p)

    @property
    def has_hessian(self) -> bool:
        """All exponents >= 2, so ``Phi`` is C^2 everywhere."""
        return all(float(getattr(self, k)) >= 2.0 for k in self._exponent_names)

    # -- core evaluation -----------------------------------------------------

    def _pieces(self, x, order):  # pragma: no cover - abstract
        raise NotImplementedError

    def pieces(self, x, order=0):
        """List of ``(degree, H, grad H, hess H)`` for the array ``x``."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return [(float(d), *piece) for d, piece in self._pieces(x, order)]

    def energy(self, x) -> float:
        return float(sum(v / d for d, v, _, _ in self.pieces(x)))

    def nehari(self, x) -> float:
        return float(sum(v for _, v, _, _ in self.pieces(x)))

    def energy_and_grad(self, x):
        ps = self.pieces(x, 1)
        return float(sum(v / d for d, v, _, _ in ps)), sum(g / d for d, _, g, _ in ps)

    def grad(self, x) -> np.ndarray:
        return self.energy_and_grad(x)[1]

    def hessian(self, x) -> np.ndarray:
        """Dense Hessian of ``Phi`` at ``x``.

        Exponents below 2 make ``Phi`` only C^1 where ``u`` or ``u'`` vanish;
        there the Hessian does not exist and an error is raised.
        """
        H = sum(H / d for d, _, _, H in self.pieces(x, 2))
        if not np.all(np.isfinite(H)):
            raise InvalidInputError("Hessian does not exist at this point")
        return H

    def profile(self, x) -> FiberingProfile:
        if not np.any(x):
            raise InvalidInputError("fibering profile needs u != 0")
        return FiberingProfile([(v / d, d) for d, v, _, _ in self.pieces(x)])

    def _cones(self, x):
        """``((Y1 functional, degree), (Y2 functional, degree))``; in cone iff < 0."""
        raise NotImplementedError  # pragma: no cover

    def cones(self, x) -> ConeReport:
        if not np.any(x):
            raise InvalidInputError("cone membership needs u != 0")
        nrm = self.norm(x)
        (y1, d1), (y2, d2) = self._cones(x)
        y1 = float(y1) / nrm**d1
        y2 = float(y2) / nrm**d2
        return ConeReport(bool(y1 < 0), bool(y2 < 0), y1, y2)

    def cone_value(self, x, cone):
        """Normalized defining functional of ``cone`` in {"Y1", "Y2"}."""
        rep = self.cones(x)
        return rep.Y1_value if cone == "Y1" else rep.Y2_value

    def in_cone(self, x, cone) -> bool:
        if cone == "whole":
            return bool(np.any(x))
        if cone not in ("Y1", "Y2"):
            raise InvalidInputError(f"unknown cone {cone!r}; use Y1, Y2 or whole")
        return self.cone_value(x, cone) < 0

    def describe(self) -> dict:
        """Family name and parameters in plain (JSON-ready) form."""
        out = {"family": self.family}
        for k, v in self.get_params().items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


class Superlinear(EnergyModel):
    """``Phi(u) = 1/2 int |u'|^2 - 1/r int b |u|^r`` with ``2 < r``."""

    single_cone = True
    family = "superlinear"
    _rule = "2 < r"
    _exponent_names = ("r",)

    def __init__(self, n=255, r=4.0, b=1.0):
        self.n = n
        self.r = r
        self.b = b
        self._post_init()

    def _validate(self):
        super()._validate()
        _check_exponent("r", self.r)
        if not self.r > 2:
            self._fail()
        self._weight("b", self.b)

    def _pieces(self, x, order):
        h = self.grid_.h
        return [
            (2, _seminorm(x, h, 2, order)),
            (self.r, _combine(order, (-1.0, _power(x, h, self.r, self._weights["b"], order)))),
        ]

    def _cones(self, x):
        h = self.grid_.h
        return (
            (-power_sum(x, h, self.r, self._weights["b"]), self.r),
            (diff_power_sum(x, h, 2), 2),
        )


class PQEigen(EnergyModel):
    """(p,q)-Laplacian eigenvalue problem energy.

    ``Phi = 1/p int(|u'|^p - alpha|u|^p) + 1/q int(|u'|^q - beta|u|^q)``,
    ``1 < q < p``. Cones: ``Y1 = {A_p < alpha W_p}``, ``Y2 = {A_q < beta W_q}``.
    """

    family = "pq_eigen"
    _rule = "1 < q < p"
    _exponent_names = ("p", "q")

    def __init__(self, n=255, p=4.0, q=2.0, alpha=1.0, beta=1.0):
        self.n = n
        self.p = p
        self.q = q
        self.alpha = alpha
        self.beta = beta
        self._post_init()

    @property
    def norm_exponent(self):
        return float(self.p)

    def _validate(self):
        super()._validate()
        _check_exponent("p", self.p)
        _check_exponent("q", self.q)
        if not 1 < self.q < self.p:
            self._fail()
        for k in ("alpha", "beta"):
            if not np.isfinite(getattr(self, k)):
                raise InvalidInputError(f"{k} must be finite")

    def _pieces(self, x, order):
        h, one = self.grid_.h, 1.0
        p, q = self.p, self.q
        return [
            (p, _combine(order, (1.0, _seminorm(x, h, p, order)), (-self.alpha, _power(x, h, p, one, order)))),
            (q, _combine(order, (1.0, _seminorm(x, h, q, order)), (-self.beta, _power(x, h, q, one, order)))),
        ]

    def _cones(self, x):
        h = self.grid_.h
        p, q = self.p, self.q
        return (
            (diff_power_sum(x, h, p) - self.alpha * power_sum(x, h, p), p),
            (diff_power_sum(x, h, q) - self.beta * power_sum(x, h, q), q),
        )


class PQConvex(EnergyModel):
    """``-Delta_p u - Delta_q u = lam |u|^{q-2}u + b|u|^{r-2}u``, ``1 < q < p < r``.

    ``Phi = A_p/p + (A_q - lam W_q)/q - W_r(b)/r``;
    ``Y1 = {A_q < lam W_q}``, ``Y2 = {W_r(b) > 0}``.
    """

    family = "pq_convex"
    _rule = "1 < q < p < r"
    _exponent_names = ("p", "q", "r")
    lambda_param = "lam"

    def __init__(self, n=255, p=4.0, q=2.0, r=6.0, lam=1.0, b=1.0):
        self.n = n
        self.p = p
        self.q = q
        self.r = r
        self.lam = lam
        self.b = b
        self._post_init()

    @property
    def norm_exponent(self):
        return float(self.p)

    def _validate(self):
        super()._validate()
        for k in ("p", "q", "r"):
            _check_exponent(k, getattr(self, k))
        if not 1 < self.q < self.p < self.r:
            self._fail()
        if not np.isfinite(self.lam):
            raise InvalidInputError("lam must be finite")
        self._weight("b", self.b)

    def _pieces(self, x, order):
        h, one, b = self.grid_.h, 1.0, self._weights["b"]
        return [
            (self.p, _seminorm(x, h, self.p, order)),
            (self.q, _combine(order, (1.0, _seminorm(x, h, self.q, order)), (-self.lam, _power(x, h, self.q, one, order)))),
            (self.r, _combine(order, (-1.0, _power(x, h, self.r, b, order)))),
        ]

    def _cones(self, x):
        h = self.grid_.h
        return (
            (diff_power_sum(x, h, self.q) - self.lam * power_sum(x, h, self.q), self.q),
            (-power_sum(x, h, self.r, self._weights["b"]), self.r),
        )


class PQConcave(EnergyModel):
    """``-Delta_p u - Delta_q u = lam |u|^{p-2}u + b|u|^{r-2}u``, ``1 < r < q < p``.

    ``Phi = (A_p - lam W_p)/p + A_q/q - W_r(b)/r``;
    ``Y1 = {W_r(b) > 0}``, ``Y2 = {A_p < lam W_p}``.
    """

    family = "pq_concave"
    _rule = "1 < r < q < p"
    _exponent_names = ("p", "q", "r")
    lambda_param = "lam"

    def __init__(self, n=255, p=4.0, q=3.0, r=1.5, lam=1.0, b=1.0):
        self.n = n
        self.p = p
        self.q = q
        self.r = r
        self.lam = lam
        self.b = b
        self._post_init()

    @property
    def norm_exponent(self):
        return float(self.p)

    def _validate(self):
        super()._validate()
        for k in ("p", "q", "r"):
            _check_exponent(k, getattr(self, k))
        if not 1 < self.r < self.q < self.p:
            self._fail()
        if not np.isfinite(self.lam):
            raise InvalidInputError("lam must be finite")
        self._weight("b", self.b)

    def _pieces(self, x, order):
        h, one, b = self.grid_.h, 1.0, self._weights["b"]
        return [
            (self.p, _combine(order, (1.0, _seminorm(x, h, self.p, order)), (-self.lam, _power(x, h, self.p, one, order)))),
            (self.q, _seminorm(x, h, self.q, order)),
            (self.r, _combine(order, (-1.0, _power(x, h, self.r, b, order)))),
        ]

    def _cones(self, x):
        h = self.grid_.h
        return (
            (-power_sum(x, h, self.r, self._weights["b"]), self.r),
            (diff_power_sum(x, h, self.p) - self.lam * power_sum(x, h, self.p), self.p),
        )


class ConcaveConvex(EnergyModel):
    """``Phi = ||u||^p/p - lam/q int a|u|^q - 1/r int b|u|^r``, ``1 < q < p < r``.

    ``Y1 = {int a|u|^q > 0}``, ``Y2 = {int b|u|^r > 0}`` (``lam > 0``).
    """

    family = "concave_convex"
    _rule = "1 < q < p < r and lam > 0"
    _exponent_names = ("p", "q", "r")
    lambda_param = "lam"

    def __init__(self, n=255, p=2.0, q=1.5, r=4.0, lam=1.0, a=1.0, b=1.0):
        self.n = n
        self.p = p
        self.q = q
        self.r = r
        self.lam = lam
        self.a = a
        self.b = b
        self._post_init()

    @property
    def norm_exponent(self):
        return float(self.p)

    def _validate(self):
        super()._validate()
        for k in ("p", "q", "r"):
            _check_exponent(k, getattr(self, k))
        if not (1 < self.q < self.p < self.r) or not (np.isfinite(self.lam) and self.lam > 0):
            self._fail()
        self._weight("a", self.a)
        self._weight("b", self.b)

    def _pieces(self, x, order):
        h, a, b = self.grid_.h, self._weights["a"], self._weights["b"]
        return [
            (self.p, _seminorm(x, h, self.p, order)),
            (self.q, _combine(order, (-self.lam, _power(x, h, self.q, a, order)))),
            (self.r, _combine(order, (-1.0, _power(x, h, self.r, b, order)))),
        ]

    def _cones(self, x):
        h = self.grid_.h
        return (
            (-self.lam * power_sum(x, h, self.q, self._weights["a"]), self.q),
            (-power_sum(x, h, self.r, self._weights["b"]), self.r),
        )


class Kirchhoff(EnergyModel):
    """``Phi = 1/2 (a A - lam W_2) + 1/4 (b A^2 - mu W_4)`` with ``A = A_2``.

    ``Y1 = {b A^2 < mu W_4}``, ``Y2 = {a A < lam W_2}``.
    """

    family = "kirchhoff"
    _rule = "a > 0 and b > 0"
    lambda_param = "lam"

    def __init__(self, n=255, a=1.0, b=1.0, lam=1.0, mu=1.0):
        self.n = n
        self.a = a
        self.b = b
        self.lam = lam
        self.mu = mu
        self._post_init()

    def _validate(self):
        super()._validate()
        if not (self.a > 0 and self.b > 0 and np.isfinite(self.a) and np.isfinite(self.b)):
            self._fail()
        for k in ("lam", "mu"):
            if not np.isfinite(getattr(self, k)):
                raise InvalidInputError(f"{k} must be finite")

    def _pieces(self, x, order):
        h, one = self.grid_.h, 1.0
        A = _seminorm(x, h, 2, order)
        return [
            (2, _combine(order, (self.a, A), (-self.lam, _power(x, h, 2, one, order)))),
            (4, _combine(order, (self.b, _square(A, order)), (-self.mu, _power(x, h, 4, one, order)))),
        ]

    def _cones(self, x):
        h = self.grid_.h
        A = diff_power_sum(x, h, 2)
        return (
            (self.b * A * A - self.mu * power_sum(x, h, 4), 4),
            (self.a * A - self.lam * power_sum(x, h, 2), 2),
        )


class GradientSystem(EnergyModel):
    """Coupled system on pairs ``x = (u, v)``, ``2 < q < r``.

    ``Phi = 1/2 (A(u) + A(v) - 2 lam int uv) + 1/q int |v|^q - 1/r int b|u|^r``.
    ``Y1 = {A(u) + A(v) < 2 lam int uv}``, ``Y2 = {int b|u|^r > 0}``.
    """

    family = "gradient_system"
    is_pair = True
    _rule = "2 < q < r"
    _exponent_names = ("q", "r")
    lambda_param = "lam"

    def __init__(self, n=255, q=3.0, r=4.0, lam=1.0, b=1.0):
        self.n = n
        self.q = q
        self.r = r
        self.lam = lam
        self.b = b
        self._post_init()

    def _validate(self):
        super()._validate()
        for k in ("q", "r"):
            _check_exponent(k, getattr(self, k))
        if not 2 < self.q < self.r:
            self._fail()
        if not np.isfinite(self.lam):
            raise InvalidInputError("lam must be finite")
        self._weight("b", self.b)

    def _coupling(self, x, order):
        n, h = self.grid_.n, self.grid_.h
        u, v = x[:n], x[n:]
        val = h * float(u @ v)
        g = h * np.concatenate((v, u)) if order >= 1 else None
        H = None
        if order >= 2:
            H = np.zeros((2 * n, 2 * n))
            idx = np.arange(n)
            H[idx, idx + n] = h
            H[idx + n, idx] = h
        return val, g, H

    def _pieces(self, x, order):
        n, h, b = self.grid_.n, self.grid_.h, self._weights["b"]
        u, v = x[:n], x[n:]
        quad = _combine(
            order,
            (1.0, _embed(_seminorm(u, h, 2, order), n, 0, order)),
            (1.0, _embed(_seminorm(v, h, 2, order), n, 1, order)),
            (-2.0 * self.lam, self._coupling(x, order)),
        )
        return [
            (2, quad),
            (self.q, _embed(_power(v, h, self.q, 1.0, order), n, 1, order)),
            (self.r, _combine(order, (-1.0, _embed(_power(u, h, self.r, b, order), n, 0, order)))),
        ]

    def _cones(self, x):
        n, h = self.grid_.n, self.grid_.h
        u, v = x[:n], x[n:]
        quad = diff_power_sum(u, h, 2) + diff_power_sum(v, h, 2) - 2 * self.lam * h * float(u @ v)
        return (quad, 2), (-power_sum(u, h, self.r, self._weights["b"]), self.r)


class _TwoSidedNonlinearity:
    """Helpers for ``g(x, u) = b1|u|^{r1-2}u - b2|u|^{r2-2}u`` with ``b1 b2 = 0``."""

    def _check_nonlinearity(self):
        for k in ("r1", "r2"):
            _check_exponent(k, getattr(self, k))
        b1 = self._weight("b1", self.b1, nonneg=True)
        b2 = self._weight("b2", self.b2, nonneg=True)
        if np.any(b1 * b2 != 0):
            raise InvalidInputError(
                f"{type(self).__name__} requires b1 * b2 = 0 (disjoint supports)"
            )
        if not self.r1 >= self.r2:
            raise InvalidInputError(f"{type(self).__name__} requires r1 >= r2")

    def _nonlinear_pieces(self, x, order):
        h = self.grid_.h
        return [
            (self.r1, _combine(order, (-1.0, _power(x, h, self.r1, self._weights["b1"], order)))),
            (self.r2, _power(x, h, self.r2, self._weights["b2"], order)),
        ]

    def _nonlinear_cone(self, x):
        h, b1, b2 = self.grid_.h, self._weights["b1"], self._weights["b2"]
        if self.r1 == self.r2:
            return -power_sum(x, h, self.r1, b1 - b2), self.r1
        return -power_sum(x, h, self.r1, b1), self.r1


class GeneralizedQuasi(_TwoSidedNonlinearity, EnergyModel):
    """Generalized (p,q) operator with ``a(t) = 1 + t^{(q-p)/p}``.

    ``Phi = A_p/p + A_q/q - W_{r1}(b1)/r1 + W_{r2}(b2)/r2`` with
    ``1 < q <= p < r1`` and ``r1 >= r2``. ``Y1 = {int b1|u|^{r1} > 0}`` (with
    ``b1 - b2`` when ``r1 = r2``); ``Y2`` is empty since the operator part is
    positive.
    """

    single_cone = True
    family = "generalized_quasi"
    _rule = "1 < q <= p < r1"
    _exponent_names = ("p", "q", "r1", "r2")

    def __init__(self, n=255, p=2.0, q=1.5, r1=4.0, b1=1.0, r2=2.0, b2=0.0):
        self.n = n
        self.p = p
        self.q = q
        self.r1 = r1
        self.b1 = b1
        self.r2 = r2
        self.b2 = b2
        self._post_init()

    @property
    def norm_exponent(self):
        return float(self.p)

    def _validate(self):
        super()._validate()
        _check_exponent("p", self.p)
        _check_exponent("q", self.q)
        if not 1 < self.q <= self.p < self.r1:
            self._fail()
        self._check_nonlinearity()

    def _pieces(self, x, order):
        h = self.grid_.h
        return [
            (self.p, _seminorm(x, h, self.p, order)),
            (self.q, _seminorm(x, h, self.q, order)),
        ] + self._nonlinear_pieces(x, order)

    def _cones(self, x):
        h = self.grid_.h
        return self._nonlinear_cone(x), (diff_power_sum(x, h, self.p), self.p)


class GeneralKirchhoff(_TwoSidedNonlinearity, EnergyModel):
    """Kirchhoff operator ``M(t) = m0 + m1 t`` with a two-sided nonlinearity.

    ``Phi = m0 A/2 + m1 A^2/4 - W_{r1}(b1)/r1 + W_{r2}(b2)/r2`` with
    ``m0 > 0``, ``m1 > 0``, ``4 < r1 < 6``, ``r1 >= r2``. Cones as in
    :class:`GeneralizedQuasi`.
    """

    single_cone = True
    family = "general_kirchhoff"
    _rule = "m0 > 0, m1 > 0 and 4 < r1 < 6"
    _exponent_names = ("r1", "r2")

    def __init__(self, n=255, m0=1.0, m1=1.0, r1=5.0, b1=1.0, r2=2.0, b2=0.0):
        self.n = n
        self.m0 = m0
        self.m1 = m1
        self.r1 = r1
        self.b1 = b1
        self.r2 = r2
        self.b2 = b2
        self._post_init()

    def _validate(self):
        super()._validate()
        if not (self.m0 > 0 and self.m1 > 0 and 4 < self.r1 < 6):
            self._fail()
        if not (np.isfinite(self.m0) and np.isfinite(self.m1)):
            self._fail()
        self._check_nonlinearity()

    def _pieces(self, x, order):
        h = self.grid_.h
        A = _seminorm(x, h, 2, order)
        return [
            (2, _combine(order, (self.m0, A))),
            (4, _combine(order, (self.m1, _square(A, order)))),
        ] + self._nonlinear_pieces(x, order)

    def _cones(self, x):
        h = self.grid_.h
        return self._nonlinear_cone(x), (diff_power_sum(x, h, 2), 2)


FAMILIES = {
    cls.family: cls
    for cls in (
        Superlinear,
        PQEigen,
        PQConvex,
        PQConcave,
        ConcaveConvex,
        Kirchhoff,
        GradientSystem,
        GeneralizedQuasi,
        GeneralKirchhoff,
    )
}


def make_model(family: str, **params) -> EnergyModel:
    """Build a model from its family name (as used in run configs)."""
    key = family.lower().replace("-", "_")
    by_class = {cls.__name__.lower(): cls for cls in FAMILIES.values()}
    cls = FAMILIES.get(key) or by_class.get(key.replace("_", ""))
    if cls is None:
        raise InvalidInputError(
            f"unknown family {family!r}; choose from {', '.join(sorted(FAMILIES))}"
        )
    try:
        return cls(**params)
    except TypeError as exc:
        raise InvalidInputError(f"bad parameters for {cls.__name__}: {exc}") from None


# -- functional interface on grid functions ----------------------------------


def evaluate(model: EnergyModel, u) -> float:
    """``Phi(u)``."""
    return model.energy(model.as_array(u))


def nehari_residual(model: EnergyModel, u) -> float:
    """``J(u) = Phi'(u) u``."""
    return model.nehari(model.as_array(u))


def gradient(model: EnergyModel, u):
    """Nodal gradient of ``Phi`` (same type as ``u``)."""
    return model.wrap(model.grad(model.as_array(u)))


def fibering_profile(model: EnergyModel, u) -> FiberingProfile:
    """``t -> Phi(t u)`` as a sum of power terms."""
    return model.profile(model.as_array(u))


def cone_membership(model: EnergyModel, u) -> ConeReport:
    return model.cones(model.as_array(u))
