"""Uniform Dirichlet grid on (0, 1) and the integrals every functional is built from.

Functions are stored by their values at the ``n`` interior nodes
``x_i = i h`` with ``h = 1 / (n + 1)``; boundary values are implicitly zero.
Integrals use node weight ``h`` and gradients use forward differences on the
``n + 1`` cells, so every power integral is exactly homogeneous in ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .exceptions import InvalidInputError

__all__ = [
    "Grid1D",
    "GridFunction",
    "PairGridFunction",
    "integrate_power",
    "integrate_weighted_power",
    "seminorm_power",
    "seminorm_gradient",
    "power_sum",
    "power_sum_grad",
    "diff_power_sum",
    "diff_power_grad",
    "StiffnessPreconditioner",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with ``n`` interior nodes on (0, 1)."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidInputError(f"grid needs an integer n >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return 1.0 / (self.n + 1)

    @property
    def x(self) -> np.ndarray:
        return np.arange(1, self.n + 1) * self.h

    def sample(self, f) -> "GridFunction":
        """Nodal samples of a callable ``f(x)``."""
        return GridFunction(self, np.asarray(f(self.x), dtype=float))

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.n))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Interior node values of a function vanishing at 0 and 1."""

    grid: Grid1D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise InvalidInputError(
                f"expected {self.grid.n} nodal values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("grid function has non-finite values")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __mul__(self, t):
        return GridFunction(self.grid, float(t) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __add__(self, other):
        _same_grid(self, other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return GridFunction(self.grid, self.values - other.values)

    def dot(self, other) -> float:
        """Euclidean product of the nodal vectors (no quadrature weight)."""
        _same_grid(self, other)
        return float(self.values @ other.values)

    def with_boundary(self):
        """Return ``(x, u)`` including the two zero boundary nodes."""
        x = np.concatenate(([0.0], self.grid.x, [1.0]))
        return x, np.concatenate(([0.0], self.values, [0.0]))


@dataclass(frozen=True, eq=False)
class PairGridFunction:
    """A pair ``(u, v)`` of grid functions on a shared grid."""

    u: GridFunction
    v: GridFunction

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise InvalidInputError("pair components live on different grids")

    @property
    def grid(self) -> Grid1D:
        return self.u.grid

    @property
    def values(self) -> np.ndarray:
        return np.concatenate((self.u.values, self.v.values))

    @classmethod
    def from_flat(cls, grid: Grid1D, x) -> "PairGridFunction":
        x = np.asarray(x, dtype=float)
        return cls(GridFunction(grid, x[: grid.n]), GridFunction(grid, x[grid.n :]))

    def __mul__(self, t):
        return PairGridFunction(self.u * t, self.v * t)

    __rmul__ = __mul__

    def __neg__(self):
        return PairGridFunction(-self.u, -self.v)


def _same_grid(u, v):
    if not isinstance(v, GridFunction) or u.grid != v.grid:
        raise InvalidInputError("grid functions live on different grids")


# -- array-level kernels -----------------------------------------------------
# Shared with the energy models, which work on raw nodal vectors.


def power_sum(u: np.ndarray, h: float, s: float, w=None) -> float:
    """``sum_i h w_i |u_i|^s``."""
    a = np.abs(u) ** s
    if w is not None:
        a = w * a
    return h * float(a.sum())


def power_sum_grad(u: np.ndarray, h: float, s: float, w=None) -> np.ndarray:
    """Gradient of :func:`power_sum` with respect to the nodal values."""
    g = (h * s) * np.abs(u) ** (s - 1.0) * np.sign(u)
    if w is not None:
        g = w * g
    return g


def _differences(u: np.ndarray, h: float) -> np.ndarray:
    d = np.empty(u.size + 1)
    d[0] = u[0]
    d[1:-1] = np.diff(u)
    d[-1] = -u[-1]
    return d / h


def diff_power_sum(u: np.ndarray, h: float, s: float) -> float:
    """``sum_{cells} h |(u_{i+1} - u_i) / h|^s`` with zero boundary values."""
    return h * float((np.abs(_differences(u, h)) ** s).sum())


def diff_power_grad(u: np.ndarray, h: float, s: float) -> np.ndarray:
    """Gradient of :func:`diff_power_sum`; ``s * (psi(D_{i-1}) - psi(D_i))``."""
    d = _differences(u, h)
    psi = np.abs(d) ** (s - 1.0) * np.sign(d)
    return s * (psi[:-1] - psi[1:])


# -- public operations on GridFunction ---------------------------------------


def _values(u) -> np.ndarray:
    if not isinstance(u, GridFunction):
        raise InvalidInputError(f"expected a GridFunction, got {type(u).__name__}")
    return u.values


def integrate_power(u: GridFunction, s: float) -> float:
    """Approximate ``int_0^1 |u|^s``."""
    if s < 1:
        raise InvalidInputError(f"integrate_power needs s >= 1, got {s}")
    return power_sum(_values(u), u.grid.h, s)


def integrate_weighted_power(u: GridFunction, b, s: float) -> float:
    """Approximate ``int_0^1 b |u|^s``; ``b`` may change sign."""
    if s < 1:
        raise InvalidInputError(f"integrate_weighted_power needs s >= 1, got {s}")
    vals = _values(u)
    if isinstance(b, GridFunction):
        if b.grid != u.grid:
            raise InvalidInputError("weight and function live on different grids")
        w = b.values
    else:
        w = np.asarray(b, dtype=float)
        if w.ndim == 0:
            w = np.full(vals.shape, float(w))
        if w.shape != vals.shape:
            raise InvalidInputError(
                f"weight has shape {w.shape}, expected {vals.shape}"
            )
    return power_sum(vals, u.grid.h, s, w)


def seminorm_power(u: GridFunction, s: float) -> float:
    """Approximate ``int_0^1 |u'|^s``."""
    if s <= 1:
        raise InvalidInputError(f"seminorm_power needs s > 1, got {s}")
    return diff_power_sum(_values(u), u.grid.h, s)


def seminorm_gradient(u: GridFunction, s: float) -> GridFunction:
    """Nodal gradient of :func:`seminorm_power`."""
    if s <= 1:
        raise InvalidInputError(f"seminorm_gradient is unsupported for s <= 1 (s={s})")
    return GridFunction(u.grid, diff_power_grad(_values(u), u.grid.h, s))


class StiffnessPreconditioner:
    """Inverse of the discrete Dirichlet Laplacian ``K = h * (-D^2)``.

    ``K`` is half the Hessian of ``diff_power_sum(., h, 2)``; applying ``K^{-1}``
    to a nodal gradient gives the H^1_0 (Sobolev) gradient, which keeps descent
    step sizes independent of the mesh. ``blocks`` > 1 applies ``K`` blockwise
    to stacked components such as ``(u, v)``.
    """

    def __init__(self, grid: Grid1D, blocks: int = 1):
        self.grid = grid
        self.blocks = blocks
        n, h = grid.n, grid.h
        ab = np.empty((2, n))
        ab[0, :] = -1.0 / h
        ab[1, :] = 2.0 / h
        self._chol = cholesky_banded(ab)

    def _split(self, x):
        return x.reshape(self.blocks, self.grid.n)

    def solve(self, g: np.ndarray) -> np.ndarray:
        out = cho_solve_banded((self._chol, False), self._split(g).T)
        return out.T.reshape(-1)

    def apply(self, x: np.ndarray) -> np.ndarray:
        h = self.grid.h
        y = self._split(x)
        out = 2.0 * y
        out[:, 1:] -= y[:, :-1]
        out[:, :-1] -= y[:, 1:]
        return (out / h).reshape(-1)

    def norm(self, x: np.ndarray) -> float:
        return float(np.sqrt(max(x @ self.apply(x), 0.0)))
