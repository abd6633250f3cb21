"""Weight functions ``a(x)``, ``b(x)`` sampled at the grid nodes.

Accepted specs: a number (constant), an array of ``n`` nodal values, a name
``"sin"``, ``"sign_change(x0)"``, ``"bump(x0, w)"``, ``"constant(c)"`` (also
``"constant c"``), or a
mapping ``{"name": ..., **args}`` / ``{"constant": c}`` / ``{"file": path}``
as written in run configs.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .exceptions import InvalidInputError
from .grid import Grid1D

__all__ = ["resolve_weight", "named_weight"]

_ARG_NAMES = {"constant": ("c",), "sin": (), "sign_change": ("x0",), "bump": ("x0", "w")}
_CALL = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def named_weight(name: str, x: np.ndarray, *args: float) -> np.ndarray:
    if name == "constant":
        (c,) = args or (1.0,)
        return np.full_like(x, float(c))
    if name == "sin":
        return np.sin(np.pi * x)
    if name == "sign_change":
        (x0,) = args or (0.5,)
        return np.where(x < x0, 1.0, np.where(x > x0, -1.0, 0.0))
    if name == "bump":
        x0, w = args if args else (0.5, 0.25)
        z = (x - x0) / w
        return np.where(np.abs(z) < 1, np.cos(0.5 * np.pi * z) ** 2, 0.0)
    raise InvalidInputError(
        f"unknown weight {name!r}; use constant, sin, sign_change(x0) or bump(x0, w)"
    )


def _load_file(path, n):
    p = Path(path)
    if not p.exists():
        raise InvalidInputError(f"weight file {path!r} does not exist")
    vals = np.loadtxt(p, delimiter="," if p.suffix == ".csv" else None, ndmin=1)
    if vals.ndim == 2:
        vals = vals[:, -1]
    if vals.shape != (n,):
        raise InvalidInputError(
            f"weight file {path!r} has {vals.size} values, expected n = {n}"
        )
    return vals


def resolve_weight(spec, grid: Grid1D) -> np.ndarray:
    """Nodal samples of a weight spec on ``grid`` (always a fresh float array)."""
    x = grid.x
    if isinstance(spec, dict):
        spec = dict(spec)
        if "file" in spec:
            vals = _load_file(spec["file"], grid.n)
        elif "constant" in spec:
            vals = named_weight("constant", x, spec["constant"])
        elif "name" in spec:
            name = spec.pop("name")
            keys = _ARG_NAMES.get(name, ())
            unknown = set(spec) - set(keys)
            if unknown:
                raise InvalidInputError(
                    f"weight {name!r} does not take {sorted(unknown)}; arguments: {list(keys)}"
                )
            vals = named_weight(name, x, *[float(spec[k]) for k in keys if k in spec])
        else:
            raise InvalidInputError(f"cannot read weight spec {spec!r}")
    elif isinstance(spec, str):
        parts = spec.split()
        if len(parts) == 2 and parts[0] == "constant":
            spec = f"constant({parts[1]})"
        try:
            return resolve_weight(float(spec), grid)
        except ValueError:
            pass
        m = _CALL.match(spec)
        if not m:
            raise InvalidInputError(f"cannot parse weight {spec!r}")
        args = [float(a) for a in m.group(2).split(",")] if m.group(2) else []
        vals = named_weight(m.group(1), x, *args)
    elif np.isscalar(spec):
        vals = np.full(grid.n, float(spec))
    else:
        vals = np.array(spec, dtype=float)
        if vals.shape != (grid.n,):
            raise InvalidInputError(
                f"weight has {vals.size} values, expected n = {grid.n}"
            )
    if not np.all(np.isfinite(vals)):
        raise InvalidInputError("weight has non-finite values")
    return np.array(vals, dtype=float)
