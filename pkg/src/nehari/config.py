"""Run configuration: a YAML document plus command-line overrides.

Schema (all keys optional except ``family`` for model-based commands)::

    family: concave_convex        # see nehari.energy.FAMILIES
    params:                       # family parameters; may also sit at top level
      p: 2
      q: 1.5
      r: 4
      lam: 1.0
      a: {constant: 1}            # weight: number, "sin", "sign_change(0.5)",
      b: sin                      #   "bump(0.5, 0.2)", {file: path}, {name: ..}
    grid_n: 255
    seed: 0
    tol: 1.0e-6
    solve:     {cone: Y1, second: false, n_starts: 6}
    eigen:     {kind: p, p: 2}
    threshold: {kind: beta_star, value: 500, p: 6, q: 2}
    extremal:  {n_starts: 20}
    fibering:  {terms: [[0.25, 4], [-0.05, 2]]}
    sweep:     {key: lam, lo: 1, hi: 10, steps: 5, task: solve}
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .energy import EnergyModel, make_model
from .exceptions import InvalidInputError

__all__ = ["RunConfig", "parse_config", "SECTIONS"]

SECTIONS = ("solve", "eigen", "threshold", "extremal", "fibering", "sweep")
_TOP = {"family", "params", "grid_n", "seed", "tol", *SECTIONS}
_ALIASES = {"lambda": "lam", "λ": "lam", "μ": "mu", "α": "alpha", "β": "beta"}


@dataclass
class RunConfig:
    family: str | None = None
    params: dict = field(default_factory=dict)
    grid_n: int = 255
    seed: int = 0
    tol: float = 1e-6
    options: dict = field(default_factory=dict)
    source: str | None = None

    def model(self, **overrides) -> EnergyModel:
        if self.family is None:
            raise InvalidInputError("this command needs a 'family' in the config")
        params = {**self.params, **overrides}
        return make_model(self.family, n=self.grid_n, **params)

    def section(self, name: str) -> dict:
        return dict(self.options.get(name) or {})

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "params": copy.deepcopy(self.params),
            "grid_n": self.grid_n,
            "seed": self.seed,
            "tol": self.tol,
            "options": copy.deepcopy(self.options),
            "source": self.source,
        }


def _load_yaml(path):
    p = Path(path)
    if not p.exists():
        raise InvalidInputError(f"config file {path!r} does not exist")
    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise InvalidInputError(f"cannot parse {path}{where}: {problem}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise InvalidInputError(f"{path}: top level must be a mapping of keys")
    return data


def _canonical_params(params: dict) -> dict:
    return {_ALIASES.get(k, k): v for k, v in params.items()}


def _typed(name, value, kind):
    try:
        out = kind(value)
    except (TypeError, ValueError):
        raise InvalidInputError(f"'{name}' must be {kind.__name__}, got {value!r}") from None
    if kind is int and out != float(value):
        raise InvalidInputError(f"'{name}' must be an integer, got {value!r}")
    return out


def parse_config(path=None, overrides: dict | None = None, params: dict | None = None) -> RunConfig:
    """Read ``path`` (optional), apply ``overrides`` then ``params`` and validate.

    ``overrides`` holds top-level keys (``grid_n``, ``seed``, ``tol``, ``family``
    or a section); ``params`` holds family parameters. When a family is set the
    model is built once so ordering violations are reported before any work.
    """
    data = _load_yaml(path) if path is not None else {}
    for k, v in (overrides or {}).items():
        if v is not None:
            data[k] = v
    inline = {k: v for k, v in data.items() if k not in _TOP}
    nested = data.get("params") or {}
    if not isinstance(nested, dict):
        raise InvalidInputError("'params' must be a mapping")
    merged = _canonical_params({**inline, **nested, **(params or {})})
    family = data.get("family")
    if family is not None and not isinstance(family, str):
        raise InvalidInputError("'family' must be a string")
    options = {}
    for name in SECTIONS:
        sec = data.get(name)
        if sec is not None and not isinstance(sec, dict):
            raise InvalidInputError(f"section '{name}' must be a mapping")
        if sec:
            options[name] = dict(sec)
    cfg = RunConfig(
        family=family,
        params=merged,
        grid_n=_typed("grid_n", data.get("grid_n", 255), int),
        seed=_typed("seed", data.get("seed", 0), int),
        tol=_typed("tol", data.get("tol", 1e-6), float),
        options=options,
        source=None if path is None else str(path),
    )
    if cfg.grid_n < 2:
        raise InvalidInputError(f"grid_n must be >= 2, got {cfg.grid_n}")
    if not cfg.tol > 0:
        raise InvalidInputError(f"tol must be positive, got {cfg.tol}")
    if family is not None:
        cfg.model()
    elif merged:
        raise InvalidInputError(
            f"parameters {sorted(merged)} given without a 'family'"
        )
    return cfg
