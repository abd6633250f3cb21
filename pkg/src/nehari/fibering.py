"""Generalized power maps ``phi(t) = sum_i c_i t^{d_i}`` on ``t > 0``.

Critical points are the positive roots of ``phi'(t) = sum_i c_i d_i t^{d_i - 1}``.
Writing ``t = e^s`` and dividing by ``t^{d_1 - 1}`` turns this into an
exponential sum ``G(s) = sum_i a_i exp(e_i s)`` with ``e_1 = 0 < e_2 < ...``.
Its derivative is again an exponential sum with one term fewer, so the roots
of ``G'`` (found recursively) split the line into intervals on which ``G`` is
monotone; each interval holds at most one root, located with Brent's method.
Outside explicit bounds one term dominates the rest, which closes the two
unbounded intervals. The count is exact, including pairs of nearby roots that
a sign scan on a fixed grid can step over.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .exceptions import InvalidInputError, NotFoundError

__all__ = [
    "FiberingProfile",
    "CriticalPoint",
    "GeometryClass",
    "critical_points",
    "classify",
    "first_min",
    "last_max",
    "TOL_DEGENERATE",
]

TOL_DEGENERATE = 1e-8
# |G| below this fraction of the sum of term magnitudes counts as zero
_TOL_TOUCH = 1e-13


@dataclass(frozen=True)
class FiberingProfile:
    """``phi(t) = sum c t^d`` with equal degrees merged and zero terms dropped."""

    terms: tuple = field()

    def __init__(self, terms):
        merged = {}
        for c, d in terms:
            c, d = float(c), float(d)
            if not (np.isfinite(c) and np.isfinite(d)):
                raise InvalidInputError("profile terms must be finite")
            if d <= 1:
                raise InvalidInputError(f"profile degrees must exceed 1, got {d}")
            merged[d] = merged.get(d, 0.0) + c
        out = tuple((c, d) for d, c in sorted(merged.items()) if c != 0.0)
        if not out:
            raise InvalidInputError("profile has no nonzero term")
        object.__setattr__(self, "terms", out)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms])

    @property
    def degrees(self) -> np.ndarray:
        return np.array([d for _, d in self.terms])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return sum(c * t**d for c, d in self.terms)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return sum(c * d * t ** (d - 1) for c, d in self.terms)

    def second_derivative(self, t):
        t = np.asarray(t, dtype=float)
        return sum(c * d * (d - 1) * t ** (d - 2) for c, d in self.terms)

    def scaled(self, r: float) -> "FiberingProfile":
        """Profile of ``r u`` given this profile of ``u``."""
        return FiberingProfile([(c * r**d, d) for c, d in self.terms])

    def to_list(self):
        return [[c, d] for c, d in self.terms]


@dataclass(frozen=True)
class CriticalPoint:
    t: float
    kind: str  # "min", "max" or "degenerate"
    value: float
    second_derivative: float

    def to_dict(self):
        return {
            "t": self.t,
            "kind": self.kind,
            "value": self.value,
            "second_derivative": self.second_derivative,
        }


@dataclass(frozen=True)
class GeometryClass:
    """Label plus the critical points it was derived from.

    ``hypotheses`` lists every hypothesis among H1..H5 that the profile
    satisfies (H2 and H5 profiles also satisfy H3, for instance), while
    ``label`` is the most specific one.
    """

    label: str
    critical_points: tuple
    degenerate: bool = False
    hypotheses: frozenset = frozenset()

    def to_dict(self):
        return {
            "label": self.label,
            "degenerate": self.degenerate,
            "hypotheses": sorted(self.hypotheses),
            "critical_points": [c.to_dict() for c in self.critical_points],
        }


# -- exponential sums ----------------------------------------------------------


def _exp_sum(a, e, s):
    """``(G(s), scale)`` with a common positive factor removed.

    Both are divided by ``max_i |a_i| e^{e_i s}`` so nothing overflows; signs
    and the ratio ``|G| / scale`` are unaffected.
    """
    logs = np.log(np.abs(a)) + e * s
    m = logs.max()
    w = np.exp(logs - m)
    return float(np.sum(np.sign(a) * w)), float(np.sum(w))


def _bounds(a, e):
    """``[lo, hi]`` outside which the first/last term dominates all others."""
    k = a.size
    la = np.log(np.abs(a))
    pad = np.log(2.0 * k)
    lo = min((la[0] - la[i] - pad) / e[i] for i in range(1, k)) - 1.0
    hi = max((la[i] - la[-1] + pad) / (e[-1] - e[i]) for i in range(k - 1)) + 1.0
    return lo, hi


def _exp_roots(a, e):
    """All real roots of ``sum a_i exp(e_i s)`` with ``e`` strictly increasing."""
    if a.size < 2:
        return []
    # derivative: drop the constant term, factor out exp(e_2 s)
    ext = _exp_roots(a[1:] * e[1:], e[1:] - e[1])
    lo, hi = _bounds(a, e)
    pts = sorted({lo, hi, *(z for z in ext if lo < z < hi)})
    vals = []
    for s in pts:
        g, scale = _exp_sum(a, e, s)
        vals.append(0.0 if abs(g) <= _TOL_TOUCH * scale else g)
    roots = []
    for i, s in enumerate(pts):
        if vals[i] == 0.0:
            roots.append(s)
        if i + 1 < len(pts) and vals[i] * vals[i + 1] < 0:
            roots.append(
                brentq(
                    lambda z: _exp_sum(a, e, z)[0],
                    s,
                    pts[i + 1],
                    xtol=1e-15,
                    rtol=4 * np.finfo(float).eps,
                    maxiter=500,
                )
            )
    return sorted(roots)


# -- public operations -----------------------------------------------------------


def critical_points(profile: FiberingProfile) -> list:
    """Positive critical points of ``profile``, ascending, each annotated."""
    c, d = profile.coefficients, profile.degrees
    a = c * d
    e = d - d[0]
    out = []
    for s in _exp_roots(a, e):
        t = float(np.exp(s))
        phi2 = float(profile.second_derivative(t))
        mag = float(np.max(np.abs(c) * t**d))
        if abs(phi2) * t * t < TOL_DEGENERATE * mag:
            kind = "degenerate"
        else:
            kind = "min" if phi2 > 0 else "max"
        out.append(CriticalPoint(t, kind, float(profile(t)), phi2))
    return out


def classify(profile: FiberingProfile) -> GeometryClass:
    """Label the profile against hypotheses H1..H5."""
    cps = tuple(critical_points(profile))
    if not cps:
        return GeometryClass("NO_CRITICAL", cps)
    if any(cp.kind == "degenerate" for cp in cps):
        return GeometryClass("OTHER", cps, degenerate=True)
    kinds = [cp.kind for cp in cps]
    vals = [cp.value for cp in cps]
    hyp = set()
    # H3: first critical point is a minimum lying strictly below all others
    if kinds[0] == "min" and all(vals[0] < v for v in vals[1:]):
        hyp.add("H3")
    # H4: last critical point is a maximum at least as high as all others
    if kinds[-1] == "max" and all(vals[-1] >= v for v in vals[:-1]):
        hyp.add("H4")
    if kinds == ["max"]:
        hyp.add("H1")
        label = "H1"
    elif kinds == ["min"]:
        hyp.add("H2")
        label = "H2"
    elif kinds == ["min", "max"]:
        # phi increases between the two, so H3 and H4 hold even when the
        # values agree to rounding near a fold
        hyp.update(("H3", "H4", "H5"))
        label = "H5"
    elif "H3" in hyp:
        label = "H3"
    elif "H4" in hyp:
        label = "H4"
    else:
        label = "OTHER"
    return GeometryClass(label, cps, hypotheses=frozenset(hyp))


def _geometry(profile_or_class):
    if isinstance(profile_or_class, GeometryClass):
        return profile_or_class
    return classify(profile_or_class)


def first_min(profile) -> CriticalPoint:
    """First local minimum ``t_u`` of an H2/H3/H5 profile."""
    geo = _geometry(profile)
    if "H3" not in geo.hypotheses:
        raise NotFoundError(
            f"no first minimum below all other critical values (geometry {geo.label})",
            geometry=geo,
        )
    return geo.critical_points[0]


def last_max(profile) -> CriticalPoint:
    """Last local maximum ``s_u`` of an H1/H4/H5 profile."""
    geo = _geometry(profile)
    if "H4" not in geo.hypotheses:
        raise NotFoundError(
            f"no last maximum above all other critical values (geometry {geo.label})",
            geometry=geo,
        )
    return geo.critical_points[-1]
