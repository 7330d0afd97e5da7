"""Single-parameter Gallager first-bound framework.

A :class:`GallagerFamily` pairs the density ``g`` of the region parameter
with a conditional error bound ``f_u``.  Two evaluations are offered:

* :func:`evaluate_at` -- the two-term bound for a chosen parameter value;
* :func:`min_form_bound` -- ``∫ min{f_u, 1} g``, the tightest bound of this
  type, which needs no monotonicity.

For nondecreasing continuous ``f_u`` the two agree at the parameter where
``f_u`` crosses one (:func:`optimal_parameter`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .special import (
    QuadratureSpec,
    RootAtSupremum,
    bisect_increasing,
    integrate,
)

__all__ = [
    "GallagerFamily",
    "BoundResult",
    "NotMonotoneError",
    "evaluate_at",
    "optimal_parameter",
    "min_form_bound",
    "PROBE_POINTS",
]

PROBE_POINTS = 64
ROOT_TOL = 1e-12

Func = Callable[[np.ndarray], np.ndarray]


class NotMonotoneError(ValueError):
    """f_u failed the monotonicity probe; use :func:`min_form_bound` instead."""


@dataclass(frozen=True)
class GallagerFamily:
    """Nested Gallager regions indexed by a scalar parameter.

    ``density`` and ``conditional_bound`` take and return numpy arrays.
    ``tail`` optionally gives ``∫_r^hi g`` in closed form; without it the
    outer term of :func:`evaluate_at` is found by quadrature.
    ``breakpoints`` are parameter values where ``f_u`` has kinks.
    ``known_optimum`` short-circuits the root search when the optimum is
    fixed by the geometry of the family.
    """

    density: Func
    conditional_bound: Func
    support_lo: float
    support_hi: float
    monotone: bool = True
    breakpoints: tuple[float, ...] = ()
    tail: Callable[[float], float] | None = None
    known_optimum: float | None = None
    quad: QuadratureSpec = field(default_factory=QuadratureSpec.from_env)

    def f(self, r: float) -> float:
        return float(np.asarray(self.conditional_bound(np.array([r], dtype=float)))[0])

    def points_within(self, lo: float, hi: float) -> list[float]:
        return [p for p in self.breakpoints if lo < p < hi]


@dataclass(frozen=True)
class BoundResult:
    value: float
    optimal_parameter: float
    inside_term: float
    outside_term: float
    method_tag: str
    error: float = 0.0


def _inside(family: GallagerFamily, lo: float, hi: float, clip: bool) -> tuple[float, float]:
    if hi <= lo:
        return 0.0, 0.0

    def integrand(r):
        fu = np.asarray(family.conditional_bound(r), dtype=float)
        if clip:
            fu = np.minimum(fu, 1.0)
        return fu * family.density(r)

    res = integrate(integrand, lo, hi, family.quad, family.points_within(lo, hi))
    return res.value, res.error


def _mass(family: GallagerFamily, lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        return 0.0, 0.0
    res = integrate(family.density, lo, hi, family.quad, family.points_within(lo, hi))
    return res.value, res.error


def evaluate_at(family: GallagerFamily, r_star: float) -> BoundResult:
    """Two-term bound ``∫_lo^{r*} f_u g + ∫_{r*}^hi g`` with no clipping of f_u."""
    lo, hi = family.support_lo, family.support_hi
    cut = min(max(r_star, lo), hi)
    inside, err_in = _inside(family, lo, cut, clip=False)
    if cut >= hi:
        outside, err_out = 0.0, 0.0
    elif family.tail is not None:
        outside, err_out = float(family.tail(cut)), 0.0
    else:
        outside, err_out = _mass(family, cut, hi)
    return BoundResult(inside + outside, r_star, inside, outside, "two-term", err_in + err_out)


def _probe_range(family: GallagerFamily) -> tuple[float, float]:
    pts = [p for p in family.breakpoints if math.isfinite(p)]
    a, b = (min(pts), max(pts)) if pts else (0.0, 0.0)
    span = b - a + 1.0
    lo = family.support_lo if math.isfinite(family.support_lo) else a - 4.0 * span
    hi = family.support_hi if math.isfinite(family.support_hi) else b + 4.0 * span
    return lo, hi


def is_monotone(family: GallagerFamily, probes: int = PROBE_POINTS) -> bool:
    """Check that f_u is nondecreasing on a grid of ``probes`` points."""
    lo, hi = _probe_range(family)
    grid = np.linspace(lo, hi, probes)
    vals = np.asarray(family.conditional_bound(grid), dtype=float)
    slack = 1e-12 * np.maximum(1.0, np.abs(vals[:-1]))
    return bool(np.all(np.diff(vals) >= -slack))


def _finite_lower(family: GallagerFamily) -> float:
    if math.isfinite(family.support_lo):
        return family.support_lo
    lo = -1.0
    while family.f(lo) >= 1.0:
        lo *= 2.0
        if lo < -1e12:
            raise ArithmeticError("conditional bound does not fall below one")
    return lo


def optimal_parameter(family: GallagerFamily) -> float:
    """Parameter minimising the two-term bound for a nondecreasing f_u.

    Returns the solution of ``f_u(r) = 1`` or, when f_u stays below one
    throughout, ``support_hi`` (``inf`` for unbounded supports).
    """
    if family.known_optimum is not None:
        return family.known_optimum
    if not family.monotone or not is_monotone(family):
        raise NotMonotoneError(
            "conditional bound is not nondecreasing; the root condition does not "
            "apply -- evaluate the min-form bound instead"
        )
    lo = _finite_lower(family)
    if family.f(lo) >= 1.0:
        return lo
    hi = family.support_hi
    ceiling = hi if math.isfinite(hi) else 1e6
    try:
        return bisect_increasing(family.f, 1.0, lo, hi, tol=ROOT_TOL, ceiling=ceiling)
    except RootAtSupremum:
        return hi


def min_form_bound(family: GallagerFamily) -> BoundResult:
    """``∫ min{f_u, 1} g`` over the support.

    For monotone families the integral is split at the crossing point so
    no quadrature panel straddles the kink of the min; otherwise the
    clipped integrand is integrated in one sweep.
    """
    lo, hi = family.support_lo, family.support_hi
    r1 = None
    if family.known_optimum is not None:
        r1 = family.known_optimum
    elif family.monotone and is_monotone(family):
        r1 = optimal_parameter(family)
    if r1 is None:
        def split(r):
            fu = np.asarray(family.conditional_bound(r), dtype=float)
            g = family.density(r)
            return np.stack([np.where(fu < 1.0, fu * g, 0.0), np.where(fu < 1.0, 0.0, g)])

        res = integrate(split, lo, hi, family.quad, family.breakpoints)
        inside, outside = (float(v) for v in res.value)
        return BoundResult(inside + outside, math.nan, inside, outside, "min-form",
                           float(np.sum(res.error)))
    cut = min(max(r1, lo), hi)
    inside, err_in = _inside(family, lo, cut, clip=True)
    outside, err_out = _mass(family, cut, hi)
    return BoundResult(inside + outside, r1, inside, outside, "min-form", err_in + err_out)
