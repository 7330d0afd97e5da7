"""Union, sphere, tangential and tangential-sphere bounds on ML frame error.

All bounds assume BPSK (0 -> +1, 1 -> -1) over real AWGN with per-dimension
noise standard deviation ``sigma`` and the all-zero codeword transmitted.
A weight-``d`` codeword then sits at Euclidean distance ``2*sqrt(d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .codes import WeightEnumerator
from .core import BoundResult, GallagerFamily, evaluate_at, min_form_bound, optimal_parameter
from .special import (
    QuadratureSpec,
    RootAtSupremum,
    bisect_increasing,
    cap_fraction_from_cos,
    integrate,
    log_gamma,
    q_function,
    regularized_upper_gamma,
)

__all__ = [
    "BoundPreconditionError",
    "ChannelParams",
    "union_bound",
    "sb_pairwise",
    "sb_conditional_union",
    "sphere_family",
    "sb_optimal_radius",
    "sphere_bound",
    "tb_pairwise",
    "tb_conditional_union",
    "tangential_family",
    "tangential_bound",
    "tsb_inner_sum",
    "tsb_inner_radius",
    "tsb_conditional_bound",
    "tangential_sphere_family",
    "tangential_sphere_bound",
    "OUTER_TRUNCATION",
]

# Lower truncation of the tangential-sphere outer integral, in units of sigma.
OUTER_TRUNCATION = 12.0
_INNER_TIGHTEN = 10.0
_LOG2 = math.log(2.0)


class BoundPreconditionError(ValueError):
    """The code or channel does not satisfy a bound's preconditions."""


@dataclass(frozen=True)
class ChannelParams:
    """BPSK-AWGN operating point.

    ``Eb/N0 = 1 / (2 * rate * sigma**2)`` with unit-energy symbols.
    """

    sigma: float
    n: int
    rate: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.rate <= 1:
            raise ValueError("rate must lie in (0, 1]")

    @classmethod
    def from_ebn0_db(cls, ebn0_db: float, n: int, rate: float) -> "ChannelParams":
        ebn0 = 10.0 ** (ebn0_db / 10.0)
        return cls(1.0 / math.sqrt(2.0 * rate * ebn0), n, rate)

    @property
    def ebn0(self) -> float:
        return 1.0 / (2.0 * self.rate * self.sigma ** 2)

    @property
    def ebn0_db(self) -> float:
        return 10.0 * math.log10(self.ebn0)


def _check_lengths(w: WeightEnumerator, ch: ChannelParams):
    if w.n != ch.n:
        raise BoundPreconditionError(f"spectrum length {w.n} != channel block length {ch.n}")


def _check_tangential(w: WeightEnumerator, name: str):
    if w.d_min is None:
        raise BoundPreconditionError(f"{name}: empty spectrum")
    if w.d_min >= w.n:
        raise BoundPreconditionError(f"{name} requires d_min < n (got d_min = n = {w.n})")
    if w.total < 3:
        raise BoundPreconditionError(f"{name} requires at least three nonzero codewords (k > 1)")


def _default_quad() -> QuadratureSpec:
    # Bound values reach far below any fixed absolute floor; control is relative.
    return QuadratureSpec.from_env(absolute_tolerance=1e-300)


def _spectrum_key(w: WeightEnumerator):
    return (w.n, w.items())


def _log_chi_density(r: np.ndarray, dof: int, scale):
    """Log pdf of a chi-distributed radius with ``dof`` degrees of freedom."""
    with np.errstate(divide="ignore"):
        return (
            _LOG2 + (dof - 1) * np.log(r) - r * r / (2.0 * scale * scale)
            - (dof / 2.0) * _LOG2 - dof * np.log(scale) - log_gamma(dof / 2.0)
        )


def _gauss_density(sigma: float):
    norm = 1.0 / (math.sqrt(2.0 * math.pi) * sigma)
    return lambda z: norm * np.exp(-0.5 * (np.asarray(z) / sigma) ** 2)


# ---------------------------------------------------------------------------
# Union bound
# ---------------------------------------------------------------------------


def union_bound(w: WeightEnumerator, ch: ChannelParams) -> float:
    """``Σ A_d Q(√d / σ)``; not clipped at one."""
    _check_lengths(w, ch)
    if not w.items():
        return 0.0
    return float(np.sum(w.counts * q_function(np.sqrt(w.weights) / ch.sigma)))


# ---------------------------------------------------------------------------
# Sphere bound
# ---------------------------------------------------------------------------


def _caps(r, thresholds, dim):
    """Cap fractions cap(dim, arccos(t/r)) on the grid thresholds x r, zero for r <= t."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(thresholds, dtype=float)[:, None]
    rr = np.broadcast_to(r[None, :], (t.shape[0], r.size))
    live = rr > t
    out = np.zeros(rr.shape)
    if np.any(live):
        rl = rr[live]
        tl = np.broadcast_to(t, rr.shape)[live]
        cos = tl / rl
        sin2 = (rl - tl) * (rl + tl) / (rl * rl)
        out[live] = cap_fraction_from_cos(dim, cos, sin2)
    return out


def sb_pairwise(r, d: int, n: int):
    """Conditional pairwise error given the noise lies on a sphere of radius r."""
    if n < 3:
        raise ValueError("sb_pairwise requires n >= 3")
    if not 1 <= d <= n:
        raise ValueError(f"weight d={d} outside 1..{n}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    out = _caps(r.ravel(), [math.sqrt(d)], n)[0].reshape(r.shape)
    return float(out) if out.ndim == 0 else out


def sb_conditional_union(w: WeightEnumerator):
    """f_u(r) = Σ A_d p2(r, d) for the sphere family (SNR-free)."""
    thresholds = np.sqrt(w.weights)
    counts = w.counts
    n = w.n

    def f_u(r):
        r = np.asarray(r, dtype=float)
        return counts @ _caps(r.ravel(), thresholds, n) if r.ndim else float(
            counts @ _caps(r.reshape(1), thresholds, n)[:, 0])

    return f_u


def sphere_family(w: WeightEnumerator, ch: ChannelParams, quad: QuadratureSpec | None = None,
                  known_optimum: float | None = None) -> GallagerFamily:
    _check_lengths(w, ch)
    if w.n < 3:
        raise BoundPreconditionError("sphere bound requires n >= 3")
    n, sigma = w.n, ch.sigma

    def density(r):
        r = np.asarray(r, dtype=float)
        return np.exp(_log_chi_density(r, n, sigma))

    def tail(r):
        return regularized_upper_gamma(n / 2.0, r * r / (2.0 * sigma * sigma))

    mode = sigma * math.sqrt(n - 1)
    spread = sigma / math.sqrt(2.0)
    points = sorted({*np.sqrt(w.weights).tolist(), mode, *(mode + k * spread for k in (-6, -3, 3, 6))})
    return GallagerFamily(
        density=density,
        conditional_bound=sb_conditional_union(w),
        support_lo=0.0,
        support_hi=math.inf,
        monotone=True,
        breakpoints=tuple(p for p in points if p > 0),
        tail=tail,
        known_optimum=known_optimum,
        quad=quad or _default_quad(),
    )


@lru_cache(maxsize=256)
def _sb_radius_cached(key) -> float:
    n, items = key
    w = WeightEnumerator(n, dict(items))
    return optimal_parameter(sphere_family(w, ChannelParams(1.0, n, 1.0)))


def sb_optimal_radius(w: WeightEnumerator) -> float:
    """Root of Σ A_d p2(r, d) = 1; ``inf`` when the sum never reaches one."""
    if w.n < 3:
        raise BoundPreconditionError("sphere bound requires n >= 3")
    return _sb_radius_cached(_spectrum_key(w))


def sphere_bound(w: WeightEnumerator, ch: ChannelParams, two_term: bool = False,
                 quad: QuadratureSpec | None = None) -> BoundResult:
    """Sphere bound; the optimal radius depends only on the spectrum."""
    family = sphere_family(w, ch, quad, known_optimum=sb_optimal_radius(w))
    if two_term:
        return evaluate_at(family, family.known_optimum)
    return min_form_bound(family)


# ---------------------------------------------------------------------------
# Tangential bound
# ---------------------------------------------------------------------------


def tb_pairwise(z, d: int, n: int, sigma: float):
    """Q(√d (√n - z) / (σ √(n - d))): pairwise error given the radial noise z."""
    if not 1 <= d < n:
        raise ValueError(f"tb_pairwise requires 1 <= d < n (got d={d}, n={n})")
    z = np.asarray(z, dtype=float)
    arg = math.sqrt(d) * (math.sqrt(n) - z) / (sigma * math.sqrt(n - d))
    return q_function(arg)


def tb_conditional_union(w: WeightEnumerator, sigma: float):
    """f_u(z) = Σ A_d p2(z, d); the weight-n term is the step 1{z > √n}."""
    n = w.n
    partial = [(d, a) for d, a in w.items() if d < n]
    weights = np.array([d for d, _ in partial], dtype=float)[:, None]
    counts = np.array([a for _, a in partial], dtype=float)
    a_n = w.spectrum.get(n, 0)
    scale = np.sqrt(weights) / (sigma * np.sqrt(n - weights))
    root_n = math.sqrt(n)

    def f_u(z):
        z = np.asarray(z, dtype=float)
        flat = z.reshape(-1)
        total = counts @ np.atleast_2d(q_function(scale * (root_n - flat[None, :])))
        if a_n:
            total = total + a_n * np.where(flat > root_n, 1.0, np.where(flat == root_n, 0.5, 0.0))
        return total.reshape(z.shape) if z.ndim else float(total[0])

    return f_u


def tangential_family(w: WeightEnumerator, ch: ChannelParams,
                      quad: QuadratureSpec | None = None) -> GallagerFamily:
    _check_lengths(w, ch)
    _check_tangential(w, "tangential bound")
    sigma = ch.sigma
    points = [math.sqrt(w.n), 0.0, *(k * sigma for k in (-8.0, -4.0, 4.0, 8.0))]
    return GallagerFamily(
        density=_gauss_density(sigma),
        conditional_bound=tb_conditional_union(w, sigma),
        support_lo=-math.inf,
        support_hi=math.inf,
        monotone=True,
        breakpoints=tuple(sorted(set(points))),
        tail=lambda z: q_function(z / sigma),
        quad=quad or _default_quad(),
    )


def tangential_bound(w: WeightEnumerator, ch: ChannelParams, two_term: bool = False,
                     quad: QuadratureSpec | None = None) -> BoundResult:
    """Tangential bound; the optimal z* depends on sigma and is recomputed here."""
    family = tangential_family(w, ch, quad)
    if two_term:
        return evaluate_at(family, optimal_parameter(family))
    return min_form_bound(family)


# ---------------------------------------------------------------------------
# Tangential-sphere bound
# ---------------------------------------------------------------------------


def _tsb_thresholds(w: WeightEnumerator):
    n = w.n
    pairs = [(d, a) for d, a in w.items() if d < n]
    d = np.array([p[0] for p in pairs], dtype=float)
    a = np.array([p[1] for p in pairs], dtype=float)
    return np.sqrt(n * d / (n - d)), a


def tsb_inner_sum(r, w: WeightEnumerator):
    """Σ_{d: r > √(nd/(n-d))} A_d cap(n-1, arccos(√(nd/(n-d)) / r)); free of sigma."""
    thresholds, counts = _tsb_thresholds(w)
    r = np.asarray(r, dtype=float)
    vals = counts @ _caps(r.reshape(-1), thresholds, w.n - 1)
    return vals.reshape(r.shape) if r.ndim else float(vals[0])


@lru_cache(maxsize=256)
def _tsb_radius_cached(key) -> float:
    n, items = key
    w = WeightEnumerator(n, dict(items))
    thresholds, _ = _tsb_thresholds(w)
    try:
        return bisect_increasing(lambda r: tsb_inner_sum(r, w), 1.0, float(thresholds.min()),
                                 math.inf, tol=1e-12)
    except RootAtSupremum:
        return math.inf


def tsb_inner_radius(w: WeightEnumerator, n: int | None = None) -> float:
    """Radius at which the inner conditional union bound reaches one."""
    n = w.n if n is None else n
    if n != w.n:
        raise BoundPreconditionError(f"spectrum length {w.n} != n = {n}")
    if n < 3:
        raise BoundPreconditionError("tangential-sphere bound requires n >= 3")
    _check_tangential(w, "tangential-sphere bound")
    return _tsb_radius_cached(_spectrum_key(w))


def tsb_conditional_bound(z, r1: float, w: WeightEnumerator, ch: ChannelParams,
                          quad: QuadratureSpec | None = None):
    """Conditional sphere bound in the hyperplane at radial noise ``z``.

    Equals one for ``z >= √n``.  Below that the tangential noise radius is
    chi with ``n - 1`` degrees of freedom at scale ``√n σ / (√n - z)``,
    and the bound is ``∫_0^{r1} f_s g_s + Pr{radius > r1}``.
    """
    _check_lengths(w, ch)
    quad = (quad or _default_quad()).tightened(_INNER_TIGHTEN)
    n = w.n
    root_n = math.sqrt(n)
    z = np.asarray(z, dtype=float)
    flat = z.reshape(-1)
    out = np.ones(flat.shape)
    below = flat < root_n
    if np.any(below):
        scale = root_n * ch.sigma / (root_n - flat[below])
        thresholds, counts = _tsb_thresholds(w)
        if math.isfinite(r1):
            tail = np.asarray(regularized_upper_gamma((n - 1) / 2.0, r1 * r1 / (2.0 * scale ** 2)))
        else:
            tail = np.zeros(scale.shape)
        lo = float(thresholds.min())
        body = np.zeros(scale.shape)
        if r1 > lo:
            col = scale[:, None]

            def integrand(r):
                fs = counts @ _caps(r, thresholds, n - 1)
                return fs[None, :] * np.exp(_log_chi_density(r[None, :], n - 1, col))

            pts = [t for t in thresholds.tolist() if lo < t < r1]
            body = np.atleast_1d(integrate(integrand, lo, r1, quad, pts).value)
        out[below] = np.minimum(body + tail, 1.0)
    return out.reshape(z.shape) if z.ndim else float(out[0])


def tangential_sphere_family(w: WeightEnumerator, ch: ChannelParams,
                             quad: QuadratureSpec | None = None) -> GallagerFamily:
    _check_lengths(w, ch)
    r1 = tsb_inner_radius(w, w.n)
    sigma = ch.sigma
    quad = quad or _default_quad()
    root_n = math.sqrt(w.n)
    lo = -OUTER_TRUNCATION * sigma
    points = [0.0, *(k * sigma for k in (-8.0, -4.0, -2.0, 2.0, 4.0))]
    return GallagerFamily(
        density=_gauss_density(sigma),
        conditional_bound=lambda z: tsb_conditional_bound(z, r1, w, ch, quad),
        support_lo=lo,
        support_hi=math.inf,
        monotone=True,
        breakpoints=tuple(sorted(p for p in set(points) if lo < p < root_n)),
        tail=lambda z: q_function(z / sigma),
        known_optimum=root_n,
        quad=quad,
    )


def tangential_sphere_bound(w: WeightEnumerator, ch: ChannelParams, two_term: bool = False,
                            quad: QuadratureSpec | None = None) -> BoundResult:
    """Tangential-sphere bound with the half-cone tail ``Q(√n / σ)`` included."""
    family = tangential_sphere_family(w, ch, quad)
    if two_term:
        return evaluate_at(family, family.known_optimum)
    return min_form_bound(family)
