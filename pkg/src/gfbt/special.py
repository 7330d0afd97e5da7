"""Scalar special functions and generic numerical routines.

Everything downstream (pairwise probabilities, parameter densities, the
nested quadratures of the bounds) is assembled from the handful of
primitives here.  The incomplete beta and gamma ratios accept numpy arrays
and broadcast, because the bound integrands are evaluated on whole
quadrature panels at once.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "QuadratureError",
    "RootAtSupremum",
    "q_function",
    "log_q_function",
    "log_gamma",
    "regularized_incomplete_beta",
    "regularized_upper_gamma",
    "cap_fraction",
    "cap_fraction_from_cos",
    "integrate",
    "bisect_increasing",
]

_EPS = np.finfo(float).eps
_TINY = 1e-300
_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class QuadratureError(ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance.

    The best available estimate is kept on ``partial`` so a caller may
    choose to accept it at degraded accuracy.
    """

    def __init__(self, message: str, partial: "QuadResult"):
        super().__init__(message)
        self.partial = partial


class RootAtSupremum(ArithmeticError):
    """The target level is never reached below the search ceiling."""


@dataclass(frozen=True)
class QuadratureSpec:
    relative_tolerance: float = 1e-10
    absolute_tolerance: float = 1e-14
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.relative_tolerance > 0 and self.absolute_tolerance > 0):
            raise ValueError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    @classmethod
    def from_env(cls, **overrides) -> "QuadratureSpec":
        """Default spec, with ``GFBT_QUAD_TOL`` overriding the relative tolerance."""
        env = os.environ.get("GFBT_QUAD_TOL")
        if env and "relative_tolerance" not in overrides:
            overrides["relative_tolerance"] = float(env)
        return cls(**overrides)

    def tightened(self, factor: float) -> "QuadratureSpec":
        return QuadratureSpec(
            self.relative_tolerance / factor,
            self.absolute_tolerance / factor,
            self.max_subdivisions,
        )


class QuadResult(NamedTuple):
    value: float | np.ndarray
    error: float | np.ndarray
    subdivisions: int


def _scalar_or_array(out: np.ndarray):
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Gaussian tail
# ---------------------------------------------------------------------------

_erfc_ufunc = np.frompyfunc(math.erfc, 1, 1)


def _erfc(x) -> np.ndarray:
    return np.asarray(_erfc_ufunc(x), dtype=float)


def q_function(x):
    """Gaussian upper tail ``Pr{N(0,1) > x}``.

    Accepts scalars or arrays.  Below ``x = 30`` the value comes straight
    from ``erfc``; further out it is rebuilt from :func:`log_q_function`
    so the result degrades gracefully into the subnormal range.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    big = x > 30.0
    small = ~big
    out[small] = 0.5 * _erfc(x[small] / _SQRT2)
    if np.any(big):
        out[big] = np.exp(_log_q_tail(x[big]))
    return _scalar_or_array(out)


def _log_q_tail(x: np.ndarray) -> np.ndarray:
    # Mills ratio by backward evaluation of Laplace's continued fraction
    # R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))); valid and fast for x >= 5.
    frac = np.zeros_like(x)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for k in range(80, 0, -1):
            frac = k / (x + frac)
        mills = 1.0 / (x + frac)
        out = -0.5 * x * x - _LOG_SQRT_2PI + np.log(mills)
    return np.where(np.isposinf(x), -np.inf, out)


def log_q_function(x):
    """Natural log of :func:`q_function`, finite for arguments far past underflow."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    tail = x >= 20.0
    neg = x < -20.0
    mid = ~(tail | neg)
    out[tail] = _log_q_tail(x[tail])
    out[neg] = np.log1p(-np.exp(_log_q_tail(-x[neg])))
    out[mid] = np.log(0.5 * _erfc(x[mid] / _SQRT2))
    return _scalar_or_array(out)


# ---------------------------------------------------------------------------
# Gamma family
# ---------------------------------------------------------------------------

_lgamma_ufunc = np.frompyfunc(math.lgamma, 1, 1)


def _lgamma(x) -> np.ndarray:
    return np.asarray(_lgamma_ufunc(x), dtype=float)


def log_gamma(x):
    """``ln Γ(x)`` for ``x > 0``."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("log_gamma requires x > 0")
    return _scalar_or_array(_lgamma(arr))


def _lbeta(a, b):
    return _lgamma(a) + _lgamma(b) - _lgamma(a + b)


def _beta_cf(a, b, x, max_iter=10000):
    # Modified Lentz evaluation of the incomplete-beta continued fraction
    # (converges for x < (a+1)/(a+b+2)).  Converged entries are frozen so
    # that one slow element cannot destabilise the others.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for m in range(1, max_iter + 1):
            m2 = 2 * m
            for aa in (
                m * (b - m) * x / ((qam + m2) * (a + m2)),
                -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2)),
            ):
                d = 1.0 + aa * d
                d = np.where(np.abs(d) < _TINY, _TINY, d)
                c = 1.0 + aa / c
                c = np.where(np.abs(c) < _TINY, _TINY, c)
                d = 1.0 / d
                delta = d * c
                h = np.where(active, h * delta, h)
            active &= ~(np.abs(delta - 1.0) < 1e-15)
            if not active.any():
                return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def _ibeta_interior(x, a, b, xc):
    """I_x(a, b) for 0 < x < 1, with ``xc = 1 - x`` supplied exactly."""
    out = np.empty_like(x)
    direct = x < (a + 1.0) / (a + b + 2.0)
    swap = ~direct
    if np.any(direct):
        xd, ad, bd, xcd = x[direct], a[direct], b[direct], xc[direct]
        log_front = ad * np.log(xd) + bd * np.log(xcd) - _lbeta(ad, bd)
        out[direct] = np.exp(log_front) * _beta_cf(ad, bd, xd) / ad
    if np.any(swap):
        xs, as_, bs, xcs = x[swap], a[swap], b[swap], xc[swap]
        log_front = as_ * np.log(xs) + bs * np.log(xcs) - _lbeta(as_, bs)
        out[swap] = 1.0 - np.exp(log_front) * _beta_cf(bs, as_, xcs) / bs
    return out


def regularized_incomplete_beta(x, a, b, *, complement=None):
    """Regularized incomplete beta ratio ``I_x(a, b)``.

    Parameters
    ----------
    x : float or array_like
        Upper integration limit in ``[0, 1]``.
    a, b : float or array_like
        Positive shape parameters.
    complement : array_like, optional
        ``1 - x`` computed by the caller without cancellation.  Used by the
        spherical-cap routines where ``1 - x`` is a squared cosine.
    """
    x, a, b = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    )
    if np.any(~((x >= 0) & (x <= 1))):
        raise ValueError("regularized_incomplete_beta requires 0 <= x <= 1")
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise ValueError("regularized_incomplete_beta requires a, b > 0")
    xc = 1.0 - x if complement is None else np.broadcast_to(np.asarray(complement, dtype=float), x.shape)
    out = np.where(x >= 1.0, 1.0, 0.0)
    inner = (x > 0) & (x < 1) & (xc > 0)
    if np.any(inner):
        out[inner] = _ibeta_interior(x[inner], a[inner], b[inner], xc[inner])
    return _scalar_or_array(np.clip(out, 0.0, 1.0))


def _gamma_series_lower(s, x, max_iter=100000):
    # P(s, x) by the power series; used for x < s + 1.
    term = 1.0 / s
    total = term.copy()
    ap = s.copy()
    for _ in range(max_iter):
        ap = ap + 1.0
        term = term * x / ap
        total = total + term
        if np.all(np.abs(term) < np.abs(total) * 1e-17):
            break
    else:
        raise ArithmeticError("incomplete gamma series did not converge")
    return total * np.exp(s * np.log(x) - x - _lgamma(s))


def _gamma_cf_upper(s, x, max_iter=100000):
    # Q(s, x) by Lentz's continued fraction; used for x >= s + 1.
    b = x + 1.0 - s
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for i in range(1, max_iter + 1):
            an = -i * (i - s)
            b = b + 2.0
            d = an * d + b
            d = np.where(np.abs(d) < _TINY, _TINY, d)
            c = b + an / c
            c = np.where(np.abs(c) < _TINY, _TINY, c)
            d = 1.0 / d
            delta = d * c
            h = np.where(active, h * delta, h)
            active &= ~(np.abs(delta - 1.0) < 2e-16)
            if not active.any():
                break
        else:
            raise ArithmeticError("incomplete gamma continued fraction did not converge")
    return np.exp(s * np.log(x) - x - _lgamma(s)) * h


def regularized_upper_gamma(s, x):
    """Regularized upper incomplete gamma ratio ``Q(s, x) = Γ(s, x) / Γ(s)``.

    With ``s = m/2`` and ``x = ρ²/(2σ²)`` this is the probability that a
    chi-distributed radius with ``m`` degrees of freedom and scale ``σ``
    exceeds ``ρ``.
    """
    s, x = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(x, dtype=float))
    if np.any(~(s > 0)):
        raise ValueError("regularized_upper_gamma requires s > 0")
    if np.any(~(x >= 0)):
        raise ValueError("regularized_upper_gamma requires x >= 0")
    out = np.ones_like(s)
    series = (x > 0) & (x < s + 1.0)
    frac = (x >= s + 1.0) & np.isfinite(x)
    out[np.isinf(x)] = 0.0
    if np.any(series):
        out[series] = 1.0 - _gamma_series_lower(s[series], x[series])
    if np.any(frac):
        out[frac] = _gamma_cf_upper(s[frac], x[frac])
    return _scalar_or_array(np.clip(out, 0.0, 1.0))


# ---------------------------------------------------------------------------
# Spherical caps
# ---------------------------------------------------------------------------


def cap_fraction_from_cos(n, cos_theta, sin2_theta=None):
    """Cap-area fraction of the (n-1)-sphere, parameterized by ``cos θ``.

    ``sin2_theta`` may be passed when the caller can form ``sin²θ`` without
    cancellation (e.g. ``(r² - t²)/r²`` for ``cos θ = t/r``).
    """
    c = np.asarray(cos_theta, dtype=float)
    s2 = 1.0 - c * c if sin2_theta is None else np.asarray(sin2_theta, dtype=float)
    s2 = np.clip(s2, 0.0, 1.0)
    half = 0.5 * regularized_incomplete_beta(s2, (n - 1) / 2.0, 0.5, complement=c * c)
    half = np.asarray(half, dtype=float)
    return _scalar_or_array(np.where(c >= 0, half, 1.0 - half))


def cap_fraction(n: int, theta):
    """Fraction of the (n-1)-sphere's surface inside a cap of half-angle ``theta``.

    >>> round(cap_fraction(3, math.pi / 3), 12)
    0.25
    """
    if n < 2:
        raise ValueError("cap_fraction requires n >= 2")
    theta = np.asarray(theta, dtype=float)
    if np.any(~((theta >= 0) & (theta <= math.pi))):
        raise ValueError("cap_fraction requires 0 <= theta <= pi")
    folded = np.where(theta <= math.pi / 2, theta, math.pi - theta)
    s = np.sin(folded)
    c = np.cos(folded)
    half = 0.5 * np.asarray(
        regularized_incomplete_beta(s * s, (n - 1) / 2.0, 0.5, complement=c * c), dtype=float
    )
    return _scalar_or_array(np.where(theta <= math.pi / 2, half, 1.0 - half))


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature
# ---------------------------------------------------------------------------

# 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
_XGK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208067172609, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(21)
_GWEIGHTS[1:10:2] = _WG
_GWEIGHTS[11:20:2] = _WG[::-1]


def _make_map(lo: float, hi: float):
    """Return (t -> x, dx/dt, t_lo, t_hi, x -> t) for a possibly infinite interval."""
    if math.isfinite(lo) and math.isfinite(hi):
        return (lambda t: t, lambda t: np.ones_like(t), lo, hi, lambda x: x)
    if math.isfinite(lo):
        return (
            lambda u: lo + u / (1.0 - u),
            lambda u: 1.0 / (1.0 - u) ** 2,
            0.0, 1.0,
            lambda x: (x - lo) / (1.0 + x - lo),
        )
    if math.isfinite(hi):
        return (
            lambda u: hi - u / (1.0 - u),
            lambda u: 1.0 / (1.0 - u) ** 2,
            0.0, 1.0,
            lambda x: (hi - x) / (1.0 + hi - x),
        )
    # (-inf, inf): odd map t/(1-t^2) on (-1, 1)
    return (
        lambda t: t / (1.0 - t * t),
        lambda t: (1.0 + t * t) / (1.0 - t * t) ** 2,
        -1.0, 1.0,
        lambda x: 0.0 if x == 0 else (math.sqrt(1.0 + 4.0 * x * x) - 1.0) / (2.0 * x),
    )


def _gk21(f, to_x, jac, a, b):
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    t = center + half * _NODES
    fx = np.asarray(f(to_x(t)), dtype=float) * jac(t)
    kron = half * (fx @ _KWEIGHTS)
    gauss = half * (fx @ _GWEIGHTS)
    mean = kron / (2.0 * half) if half else kron
    resabs = abs(half) * (np.abs(fx) @ _KWEIGHTS)
    resasc = abs(half) * (np.abs(fx - mean[..., None]) @ _KWEIGHTS)
    err = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where(resasc > 0, scaled, err)
    err = np.maximum(err, 50.0 * _EPS * resabs)
    return kron, err


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    spec: QuadratureSpec | None = None,
    points: Iterable[float] = (),
) -> QuadResult:
    """Globally adaptive 21-point Gauss-Kronrod quadrature.

    ``f`` is called with a 1-D array of abscissae and must return values
    along the last axis; leading axes are treated as independent
    components that share the subdivision tree, and every component must
    meet the tolerance.  Infinite limits are handled by mapping onto a
    finite interval (``u = x/(1+x)`` after shifting to the finite end).
    ``points`` are interior breakpoints where the integrand has kinks.
    """
    spec = spec or QuadratureSpec.from_env()
    if hi < lo:
        raise ValueError("integrate requires lo <= hi")
    if lo == hi:
        probe = np.asarray(f(np.array([lo])), dtype=float)[..., 0]
        zero = np.zeros_like(probe)
        return QuadResult(_scalar_or_array(zero), _scalar_or_array(zero.copy()), 0)

    to_x, jac, t_lo, t_hi, to_t = _make_map(lo, hi)
    cuts = sorted({float(to_t(p)) for p in points if lo < p < hi and math.isfinite(p)})
    edges = [t_lo, *[c for c in cuts if t_lo < c < t_hi], t_hi]

    values = []
    errors = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            v, e = _gk21(f, to_x, jac, a, b)
            values.append(v)
            errors.append(e)
    panels = [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    total = np.sum(values, axis=0)
    total_err = np.sum(errors, axis=0)
    count = len(panels)
    while True:
        tol = np.maximum(spec.absolute_tolerance, spec.relative_tolerance * np.abs(total))
        if np.all(total_err <= tol):
            return QuadResult(_scalar_or_array(total), _scalar_or_array(total_err), count)
        if count >= spec.max_subdivisions:
            partial = QuadResult(_scalar_or_array(total), _scalar_or_array(total_err), count)
            raise QuadratureError(
                f"quadrature did not converge in {spec.max_subdivisions} subdivisions "
                f"(estimated error {np.max(total_err):.3g})",
                partial,
            )
        ratios = np.stack(errors, axis=-1) / tol[..., None]
        worst = int(np.argmax(ratios.reshape(-1, len(panels)).max(axis=0)))
        a, b = panels[worst]
        mid = 0.5 * (a + b)
        if not (a < mid < b):
            partial = QuadResult(_scalar_or_array(total), _scalar_or_array(total_err), count)
            raise QuadratureError("quadrature panel reached machine resolution", partial)
        v1, e1 = _gk21(f, to_x, jac, a, mid)
        v2, e2 = _gk21(f, to_x, jac, mid, b)
        total = total - values[worst] + v1 + v2
        total_err = total_err - errors[worst] + e1 + e2
        panels[worst] = (a, mid)
        values[worst] = v1
        errors[worst] = e1
        panels.append((mid, b))
        values.append(v2)
        errors.append(e2)
        count += 1
        if count % 64 == 0:
            # Re-sum to stop drift from the incremental updates.
            total = np.sum(values, axis=0)
            total_err = np.sum(errors, axis=0)


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------


def bisect_increasing(
    f: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    tol: float = 1e-12,
    ceiling: float = 1e6,
) -> float:
    """Locate ``r`` with ``f(r) = target`` for nondecreasing continuous ``f``.

    If ``f(hi) < target`` the upper end is pushed outwards (doubling the
    bracket width) until it reaches ``ceiling``; failing that,
    :class:`RootAtSupremum` is raised so the caller can treat the optimum
    as the supremum of the index set.
    """
    if not hi >= lo:
        raise ValueError("bisect_increasing requires lo <= hi")
    f_lo = f(lo)
    if f_lo > target:
        raise ValueError(f"invalid bracket: f(lo) = {f_lo!r} exceeds target {target!r}")
    if f_lo == target:
        return lo
    if not math.isfinite(hi):
        hi = min(ceiling, lo + 1.0)
    while f(hi) < target:
        if hi >= ceiling:
            raise RootAtSupremum(f"f stays below {target!r} up to {ceiling!r}")
        hi = min(ceiling, lo + 2.0 * (hi - lo) if hi > lo else lo + 1.0)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
