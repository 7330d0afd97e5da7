"""Independent reference computations used only by the tests.

Nothing here imports the package's numerical code: special functions come
from scipy/mpmath and integrals from QUADPACK, so agreement with the
package is a genuine cross-check.
"""

import itertools
import math

import mpmath
import numpy as np
from scipy import integrate, special, stats


def q_oracle(x):
    """Gaussian tail by 50-digit quadrature of the density."""
    with mpmath.workdps(50):
        val = mpmath.quad(lambda t: mpmath.exp(-t * t / 2) / mpmath.sqrt(2 * mpmath.pi), [x, mpmath.inf])
    return float(val)


def chi_tail_oracle(dof, x):
    """Q(dof/2, x) as ∫_x^∞ t^{s-1} e^{-t} / Γ(s) dt, high precision."""
    s = mpmath.mpf(dof) / 2
    with mpmath.workdps(40):
        val = mpmath.quad(lambda t: t ** (s - 1) * mpmath.exp(-t), [x, x + s + 10, mpmath.inf]) / mpmath.gamma(s)
    return float(val)


def upper_gamma_oracle(s, x):
    with mpmath.workdps(40):
        val = mpmath.quad(lambda t: t ** (mpmath.mpf(s) - 1) * mpmath.exp(-t), [x, mpmath.inf]) / mpmath.gamma(s)
    return float(val)


def cap_oracle(n, theta):
    """Cap fraction by direct quadrature of sin^{n-2}; fine for small n only."""
    norm = math.exp(math.lgamma(n / 2) - math.lgamma((n - 1) / 2)) / math.sqrt(math.pi)
    val, _ = integrate.quad(lambda p: math.sin(p) ** (n - 2), 0.0, theta, epsabs=0, epsrel=1e-13)
    return norm * val


def parity_check_spectrum(g_rows, n):
    """Spectrum by filtering all 2^n words through a parity-check matrix.

    The parity-check matrix is found as the null space of G over GF(2)
    by Gaussian elimination on a numpy array, independent of the
    generator-side enumeration.
    """
    G = np.array([[int(c) for c in r] for r in g_rows], dtype=np.uint8)
    k = G.shape[0]
    A = G.copy()
    pivots = []
    row = 0
    for col in range(n):
        hits = [i for i in range(row, k) if A[i, col]]
        if not hits:
            continue
        A[[row, hits[0]]] = A[[hits[0], row]]
        for i in range(k):
            if i != row and A[i, col]:
                A[i] ^= A[row]
        pivots.append(col)
        row += 1
    free = [c for c in range(n) if c not in pivots]
    H = np.zeros((len(free), n), dtype=np.uint8)
    for j, f in enumerate(free):
        H[j, f] = 1
        for i, p in enumerate(pivots):
            H[j, p] = A[i, f]
    words = np.array(list(itertools.product([0, 1], repeat=n)), dtype=np.uint8)
    syndromes = (words @ H.T) % 2
    code = words[~syndromes.any(axis=1)]
    weights = code.sum(axis=1)
    counts = np.bincount(weights, minlength=n + 1)
    return {d: int(counts[d]) for d in range(1, n + 1) if counts[d]}


def _scipy_caps(dim, thresholds, counts, r):
    total = 0.0
    for t, a in zip(thresholds, counts):
        if r > t:
            c = t / r
            total += a * 0.5 * special.betainc((dim - 1) / 2, 0.5, 1 - c * c)
    return total


def sb_oracle(spectrum, n, sigma):
    """∫ min{f_u(r), 1} chi_n(r; σ) dr with scipy special functions and quad."""
    ds = sorted(spectrum)
    th = [math.sqrt(d) for d in ds]
    cs = [spectrum[d] for d in ds]
    chi = stats.chi(n, scale=sigma)
    f = lambda r: min(_scipy_caps(n, th, cs, r), 1.0) * chi.pdf(r)
    pts = sorted(set(th + [sigma * math.sqrt(n - 1)]))
    hi = sigma * math.sqrt(n) + 40 * sigma + max(th)
    val, _ = integrate.quad(f, 0, hi, points=pts, limit=500, epsabs=0, epsrel=1e-12)
    return val


def tb_oracle(spectrum, n, sigma):
    """∫ min{Σ A_d Q(...), 1} φ_σ(z) dz with scipy's normal distribution."""
    def fu(z):
        s = 0.0
        for d, a in spectrum.items():
            if d < n:
                s += a * stats.norm.sf(math.sqrt(d) * (math.sqrt(n) - z) / (sigma * math.sqrt(n - d)))
            elif z > math.sqrt(n):
                s += a
        return min(s, 1.0)

    f = lambda z: fu(z) * stats.norm.pdf(z, scale=sigma)
    val, _ = integrate.quad(f, -40 * sigma, 40 * sigma, points=[0.0, math.sqrt(n)], limit=500,
                            epsabs=0, epsrel=1e-12)
    return val


def tsb_oracle(spectrum, n, sigma):
    """Tangential-sphere bound with the integration order swapped.

    Pr{Z >= √n} + ∫_{z<√n} φ_σ(z) E_ρ[min{f_s(ρ √n/(√n - z)), 1}] dz where
    ρ is the chi(n-1, σ) norm of the tangential noise, evaluated as a
    double integral with the radius outermost.
    """
    ds = [d for d in sorted(spectrum) if d < n]
    th = [math.sqrt(n * d / (n - d)) for d in ds]
    cs = [spectrum[d] for d in ds]
    root_n = math.sqrt(n)
    chi = stats.chi(n - 1, scale=sigma)

    def inner(rho):
        # z-range where the scaled radius exceeds the smallest threshold
        if rho <= 0:
            return 0.0
        z_lo = root_n * (1 - rho / min(th))
        f = lambda z: min(_scipy_caps(n - 1, th, cs, rho * root_n / (root_n - z)), 1.0) * stats.norm.pdf(z, scale=sigma)
        z_start = max(z_lo, -40 * sigma)
        if z_start >= root_n:
            return 0.0
        pts = [root_n * (1 - rho / t) for t in th if z_start < root_n * (1 - rho / t) < root_n]
        val, _ = integrate.quad(f, z_start, root_n, points=pts or None, limit=400, epsabs=0, epsrel=1e-11)
        return val * chi.pdf(rho)

    hi = sigma * math.sqrt(n) + 40 * sigma
    mode = sigma * math.sqrt(n - 2)
    body, _ = integrate.quad(inner, 0, hi, points=[mode], limit=400, epsabs=0, epsrel=1e-10)
    return body + stats.norm.sf(root_n / sigma)
