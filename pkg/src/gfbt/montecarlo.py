"""Monte Carlo frame-error estimates under exhaustive ML decoding.

The all-zero codeword is sent as the all-(+1) vector.  With ``y`` the
received vector, a nonzero codeword ``c`` is at least as close to ``y`` as
the transmitted point exactly when ``Σ_{t in supp(c)} y_t <= 0``, so ML
decoding reduces to one matrix product per block of trials.  Ties count
as errors.

Noise for trial ``i`` comes from a Philox stream keyed by the seed with the
block index ``i // BLOCK`` in the counter, so results do not depend on how
blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .codes import CodeError, GeneratorMatrix, codewords

__all__ = ["MCEstimate", "simulate_fer", "MAX_SIMULATION_K", "BLOCK"]

MAX_SIMULATION_K = 16
BLOCK = 1024
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class MCEstimate:
    fer: float
    trials: int
    errors: int
    ci95_half_width: float
    seed: int

    @classmethod
    def from_counts(cls, errors: int, trials: int, seed: int) -> "MCEstimate":
        fer = errors / trials
        return cls(fer, trials, errors, 1.96 * math.sqrt(fer * (1.0 - fer) / trials), seed)

    def to_dict(self) -> dict:
        return {
            "fer": self.fer,
            "trials": self.trials,
            "errors": self.errors,
            "ci95": self.ci95_half_width,
            "seed": self.seed,
        }


def _block_noise(seed: int, block: int, rows: int, n: int) -> np.ndarray:
    bitgen = np.random.Philox(key=seed & _SEED_MASK, counter=[0, 0, 0, block])
    return np.random.Generator(bitgen).standard_normal((rows, n))


def _block_errors(supports: np.ndarray, d_min: int, sigma: float, seed: int, block: int,
                  rows: int) -> int:
    y = 1.0 + sigma * _block_noise(seed, block, rows, supports.shape[0])
    # Every codeword metric is at least the sum of the d_min smallest entries
    # of y, so only rows where that sum is <= 0 can hold a decoding error.
    if d_min < y.shape[1]:
        floor = np.partition(y, d_min - 1, axis=1)[:, :d_min].sum(axis=1)
    else:
        floor = y.sum(axis=1)
    y = y[floor <= 0.0]
    if not len(y):
        return 0
    metric = y @ supports
    return int(np.count_nonzero(metric.min(axis=1) <= 0.0))


def simulate_fer(g: GeneratorMatrix, sigma: float, trials: int, seed: int,
                 workers: int = 1) -> MCEstimate:
    """Estimate the ML frame error rate of ``g`` at noise level ``sigma``.

    >>> from gfbt.codes import canned_code
    >>> simulate_fer(canned_code("hamming_7_4"), 1e-6, 1000, 1).errors
    0
    """
    if g.k > MAX_SIMULATION_K:
        raise CodeError(
            f"k={g.k} exceeds the brute-force ML simulation budget (k <= {MAX_SIMULATION_K})"
        )
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    words = codewords(g)[1:]
    supports = words.T.astype(float)  # (n, 2^k - 1)
    d_min = int(words.sum(axis=1).min())
    sizes = [min(BLOCK, trials - b * BLOCK) for b in range(-(-trials // BLOCK))]

    def run(b: int) -> int:
        return _block_errors(supports, d_min, sigma, seed, b, sizes[b])

    if workers <= 1:
        errors = sum(map(run, range(len(sizes))))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errors = sum(pool.map(run, range(len(sizes))))
    return MCEstimate.from_counts(errors, trials, seed)
