"""Binary linear codes: generator matrices, weight spectra, canned codes.

Rows are held as Python ints with column ``j`` stored in bit ``n-1-j``,
so the text form ``"1011"`` and ``int("1011", 2)`` agree.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "CodeError",
    "GeneratorMatrix",
    "WeightEnumerator",
    "weight_enumerator",
    "canned_code",
    "bpsk_modulate",
    "codewords",
    "MAX_ENUMERATION_K",
]

MAX_ENUMERATION_K = 26


class CodeError(ValueError):
    """Malformed generator matrix, spectrum, or unsupported code size."""


def _gf2_rank(rows: Sequence[int]) -> int:
    pivots: dict[int, int] = {}
    rank = 0
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top not in pivots:
                pivots[top] = row
                rank += 1
                break
            row ^= pivots[top]
    return rank


@dataclass(frozen=True)
class GeneratorMatrix:
    """k x n binary generator matrix of full row rank."""

    k: int
    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise CodeError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if len(self.rows) != self.k:
            raise CodeError(f"expected {self.k} rows, got {len(self.rows)}")
        if any(r < 0 or r >> self.n for r in self.rows):
            raise CodeError("row wider than block length")
        if _gf2_rank(self.rows) != self.k:
            raise CodeError("generator rows are linearly dependent over GF(2)")

    @classmethod
    def from_strings(cls, rows: Sequence[str]) -> "GeneratorMatrix":
        rows = [r.strip() for r in rows]
        if not rows:
            raise CodeError("empty generator matrix")
        n = len(rows[0])
        for r in rows:
            if len(r) != n:
                raise CodeError(f"row length mismatch: {r!r} has {len(r)} symbols, expected {n}")
            if not re.fullmatch(r"[01]+", r):
                raise CodeError(f"non-binary symbol in row {r!r}")
        return cls(len(rows), n, tuple(int(r, 2) for r in rows))

    @classmethod
    def from_array(cls, array) -> "GeneratorMatrix":
        a = np.asarray(array, dtype=int)
        if a.ndim != 2:
            raise CodeError("generator matrix must be two-dimensional")
        return cls.from_strings(["".join(str(int(v) & 1) for v in row) for row in a])

    @classmethod
    def parse(cls, text: str) -> "GeneratorMatrix":
        """Parse the plain-text format: a ``k n`` header then ``k`` rows of 0/1."""
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise CodeError("empty generator file")
        try:
            k, n = (int(t) for t in lines[0].split())
        except ValueError:
            raise CodeError(f"bad header {lines[0]!r}; expected 'k n'") from None
        body = lines[1:]
        if len(body) != k:
            raise CodeError(f"header declares k={k} rows, file has {len(body)}")
        g = cls.from_strings(body)
        if g.n != n:
            raise CodeError(f"header declares n={n}, rows have length {g.n}")
        return g

    @classmethod
    def read(cls, path) -> "GeneratorMatrix":
        return cls.parse(Path(path).read_text())

    def to_text(self) -> str:
        return "\n".join([f"{self.k} {self.n}", *self.row_strings()]) + "\n"

    def row_strings(self) -> list[str]:
        return [format(r, f"0{self.n}b") for r in self.rows]

    def to_array(self) -> np.ndarray:
        return np.array([[int(ch) for ch in s] for s in self.row_strings()], dtype=np.uint8)

    @property
    def rate(self) -> float:
        return self.k / self.n


@dataclass(frozen=True)
class WeightEnumerator:
    """Weight spectrum ``{d: A_d}`` of the nonzero codewords.

    ``k`` is kept when the spectrum came from a generator matrix or a file
    that records it; it is ``None`` otherwise.
    """

    n: int
    spectrum: Mapping[int, int]
    k: int | None = None
    _items: tuple[tuple[int, int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        clean = {}
        for d, a in self.spectrum.items():
            d, a = int(d), int(a)
            if a < 0:
                raise CodeError(f"negative count A_{d} = {a}")
            if not 1 <= d <= self.n:
                raise CodeError(f"weight {d} outside 1..{self.n}")
            if a:
                clean[d] = a
        object.__setattr__(self, "spectrum", dict(sorted(clean.items())))
        object.__setattr__(self, "_items", tuple(sorted(clean.items())))

    @property
    def d_min(self) -> int | None:
        return self._items[0][0] if self._items else None

    @property
    def total(self) -> int:
        return sum(self.spectrum.values())

    @property
    def weights(self) -> np.ndarray:
        return np.array([d for d, _ in self._items], dtype=float)

    @property
    def counts(self) -> np.ndarray:
        return np.array([a for _, a in self._items], dtype=float)

    def items(self):
        return self._items

    def to_json(self) -> str:
        payload = {"n": self.n, "k": self.k, "spectrum": {str(d): a for d, a in self._items}}
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "WeightEnumerator":
        try:
            obj = json.loads(text)
            n = int(obj["n"])
            k = obj.get("k")
            spectrum = {int(d): int(a) for d, a in obj["spectrum"].items()}
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            raise CodeError(f"malformed spectrum JSON: {exc}") from None
        return cls(n, spectrum, None if k is None else int(k))

    @classmethod
    def read(cls, path) -> "WeightEnumerator":
        return cls.from_json(Path(path).read_text())


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

_LOW_BITS = 14


def _pack(rows: Sequence[int], n: int) -> np.ndarray:
    """Split each row into little-endian uint64 words -> shape (len(rows), W)."""
    words = (n + 63) // 64
    mask = (1 << 64) - 1
    out = np.zeros((len(rows), words), dtype=np.uint64)
    for i, r in enumerate(rows):
        for w in range(words):
            out[i, w] = (r >> (64 * w)) & mask
    return out


def _span(packed: np.ndarray) -> np.ndarray:
    """All 2^m XOR combinations of the packed rows, in message order."""
    table = np.zeros((1, packed.shape[1]), dtype=np.uint64)
    for row in packed:
        table = np.concatenate([table, table ^ row])
    return table


def codewords(g: GeneratorMatrix) -> np.ndarray:
    """All 2^k codewords as a (2^k, n) uint8 array; message m at index m."""
    if g.k > 20:
        raise CodeError("explicit codeword listing is limited to k <= 20")
    bits = g.to_array()
    msgs = (np.arange(2 ** g.k)[:, None] >> np.arange(g.k)[None, :]) & 1
    return (msgs.astype(np.uint8) @ bits) % 2


def weight_enumerator(g: GeneratorMatrix) -> WeightEnumerator:
    """Exact weight spectrum by exhaustive enumeration of all 2^k codewords.

    Codewords are built by doubling XOR tables over packed 64-bit words; the
    low ``min(k, 14)`` generator rows form one table that is combined with
    each high-part codeword in turn.
    """
    if g.k > MAX_ENUMERATION_K:
        raise CodeError(
            f"k={g.k} exceeds the exhaustive enumeration budget (k <= {MAX_ENUMERATION_K}); "
            "supply the spectrum as JSON instead"
        )
    packed = _pack(g.rows, g.n)
    low = min(g.k, _LOW_BITS)
    low_table = _span(packed[:low])
    high_rows = packed[low:]
    tally = np.zeros(g.n + 1, dtype=np.int64)
    high = np.zeros(packed.shape[1], dtype=np.uint64)
    # Gray-code walk over the high part: one row XOR per step.
    for step in range(2 ** len(high_rows)):
        if step:
            flip = (step & -step).bit_length() - 1
            high = high ^ high_rows[flip]
        weights = np.bitwise_count(low_table ^ high).sum(axis=1, dtype=np.int64)
        tally += np.bincount(weights, minlength=g.n + 1)
    spectrum = {d: int(tally[d]) for d in range(1, g.n + 1) if tally[d]}
    return WeightEnumerator(g.n, spectrum, g.k)


def bpsk_modulate(codeword) -> np.ndarray:
    """Map bits to antipodal symbols, 0 -> +1 and 1 -> -1."""
    c = np.asarray(codeword, dtype=np.int64)
    return 1.0 - 2.0 * c


# ---------------------------------------------------------------------------
# Canned codes
# ---------------------------------------------------------------------------

_CANNED = {
    "hamming_7_4": [
        "1000110",
        "0100011",
        "0010111",
        "0001101",
    ],
    "ext_hamming_8_4": [
        "10001101",
        "01000111",
        "00101110",
        "00011011",
    ],
    "hamming_15_11": [
        "100000000000011",
        "010000000000101",
        "001000000000110",
        "000100000000111",
        "000010000001001",
        "000001000001010",
        "000000100001011",
        "000000010001100",
        "000000001001101",
        "000000000101110",
        "000000000011111",
    ],
    # Cyclic shifts of g(x) = 1 + x^2 + x^4 + x^5 + x^6 + x^10 + x^11.
    "golay_23_12": [
        "10101110001100000000000",
        "01010111000110000000000",
        "00101011100011000000000",
        "00010101110001100000000",
        "00001010111000110000000",
        "00000101011100011000000",
        "00000010101110001100000",
        "00000001010111000110000",
        "00000000101011100011000",
        "00000000010101110001100",
        "00000000001010111000110",
        "00000000000101011100011",
    ],
}


def canned_code(name: str) -> GeneratorMatrix:
    """Generator matrix of a named standard code.

    Besides the fixed names, ``repetition_<n>`` and ``spc_<n>`` (single
    parity check) are accepted for any ``n >= 2``.
    """
    if name in _CANNED:
        return GeneratorMatrix.from_strings(_CANNED[name])
    m = re.fullmatch(r"(repetition|spc)_(\d+)", name)
    if m:
        n = int(m.group(2))
        if n < 2:
            raise CodeError(f"{name}: block length must be at least 2")
        if m.group(1) == "repetition":
            return GeneratorMatrix(1, n, ((1 << n) - 1,))
        # row i: a one in column i plus the parity column
        return GeneratorMatrix(n - 1, n, tuple((1 << (n - 1 - i)) | 1 for i in range(n - 1)))
    known = ", ".join([*_CANNED, "repetition_<n>", "spc_<n>"])
    raise CodeError(f"unknown code {name!r}; known codes: {known}")
