"""Pairwise string distances.

Three distances live here: the plain Levenshtein distance, a modified
Levenshtein that discounts short gaps touching either end of either
string (margin gaps), and the q-gram profile distance used as a cheap
lower-bound filter.

The dynamic programs are compiled with numba and operate on uint8-encoded
reads; the public functions accept plain strings.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

_INF = np.inf

_ENCODE_LUT = np.full(256, 255, dtype=np.uint8)
for _i, _c in enumerate("ACGT"):
    _ENCODE_LUT[ord(_c)] = _i


def encode_read(read: str) -> np.ndarray:
    """Map an ACGT string to a uint8 array with values 0..3."""
    raw = np.frombuffer(read.encode("ascii"), dtype=np.uint8)
    enc = _ENCODE_LUT[raw]
    if enc.size and enc.max() > 3:
        raise ValueError(f"read contains symbols outside ACGT: {read!r}")
    return enc


@njit(cache=True, nogil=True)
def _lev(a, b, cutoff):
    """Edit distance with row-minimum early abandon.

    Uses O(min(|a|,|b|)) memory.  If every cell of some row reaches
    ``cutoff``, the row minimum (a lower bound on the result) is
    returned instead of the exact distance.
    """
    if a.size > b.size:
        a, b = b, a
    n = a.size
    m = b.size
    cur = np.empty(n + 1, dtype=np.int64)
    for j in range(n + 1):
        cur[j] = j
    for i in range(1, m + 1):
        diag = cur[0]
        cur[0] = i
        rowmin = cur[0]
        for j in range(1, n + 1):
            tmp = cur[j]
            best = diag if a[j - 1] == b[i - 1] else diag + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            if tmp + 1 < best:
                best = tmp + 1
            cur[j] = best
            diag = tmp
            if best < rowmin:
                rowmin = best
        if rowmin >= cutoff:
            return rowmin
    return cur[n]


@njit(cache=True, nogil=True)
def _gap_penalty(x, l, t):
    if x <= t - 1.0:
        return 0.0
    if x <= l - t:
        return 2.0 * (x - t + 1.0) / (l + 1.0 - 2.0 * t)
    return 2.0


@njit(cache=True, nogil=True)
def _mg_lev(a, b, t, cutoff):
    """Margin-gap Levenshtein with row-minimum early abandon.

    Interior edits cost 1; a gap run touching an end of the alignment is
    charged per skipped symbol by the piecewise-linear schedule of the
    string whose symbols are skipped.  The schedule sums to that
    string's length, so the distance to the empty word stays exact.
    """
    n = a.size
    m = b.size
    fn = float(n)
    fm = float(m)
    cur = np.empty(m + 1, dtype=np.float64)
    cur[0] = 0.0
    for j in range(1, m + 1):
        cur[j] = cur[j - 1] + _gap_penalty(j - 1.0, fm, t)
    for i in range(1, n + 1):
        diag = cur[0]
        cur[0] = cur[0] + _gap_penalty(i - 1.0, fn, t)
        rowmin = cur[0]
        for j in range(1, m + 1):
            tmp = cur[j]
            best = diag if a[i - 1] == b[j - 1] else diag + 1.0
            # vertical step skips a[i-1]; a margin gap only in the last column
            vcost = _gap_penalty(fn - i, fn, t) if j == m else 1.0
            if tmp + vcost < best:
                best = tmp + vcost
            # horizontal step skips b[j-1]; a margin gap only in the last row
            hcost = _gap_penalty(fm - j, fm, t) if i == n else 1.0
            if cur[j - 1] + hcost < best:
                best = cur[j - 1] + hcost
            cur[j] = best
            diag = tmp
            if best < rowmin:
                rowmin = best
        if rowmin >= cutoff:
            return rowmin
    return cur[m]


@dataclass(frozen=True)
class MarginGapParams:
    """Grace margin size ``t`` for the margin-gap distance.

    The per-string gap schedule is derived from each string's own length,
    so a single ``t`` must satisfy t < l/2 for every string it meets.
    """

    t: float

    def __post_init__(self) -> None:
        if self.t < 0:
            raise ValueError("margin size t must be nonnegative")

    def validate_for_length(self, length: int) -> None:
        if length > 0 and not self.t < length / 2:
            raise ValueError(
                f"margin size t={self.t} must be < l/2 for string length {length}"
            )

    def penalty(self, x: int, length: int) -> float:
        """Cost of skipping the symbol at outward-in position ``x``."""
        if not 0 <= x < length:
            raise ValueError(f"position x={x} outside [0, {length})")
        self.validate_for_length(length)
        return _gap_penalty(float(x), float(length), self.t)


def levenshtein(a: str, b: str) -> int:
    """Minimum number of insertions, deletions and substitutions."""
    return int(_lev(encode_read(a), encode_read(b), np.iinfo(np.int64).max))


def margin_gap_penalty(x: int, l: int, t: float) -> float:
    """Cost of a margin-gap symbol at position ``x`` of a length-``l`` string."""
    return MarginGapParams(t).penalty(x, l)


def margin_gap_levenshtein(a: str, b: str, params: MarginGapParams) -> float:
    """Levenshtein distance with discounted end gaps.

    Gap runs touching either end of either string are charged by the
    ``params`` schedule; a run of size <= t is free.  The distance from
    any word to the empty word equals the word's length exactly.
    """
    for s in (a, b):
        if s:
            params.validate_for_length(len(s))
    return float(_mg_lev(encode_read(a), encode_read(b), params.t, _INF))


def compute_margin_t(l: int, alpha: float) -> float:
    """Grace margin t = (l/alpha - 1) / 2, clamped at zero.

    Callers must additionally check t < l/2 before use; that fails for
    coverage below roughly one half.
    """
    if l < 1:
        raise ValueError("read length must be positive")
    if alpha <= 0:
        raise ValueError("coverage must be positive")
    t = 0.5 * (l / alpha - 1.0)
    if t < 0:
        warnings.warn(
            f"margin formula yields t={t:.3f} < 0 for l={l}, alpha={alpha}; using 0"
        )
        return 0.0
    return t


@dataclass(frozen=True)
class QGramProfile:
    """Dense occurrence counts of all 4**q q-grams of one read."""

    q: int
    counts: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QGramProfile):
            return NotImplemented
        return self.q == other.q and np.array_equal(self.counts, other.counts)


@njit(cache=True, nogil=True)
def _profile(a, q, out):
    if a.size < q:
        return
    code = 0
    for k in range(q):
        code = code * 4 + a[k]
    out[code] += 1
    mod = 4 ** (q - 1)
    for i in range(q, a.size):
        code = (code % mod) * 4 + a[i]
        out[code] += 1


def qgram_profile(a: str, q: int) -> QGramProfile:
    """Count every contiguous length-q substring of ``a``.

    Reads shorter than q yield the zero profile.
    """
    if q < 1:
        raise ValueError("q must be positive")
    counts = np.zeros(4 ** q, dtype=np.int64)
    _profile(encode_read(a), q, counts)
    return QGramProfile(q, counts)


def qgram_distance(a: str, b: str, q: int) -> int:
    """Manhattan distance between the q-gram profiles of ``a`` and ``b``.

    For q=3 this never exceeds six times the Levenshtein distance, which
    makes it a sound filter for candidate pre-selection.
    """
    pa = qgram_profile(a, q)
    pb = qgram_profile(b, q)
    return int(np.abs(pa.counts - pb.counts).sum())


def profile_matrix(reads: list[str], q: int) -> np.ndarray:
    """Stack the q-gram profiles of ``reads`` into a (len(reads), 4**q) array."""
    out = np.zeros((len(reads), 4 ** q), dtype=np.int64)
    for i, r in enumerate(reads):
        _profile(encode_read(r), q, out[i])
    return out
