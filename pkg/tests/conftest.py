"""Shared test helpers: independent oracle implementations.

These deliberately use full-matrix pure-Python dynamic programming and
naive triple loops so they share no code path with the package kernels.
"""
from __future__ import annotations

import math
import random

import pytest

ALPHABET = "ACGT"


def oracle_levenshtein(a: str, b: str) -> int:
    """Full-matrix Wagner-Fischer, no optimizations."""
    n, m = len(a), len(b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        table[i][0] = i
    for j in range(m + 1):
        table[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(
                table[i - 1][j - 1] + cost,
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
            )
    return table[n][m]


def oracle_gap_cost(x: float, l: int, t: float) -> float:
    if x <= t - 1:
        return 0.0
    if x <= l - t:
        return 2.0 * (x - t + 1) / (l + 1 - 2 * t)
    return 2.0


def oracle_margin_gap_levenshtein(a: str, b: str, t: float) -> float:
    """Full-matrix DP with discounted first/last row and column steps."""
    n, m = len(a), len(b)
    table = [[math.inf] * (m + 1) for _ in range(n + 1)]
    table[0][0] = 0.0
    for i in range(1, n + 1):
        table[i][0] = table[i - 1][0] + oracle_gap_cost(i - 1, n, t)
    for j in range(1, m + 1):
        table[0][j] = table[0][j - 1] + oracle_gap_cost(j - 1, m, t)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = table[i - 1][j - 1] + (0 if a[i - 1] == b[j - 1] else 1)
            skip_a = oracle_gap_cost(n - i, n, t) if j == m else 1.0
            skip_b = oracle_gap_cost(m - j, m, t) if i == n else 1.0
            table[i][j] = min(sub, table[i - 1][j] + skip_a, table[i][j - 1] + skip_b)
    return table[n][m]


def oracle_me_directed(reads_a, reads_b, *, transforms, t=None, theta=None) -> float:
    """Naive triple loop: reads x reads x variants, then mean."""
    total = 0.0
    for a in reads_a:
        best = math.inf
        for b in reads_b:
            for f in transforms:
                bb = f(b)
                if t is None:
                    d = float(oracle_levenshtein(a, bb))
                else:
                    d = oracle_margin_gap_levenshtein(a, bb, t)
                best = min(best, d)
        if theta is not None and best >= theta * len(a):
            best = float(len(a))
        total += best
    return total / len(reads_a)


def oracle_mes(reads_a, reads_b, **kw) -> float:
    return 0.5 * (
        oracle_me_directed(reads_a, reads_b, **kw)
        + oracle_me_directed(reads_b, reads_a, **kw)
    )


def random_read(rng: random.Random, max_len: int, min_len: int = 1) -> str:
    return "".join(rng.choice(ALPHABET) for _ in range(rng.randint(min_len, max_len)))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)
