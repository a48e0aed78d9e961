"""Read-set distance estimators and distance-matrix construction.

The estimator ladder (presets):

    me / mes  symmetric Monge-Elkan mean of best-match edit distances
    mess      + rescaling by the larger read-set cardinality
    messg     + margin-gap discounted edit distance
    messgm    + missing-read threshold (poor matches forced to l)
    messgq    + q-gram candidate pre-selection and down-sampling

Every per-pair computation is a pure function of (sets, config), so the
matrix builder can hand pairs to any number of workers and still produce
bit-identical results.
"""
from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .alignment import (
    MarginGapParams,
    _lev,
    _mg_lev,
    compute_margin_t,
    encode_read,
    profile_matrix,
    qgram_profile,
)
from .core import ReadSet, complement, reverse, reverse_complement

_I64_MAX = np.iinfo(np.int64).max

PRESETS = ("me", "mes", "mess", "messg", "messgm", "messgq", "maxsize")

DEFAULT_THRESHOLD_FRACTION = 0.35
DEFAULT_CANDIDATE_COUNT = 5
DEFAULT_QGRAM_SIZE = 3
DEFAULT_SAMPLE_COVERAGE = 2.0


@dataclass(frozen=True)
class EmbeddingConfig:
    """q-gram candidate pre-selection for the inner best-match search."""

    q: int = DEFAULT_QGRAM_SIZE
    candidate_count: int = DEFAULT_CANDIDATE_COUNT
    # Skip candidates whose q-gram distance / 6 already exceeds the best
    # hit.  Off by default to reproduce the plain approximate behavior.
    prune_exact: bool = False

    def __post_init__(self) -> None:
        if self.q < 1 or self.candidate_count < 1:
            raise ValueError("q and candidate_count must be positive")


@dataclass(frozen=True)
class MatchConfig:
    """Which estimator features are active and what is known about reads."""

    strand_known: bool = True
    orientation_known: bool = True
    use_scaling: bool = False
    margin_gaps: MarginGapParams | None = None
    threshold_fraction: float | None = None
    embedding: EmbeddingConfig | None = None
    sample_to_coverage: float | None = None
    baseline_maxsize: bool = False
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.threshold_fraction is not None and not 0 < self.threshold_fraction < 1:
            raise ValueError("threshold_fraction must lie in (0, 1)")
        if self.sample_to_coverage is not None and self.sample_to_coverage <= 0:
            raise ValueError("sample_to_coverage must be positive")


def preset_config(
    name: str,
    *,
    coverage: float | None = None,
    read_length: int | None = None,
    strand_known: bool = False,
    orientation_known: bool = False,
    threshold_fraction: float = DEFAULT_THRESHOLD_FRACTION,
    candidate_count: int = DEFAULT_CANDIDATE_COUNT,
    sample_to_coverage: float = DEFAULT_SAMPLE_COVERAGE,
    apply_threshold_in_messgq: bool = True,
    rng_seed: int = 0,
) -> MatchConfig:
    """Build the MatchConfig for one rung of the estimator ladder.

    The margin-gap rungs (messg and above) need the sequencing
    parameters ``coverage`` and ``read_length`` to derive the grace
    margin t.
    """
    name = name.lower()
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    base = MatchConfig(
        strand_known=strand_known,
        orientation_known=orientation_known,
        rng_seed=rng_seed,
    )
    if name == "maxsize":
        return replace(base, baseline_maxsize=True)
    if name in ("me", "mes"):
        return base
    if name == "mess":
        return replace(base, use_scaling=True)
    if coverage is None or read_length is None:
        raise ValueError(
            f"preset {name!r} needs coverage and read_length to derive the margin size"
        )
    t = compute_margin_t(read_length, coverage)
    if not t < read_length / 2:
        raise ValueError(
            f"margin size t={t} violates t < l/2 for l={read_length}; "
            "coverage is too low for margin gaps"
        )
    margins = MarginGapParams(t)
    if name == "messg":
        return replace(base, use_scaling=True, margin_gaps=margins)
    if name == "messgm":
        return replace(
            base,
            use_scaling=True,
            margin_gaps=margins,
            threshold_fraction=threshold_fraction,
        )
    # messgq
    return replace(
        base,
        use_scaling=True,
        margin_gaps=margins,
        threshold_fraction=threshold_fraction if apply_threshold_in_messgq else None,
        embedding=EmbeddingConfig(candidate_count=candidate_count),
        sample_to_coverage=sample_to_coverage,
    )


def _transforms(cfg: MatchConfig):
    """Transform set applied to the second read of each pair."""
    out = [lambda r: r]
    if not cfg.strand_known:
        out.append(complement)
    if not cfg.orientation_known:
        out.append(reverse)
    if not cfg.strand_known and not cfg.orientation_known:
        out.append(reverse_complement)
    return out


@njit(cache=True, nogil=True)
def _best_match_packed(a, packed, lengths, t, use_margin):
    """Minimum distance from read ``a`` to any row of the packed matrix."""
    best = np.inf
    for r in range(packed.shape[0]):
        lb = lengths[r]
        b = packed[r, :lb]
        if use_margin:
            d = _mg_lev(a, b, t, best)
        else:
            if abs(a.size - lb) >= best:
                continue
            cutoff = np.int64(best) if best < 9.0e18 else _I64_MAX
            d = float(_lev(a, b, cutoff))
        if d < best:
            best = d
            if best == 0.0:
                break
    return best


def _pack(reads: list[str]) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.array([len(r) for r in reads], dtype=np.int64)
    packed = np.zeros((len(reads), int(lengths.max())), dtype=np.uint8)
    for i, r in enumerate(reads):
        packed[i, : len(r)] = encode_read(r)
    return packed, lengths


def _base_distance(a: str, b: str, cfg: MatchConfig) -> float:
    ea = encode_read(a)
    eb = encode_read(b)
    if cfg.margin_gaps is not None:
        for s in (a, b):
            if s:
                cfg.margin_gaps.validate_for_length(len(s))
        return float(_mg_lev(ea, eb, cfg.margin_gaps.t, np.inf))
    return float(_lev(ea, eb, _I64_MAX))


def variant_distance(a: str, b: str, cfg: MatchConfig) -> float:
    """Best distance over the strand/orientation variants of ``b``.

    One, two or four alignments are evaluated depending on what is known
    about the sequencing setup.
    """
    return min(_base_distance(a, f(b), cfg) for f in _transforms(cfg))


class _SetIndex:
    """Per-set search structures: packed variant reads and q-gram profiles."""

    def __init__(self, reads: tuple[str, ...], cfg: MatchConfig):
        self.variant_reads = [[f(r) for r in reads] for f in _transforms(cfg)]
        flat = [r for block in self.variant_reads for r in block]
        self.packed, self.lengths = _pack(flat)
        self.profiles = None
        if cfg.embedding is not None:
            q = cfg.embedding.q
            self.profiles = [profile_matrix(block, q) for block in self.variant_reads]

    def best_match(self, a: str, cfg: MatchConfig) -> float:
        use_margin = cfg.margin_gaps is not None
        t = cfg.margin_gaps.t if use_margin else 0.0
        ea = encode_read(a)
        if cfg.embedding is None:
            return float(
                _best_match_packed(ea, self.packed, self.lengths, t, use_margin)
            )
        return self._best_match_approx(a, ea, cfg)

    def _best_match_approx(self, a: str, ea: np.ndarray, cfg: MatchConfig) -> float:
        emb = cfg.embedding
        pa = qgram_profile(a, emb.q).counts
        use_margin = cfg.margin_gaps is not None
        t = cfg.margin_gaps.t if use_margin else 0.0
        best = np.inf
        for block, prof in zip(self.variant_reads, self.profiles):
            qdists = np.abs(prof - pa).sum(axis=1)
            order = np.argsort(qdists, kind="stable")[: emb.candidate_count]
            for idx in order:
                if emb.prune_exact and qdists[idx] / 6.0 >= best:
                    continue
                b = block[idx]
                eb = encode_read(b)
                if use_margin:
                    d = float(_mg_lev(ea, eb, t, best))
                else:
                    cutoff = np.int64(best) if best < 9.0e18 else _I64_MAX
                    d = float(_lev(ea, eb, cutoff))
                if d < best:
                    best = d
                    if best == 0.0:
                        return 0.0
        return best


def best_match_approx(a: str, reads_b: ReadSet, cfg: MatchConfig) -> float:
    """Approximate best-match distance via q-gram candidate selection.

    Upper-bounds the exact inner minimum; equals it once the candidate
    count reaches the set size.
    """
    if cfg.embedding is None:
        raise ValueError("best_match_approx requires an embedding config")
    return _SetIndex(reads_b.reads, cfg).best_match(a, cfg)


def _validate_margin(cfg: MatchConfig, *sets: ReadSet) -> None:
    if cfg.margin_gaps is None:
        return
    shortest = min(len(r) for rs in sets for r in rs.reads)
    cfg.margin_gaps.validate_for_length(shortest)


def me_directed(reads_a: ReadSet, reads_b: ReadSet, cfg: MatchConfig) -> float:
    """Directed Monge-Elkan distance from ``reads_a`` to ``reads_b``.

    Averages, over the reads of the first set, the distance to the best
    match in the second set.  With a threshold configured, reads whose
    best match is at least theta' * len(read) away count as their full
    length (missing-read rule).
    """
    if not reads_a.reads or not reads_b.reads:
        raise ValueError("empty read set")
    _validate_margin(cfg, reads_a, reads_b)
    index = _SetIndex(reads_b.reads, cfg)
    return _me_directed_indexed(reads_a, index, cfg)


def _me_directed_indexed(reads_a: ReadSet, index: _SetIndex, cfg: MatchConfig) -> float:
    contributions = []
    for a in reads_a.reads:
        mu = index.best_match(a, cfg)
        if cfg.threshold_fraction is not None and mu >= cfg.threshold_fraction * len(a):
            mu = float(len(a))
        contributions.append(mu)
    # fsum keeps the mean exact under read duplication
    return math.fsum(contributions) / len(contributions)


def mes(reads_a: ReadSet, reads_b: ReadSet, cfg: MatchConfig) -> float:
    """Symmetric Monge-Elkan distance: mean of the two directed values."""
    if not reads_a.reads or not reads_b.reads:
        raise ValueError("empty read set")
    _validate_margin(cfg, reads_a, reads_b)
    index_b = _SetIndex(reads_b.reads, cfg)
    index_a = _SetIndex(reads_a.reads, cfg)
    forward = _me_directed_indexed(reads_a, index_b, cfg)
    backward = _me_directed_indexed(reads_b, index_a, cfg)
    return 0.5 * (forward + backward)


def _derive_seed(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def downsample(reads: ReadSet, target_coverage: float, cfg: MatchConfig) -> ReadSet:
    """Uniform subsample down to ``target_coverage``, seeded per set label.

    Returns the set unchanged when its declared coverage does not exceed
    the target.  The seed is derived from the config seed and the set
    label so results do not depend on scheduling.
    """
    if target_coverage <= 0:
        raise ValueError("target coverage must be positive")
    alpha0 = reads.declared_coverage
    if alpha0 is None:
        raise ValueError(
            f"read set {reads.label!r} has no declared coverage; supply it "
            "or disable down-sampling"
        )
    if alpha0 <= target_coverage:
        return reads
    count = int(round(len(reads.reads) * target_coverage / alpha0))
    count = max(count, 1)
    rng = np.random.default_rng(_derive_seed(cfg.rng_seed, reads.label))
    idx = np.sort(rng.choice(len(reads.reads), size=count, replace=False))
    return ReadSet(
        label=reads.label,
        reads=tuple(reads.reads[i] for i in idx),
        declared_coverage=target_coverage,
        declared_read_length=reads.declared_read_length,
    )


def set_distance(reads_a: ReadSet, reads_b: ReadSet, cfg: MatchConfig) -> float:
    """Full per-pair estimate with optional sampling and rescaling.

    The scale factor uses the original (pre-sampling) cardinalities: it
    stands in for the unknown sequence lengths, which sampling does not
    change.
    """
    if cfg.baseline_maxsize:
        return float(max(len(reads_a.reads), len(reads_b.reads)))
    size_a, size_b = len(reads_a.reads), len(reads_b.reads)
    if cfg.sample_to_coverage is not None:
        reads_a = downsample(reads_a, cfg.sample_to_coverage, cfg)
        reads_b = downsample(reads_b, cfg.sample_to_coverage, cfg)
    value = mes(reads_a, reads_b, cfg)
    if cfg.use_scaling:
        value *= max(size_a, size_b)
    return value


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative matrix over labeled items, zero diagonal."""

    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        values = np.asarray(self.values, dtype=np.float64)
        n = len(self.labels)
        if values.shape != (n, n):
            raise ValueError(f"matrix shape {values.shape} does not match {n} labels")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("matrix entries must be finite and nonnegative")
        if not np.array_equal(values, values.T):
            raise ValueError("matrix must be symmetric")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.labels)

    def get(self, label_a: str, label_b: str) -> float:
        i = self.labels.index(label_a)
        j = self.labels.index(label_b)
        return float(self.values[i, j])

    def upper_triangle(self) -> np.ndarray:
        iu = np.triu_indices(len(self.labels), k=1)
        return self.values[iu]


def distance_matrix(
    sets: list[ReadSet], cfg: MatchConfig, threads: int | None = None
) -> DistanceMatrix:
    """All-pairs set distances, computed once per unordered pair.

    Pairs may be dispatched to ``threads`` workers; the result is
    identical for any worker count.
    """
    if len(sets) < 2:
        raise ValueError("need at least two read sets")
    labels = [rs.label for rs in sets]
    if len(set(labels)) != len(labels):
        raise ValueError("read-set labels must be unique")
    n = len(sets)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def compute(pair):
        i, j = pair
        try:
            return set_distance(sets[i], sets[j], cfg)
        except Exception as exc:
            raise RuntimeError(
                f"distance computation failed for pair "
                f"({labels[i]!r}, {labels[j]!r}): {exc}"
            ) from exc

    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(compute, pairs))
    else:
        results = [compute(p) for p in pairs]
    values = np.zeros((n, n))
    for (i, j), d in zip(pairs, results):
        values[i, j] = values[j, i] = d
    return DistanceMatrix(tuple(labels), values)
