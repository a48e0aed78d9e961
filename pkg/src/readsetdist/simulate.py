"""Read sampling and mutated sequence families for evaluation.

All randomness comes from numpy's default PCG64 generator; every
function is deterministic given its seed, and per-item seeds are derived
from (seed, item name) so concurrency cannot change the output.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .alignment import levenshtein
from .core import DNA_ALPHABET, ReadSet, SequenceRecord, complement, reverse
from .distance import DistanceMatrix


@dataclass(frozen=True)
class SimulationParams:
    """Sampling setup: coverage alpha, read length l and read-end noise."""

    alpha: float
    l: int
    strand_noise: bool = False
    orientation_noise: bool = False
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError("coverage alpha must be positive")
        if self.l < 1:
            raise ValueError("read length l must be positive")


@dataclass(frozen=True)
class MutationParams:
    """Independent per-site edit rates for the family generator."""

    substitution_rate: float = 0.0
    insertion_rate: float = 0.0
    deletion_rate: float = 0.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        rates = (self.substitution_rate, self.insertion_rate, self.deletion_rate)
        if any(not 0 <= r < 1 for r in rates) or sum(rates) >= 1:
            raise ValueError("mutation rates must lie in [0, 1) and sum below 1")


def _derive_seed(seed: int, name: str) -> int:
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def sample_reads(record: SequenceRecord, params: SimulationParams) -> ReadSet:
    """Draw floor(alpha * |A| / l) reads i.i.d. from a sequence.

    Start positions are uniform over the |A| - l + 1 possible windows.
    With strand (orientation) noise, each read is independently
    complemented (reversed) with probability one half.
    """
    seq = record.sequence
    if len(seq) < params.l:
        raise ValueError(
            f"sequence {record.identifier!r} is shorter ({len(seq)}) than "
            f"read length {params.l}"
        )
    count = math.floor(params.alpha * len(seq) / params.l)
    if count == 0:
        raise ValueError(
            f"coverage too low: no reads for sequence {record.identifier!r} "
            f"with alpha={params.alpha}, l={params.l}"
        )
    rng = np.random.default_rng(_derive_seed(params.rng_seed, record.identifier))
    starts = rng.integers(0, len(seq) - params.l + 1, size=count)
    reads = [seq[s : s + params.l] for s in starts]
    if params.strand_noise:
        flips = rng.random(count) < 0.5
        reads = [complement(r) if f else r for r, f in zip(reads, flips)]
    if params.orientation_noise:
        flips = rng.random(count) < 0.5
        reads = [reverse(r) if f else r for r, f in zip(reads, flips)]
    return ReadSet(
        label=record.identifier,
        reads=tuple(reads),
        declared_coverage=params.alpha,
        declared_read_length=params.l,
    )


def mutate(record: SequenceRecord, params: MutationParams) -> SequenceRecord:
    """Apply independent per-site edits to a sequence.

    At each site one of four outcomes is drawn: substitution (to a
    uniformly random different symbol), deletion, insertion (a uniform
    random symbol emitted before the site), or no change.
    """
    rng = np.random.default_rng(_derive_seed(params.rng_seed, record.identifier))
    sub = params.substitution_rate
    dele = params.deletion_rate
    ins = params.insertion_rate
    out: list[str] = []
    for symbol in record.sequence:
        u = rng.random()
        if u < ins:
            out.append(DNA_ALPHABET[rng.integers(0, 4)])
            out.append(symbol)
        elif u < ins + dele:
            continue
        elif u < ins + dele + sub:
            choices = DNA_ALPHABET.replace(symbol, "")
            out.append(choices[rng.integers(0, 3)])
        else:
            out.append(symbol)
    return SequenceRecord(record.identifier, "".join(out))


@dataclass(frozen=True)
class FamilyBranch:
    """One edge of a family tree: mutate the parent, then recurse.

    Nodes without children are the family's observed sequences.
    """

    name: str
    mutation: MutationParams
    children: tuple["FamilyBranch", ...] = field(default_factory=tuple)


def random_sequence(length: int, rng_seed: int = 0) -> SequenceRecord:
    """Uniform random ACGT sequence, used as a family ancestor."""
    rng = np.random.default_rng(rng_seed)
    symbols = rng.integers(0, 4, size=length)
    return SequenceRecord("ancestor", "".join(DNA_ALPHABET[i] for i in symbols))


def make_family(
    ancestor_length: int,
    branches: tuple[FamilyBranch, ...],
    rng_seed: int = 0,
) -> tuple[list[SequenceRecord], DistanceMatrix]:
    """Evolve sequences along a branching description.

    Returns the leaf sequences together with their exact pairwise
    Levenshtein matrix, which serves as the ground-truth reference for
    estimator evaluation.
    """
    if not branches:
        raise ValueError("family needs at least one branch")
    ancestor = random_sequence(ancestor_length, rng_seed)
    leaves: list[SequenceRecord] = []

    def walk(parent: SequenceRecord, branch: FamilyBranch) -> None:
        mutation = MutationParams(
            substitution_rate=branch.mutation.substitution_rate,
            insertion_rate=branch.mutation.insertion_rate,
            deletion_rate=branch.mutation.deletion_rate,
            rng_seed=_derive_seed(rng_seed, branch.name),
        )
        node = mutate(SequenceRecord(branch.name, parent.sequence), mutation)
        if branch.children:
            for child in branch.children:
                walk(node, child)
        else:
            leaves.append(node)

    for branch in branches:
        walk(ancestor, branch)

    n = len(leaves)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = float(levenshtein(leaves[i].sequence, leaves[j].sequence))
            values[i, j] = values[j, i] = d
    labels = tuple(leaf.identifier for leaf in leaves)
    return leaves, DistanceMatrix(labels, values)
