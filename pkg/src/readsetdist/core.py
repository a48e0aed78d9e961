"""DNA alphabet, reads, read sets and strand/orientation transforms.

A read is a plain ``str`` over the four-letter alphabet ACGT.  Read sets
are immutable multisets of reads (duplicates preserved and counted).
"""
from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field
from statistics import median

DNA_ALPHABET = "ACGT"
_ALPHABET_SET = frozenset(DNA_ALPHABET)
_COMPLEMENT_TABLE = str.maketrans("ACGT", "TGCA")


class InvalidSequenceError(ValueError):
    """Raised when a sequence contains symbols outside ACGT."""


def complement(read: str) -> str:
    """Swap A with T and C with G, position by position."""
    return read.translate(_COMPLEMENT_TABLE)


def reverse(read: str) -> str:
    """Reverse the symbol order."""
    return read[::-1]


def reverse_complement(read: str) -> str:
    """Complement then reverse (the two transforms commute)."""
    return read.translate(_COMPLEMENT_TABLE)[::-1]


def validate_sequence(seq: str, *, name: str = "sequence") -> str:
    """Return ``seq`` if it is a valid ACGT string, else raise."""
    bad = set(seq) - _ALPHABET_SET
    if bad:
        raise InvalidSequenceError(
            f"{name} contains symbols outside ACGT: {sorted(bad)!r}"
        )
    return seq


def normalize_sequence(seq: str, *, replace_n: bool = False,
                       name: str = "sequence") -> str | None:
    """Upper-case ``seq`` and resolve non-ACGT symbols.

    With ``replace_n`` every N is deterministically replaced by A.
    Sequences that still contain foreign symbols are rejected: a warning
    is emitted and ``None`` returned so callers can skip the record.
    """
    seq = seq.upper()
    if replace_n:
        seq = seq.replace("N", "A")
    if set(seq) <= _ALPHABET_SET:
        return seq
    warnings.warn(f"skipping {name}: contains symbols outside ACGT")
    return None


@dataclass(frozen=True)
class SequenceRecord:
    """A labeled DNA sequence, e.g. one FASTA record."""

    identifier: str
    sequence: str

    def __post_init__(self) -> None:
        validate_sequence(self.sequence, name=f"sequence {self.identifier!r}")

    def __len__(self) -> int:
        return len(self.sequence)


@dataclass(frozen=True)
class ReadSet:
    """An immutable multiset of reads sampled from one source sequence.

    ``declared_coverage`` and ``declared_read_length`` carry the sequencing
    parameters (alpha, l) when known; they feed the grace-margin formula
    and down-sampling.
    """

    label: str
    reads: tuple[str, ...]
    declared_coverage: float | None = None
    declared_read_length: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "reads", tuple(self.reads))
        for r in self.reads:
            validate_sequence(r, name=f"read in set {self.label!r}")
            if len(r) < 1:
                raise InvalidSequenceError(
                    f"empty read in set {self.label!r}"
                )
        if self.declared_coverage is not None and self.declared_coverage <= 0:
            raise ValueError("declared_coverage must be positive")
        if self.declared_read_length is not None and self.declared_read_length < 1:
            raise ValueError("declared_read_length must be positive")

    def __len__(self) -> int:
        return len(self.reads)

    def as_multiset(self) -> Counter[str]:
        """Order-insensitive view; use for multiset equality."""
        return Counter(self.reads)

    def read_length(self) -> int:
        """Declared read length, or the median of the actual lengths."""
        if self.declared_read_length is not None:
            return self.declared_read_length
        if not self.reads:
            raise ValueError(f"read set {self.label!r} is empty")
        return int(median(len(r) for r in self.reads))
