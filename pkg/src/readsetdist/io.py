"""File formats: FASTA, plain read lists, and square PHYLIP matrices.

Read files may start with a sidecar metadata line such as

    #coverage=3 #readlen=100

carrying the sequencing parameters that FASTA itself cannot express.
"""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .core import ReadSet, SequenceRecord, normalize_sequence
from .distance import DistanceMatrix


class FastaError(ValueError):
    """Raised on malformed FASTA input, with file and line context."""


def read_fasta(path: str | Path, *, replace_n: bool = False) -> list[SequenceRecord]:
    """Parse FASTA records, upper-casing and validating sequences.

    Records containing non-ACGT symbols are skipped with a warning
    unless ``replace_n`` maps N to A first.  Leading '#' comment lines
    are ignored.
    """
    path = Path(path)
    records: list[SequenceRecord] = []
    identifier: str | None = None
    chunks: list[str] = []

    def flush(line_no: int) -> None:
        if identifier is None:
            return
        seq = normalize_sequence(
            "".join(chunks), replace_n=replace_n, name=f"record {identifier!r}"
        )
        if seq is not None:
            records.append(SequenceRecord(identifier, seq))

    with path.open() as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith(">"):
                flush(line_no)
                identifier = line[1:].split()[0] if line[1:].split() else None
                if identifier is None:
                    raise FastaError(f"{path}:{line_no}: empty FASTA header")
                chunks = []
            else:
                if identifier is None:
                    raise FastaError(
                        f"{path}:{line_no}: sequence data before any '>' header"
                    )
                chunks.append(line)
        flush(-1)
    if not records:
        raise FastaError(f"{path}: no valid FASTA records found")
    return records


def write_fasta(records: list[SequenceRecord], path: str | Path,
                header_comment: str | None = None) -> None:
    path = Path(path)
    with path.open("w") as handle:
        if header_comment:
            handle.write(f"#{header_comment}\n")
        for record in records:
            handle.write(f">{record.identifier}\n")
            seq = record.sequence
            for i in range(0, len(seq), 70):
                handle.write(seq[i : i + 70] + "\n")


_SIDE_CAR = re.compile(r"#(coverage|readlen)=([0-9.]+)")


def load_read_set(
    path: str | Path,
    *,
    label: str | None = None,
    coverage: float | None = None,
    read_length: int | None = None,
    replace_n: bool = False,
) -> ReadSet:
    """Load a read set from FASTA or one-read-per-line text.

    Sidecar '#coverage=... #readlen=...' metadata at the top of the file
    is honored, but explicit arguments win.
    """
    path = Path(path)
    if label is None:
        label = path.name
        for suffix in (".reads.fa", ".reads.fasta", ".fa", ".fasta", ".txt", ".reads"):
            if label.endswith(suffix):
                label = label[: -len(suffix)]
                break
    file_cov: float | None = None
    file_len: int | None = None
    reads: list[str] = []
    is_fasta = False
    with path.open() as handle:
        lines = handle.readlines()
    body_start = 0
    for line in lines:
        stripped = line.strip()
        if stripped.startswith("#"):
            for key, value in _SIDE_CAR.findall(stripped):
                if key == "coverage":
                    file_cov = float(value)
                else:
                    file_len = int(float(value))
            body_start += 1
            continue
        if stripped == "":
            body_start += 1
            continue
        is_fasta = stripped.startswith(">")
        break

    if is_fasta:
        records = read_fasta(path, replace_n=replace_n)
        reads = [r.sequence for r in records]
    else:
        for line_no, line in enumerate(lines[body_start:], start=body_start + 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            seq = normalize_sequence(
                stripped, replace_n=replace_n, name=f"{path}:{line_no}"
            )
            if seq is not None:
                reads.append(seq)
    if not reads:
        raise FastaError(f"{path}: no valid reads found")
    return ReadSet(
        label=label,
        reads=tuple(reads),
        declared_coverage=coverage if coverage is not None else file_cov,
        declared_read_length=read_length if read_length is not None else file_len,
    )


def write_phylip(matrix: DistanceMatrix, path: str | Path) -> None:
    """Write a square PHYLIP matrix with 6-decimal fixed-point values."""
    path = Path(path)
    with path.open("w") as handle:
        handle.write(f"{len(matrix)}\n")
        for label, row in zip(matrix.labels, matrix.values):
            if len(label) > 64 or any(c.isspace() for c in label):
                raise ValueError(f"label {label!r} not representable in PHYLIP")
            cells = " ".join(f"{v:.6f}" for v in row)
            handle.write(f"{label} {cells}\n")


def read_phylip(path: str | Path) -> DistanceMatrix:
    path = Path(path)
    with path.open() as handle:
        lines = [line.strip() for line in handle if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    try:
        n = int(lines[0])
    except ValueError as exc:
        raise ValueError(f"{path}:1: expected the item count") from exc
    if len(lines) != n + 1:
        raise ValueError(f"{path}: expected {n} rows, found {len(lines) - 1}")
    labels: list[str] = []
    values = np.zeros((n, n))
    for i, line in enumerate(lines[1:]):
        parts = line.split()
        if len(parts) != n + 1:
            raise ValueError(
                f"{path}:{i + 2}: expected a label and {n} values, got {len(parts)} fields"
            )
        labels.append(parts[0])
        values[i] = [float(x) for x in parts[1:]]
    values = 0.5 * (values + values.T)  # heal 6-decimal rounding asymmetry
    np.fill_diagonal(values, 0.0)
    return DistanceMatrix(tuple(labels), values)
