"""Command-line interface.

Subcommands: simulate, dist, cluster, eval, and pipeline (which chains
the other four).  Every subcommand is deterministic given its inputs and
--seed, and exits nonzero unless all requested outputs were written.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import statistics
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .alignment import MarginGapParams, levenshtein
from .core import SequenceRecord
from .distance import (
    DistanceMatrix,
    EmbeddingConfig,
    MatchConfig,
    PRESETS,
    distance_matrix,
    preset_config,
)
from .io import load_read_set, read_fasta, read_phylip, write_fasta, write_phylip
from .newick import parse_newick, write_newick
from .phylo import PhyloTree, cut_tree, fowlkes_mallows, neighbor_joining, pearson, upgma
from .simulate import SimulationParams, sample_reads

log = logging.getLogger("readsetdist")


def _default_threads() -> int:
    env = os.environ.get("READSET_DIST_THREADS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _add_simulation_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--coverage", type=float, required=True,
                        help="coverage alpha (reads per position on average)")
    parser.add_argument("--read-length", type=int, required=True,
                        help="read length l")
    parser.add_argument("--strand-noise", action="store_true",
                        help="complement each read with probability 1/2")
    parser.add_argument("--orientation-noise", action="store_true",
                        help="reverse each read with probability 1/2")


def _add_dist_flags(parser: argparse.ArgumentParser, *, with_data_flags: bool = True) -> None:
    parser.add_argument("--preset", choices=PRESETS, default="messg",
                        help="estimator ladder rung (default: messg)")
    parser.add_argument("--baseline-maxsize", action="store_true",
                        help="shortcut for --preset maxsize")
    if with_data_flags:
        parser.add_argument("--coverage", type=float, default=None,
                            help="declared coverage alpha (overrides sidecar metadata)")
        parser.add_argument("--read-length", type=int, default=None,
                            help="declared read length l (overrides sidecar metadata)")
        parser.add_argument("--replace-n", action="store_true",
                            help="replace N symbols by A instead of skipping reads")
    parser.add_argument("--strand-known", action="store_true",
                        help="reads all come from the same strand")
    parser.add_argument("--orientation-known", action="store_true",
                        help="read orientation (5' to 3') is known")
    parser.add_argument("--margin-t", type=float, default=None,
                        help="override the derived grace margin size t")
    parser.add_argument("--threshold-fraction", type=float, default=None,
                        help="override the missing-read threshold theta'")
    parser.add_argument("--no-threshold", action="store_true",
                        help="disable the missing-read threshold")
    parser.add_argument("--candidates", type=int, default=None,
                        help="override the q-gram candidate count")
    parser.add_argument("--sample-coverage", type=float, default=None,
                        help="override the down-sampling target coverage")
    parser.add_argument("--no-sampling", action="store_true",
                        help="disable down-sampling")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker count (default: READSET_DIST_THREADS or all cores)")


def _build_config(args: argparse.Namespace) -> MatchConfig:
    preset = "maxsize" if args.baseline_maxsize else args.preset
    needs_margin = preset in ("messg", "messgm", "messgq") and args.margin_t is None
    if needs_margin and (args.coverage is None or args.read_length is None):
        raise SystemExit(
            f"preset {preset!r} needs --coverage and --read-length "
            "(or --margin-t) to derive the grace margin"
        )
    if preset in ("messg", "messgm", "messgq") and args.margin_t is not None:
        # bypass the derivation; start from mess and attach the margin
        cfg = preset_config(
            "mess",
            strand_known=args.strand_known,
            orientation_known=args.orientation_known,
            rng_seed=args.seed,
        )
        cfg = dataclasses.replace(cfg, margin_gaps=MarginGapParams(args.margin_t))
        if preset in ("messgm", "messgq"):
            cfg = dataclasses.replace(
                cfg, threshold_fraction=args.threshold_fraction or 0.35
            )
        if preset == "messgq":
            cfg = dataclasses.replace(
                cfg,
                embedding=EmbeddingConfig(candidate_count=args.candidates or 5),
                sample_to_coverage=args.sample_coverage or 2.0,
            )
        log.info("using explicit margin t=%s", args.margin_t)
    else:
        cfg = preset_config(
            preset,
            coverage=args.coverage,
            read_length=args.read_length,
            strand_known=args.strand_known,
            orientation_known=args.orientation_known,
            rng_seed=args.seed,
        )
    if args.threshold_fraction is not None and cfg.threshold_fraction is not None:
        cfg = dataclasses.replace(cfg, threshold_fraction=args.threshold_fraction)
        log.info("threshold fraction overridden to %s", args.threshold_fraction)
    if args.no_threshold:
        cfg = dataclasses.replace(cfg, threshold_fraction=None)
        log.info("missing-read threshold disabled")
    if args.candidates is not None and cfg.embedding is not None:
        cfg = dataclasses.replace(
            cfg, embedding=dataclasses.replace(cfg.embedding,
                                               candidate_count=args.candidates)
        )
        log.info("candidate count overridden to %s", args.candidates)
    if args.sample_coverage is not None and cfg.sample_to_coverage is not None:
        cfg = dataclasses.replace(cfg, sample_to_coverage=args.sample_coverage)
        log.info("sampling coverage overridden to %s", args.sample_coverage)
    if args.no_sampling:
        cfg = dataclasses.replace(cfg, sample_to_coverage=None)
        log.info("down-sampling disabled")
    return cfg


def cmd_simulate(args: argparse.Namespace) -> int:
    records = read_fasta(args.fasta, replace_n=args.replace_n)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = SimulationParams(
        alpha=args.coverage,
        l=args.read_length,
        strand_noise=args.strand_noise,
        orientation_noise=args.orientation_noise,
        rng_seed=args.seed,
    )
    for record in records:
        read_set = sample_reads(record, params)
        out = out_dir / f"{record.identifier}.reads.fa"
        reads = [
            SequenceRecord(f"{record.identifier}_r{i}", r)
            for i, r in enumerate(read_set.reads)
        ]
        write_fasta(
            reads, out,
            header_comment=f"coverage={args.coverage} #readlen={args.read_length}",
        )
        log.info("wrote %d reads to %s", len(reads), out)
    return 0


def _load_sets(args: argparse.Namespace):
    return [
        load_read_set(
            path,
            coverage=args.coverage,
            read_length=args.read_length,
            replace_n=args.replace_n,
        )
        for path in args.read_sets
    ]


def cmd_dist(args: argparse.Namespace) -> int:
    if len(args.read_sets) < 2:
        raise SystemExit("need at least two read-set files")
    sets = _load_sets(args)
    # flags win over sidecar metadata; fall back to the sets' declarations
    if args.coverage is None:
        declared = [rs.declared_coverage for rs in sets if rs.declared_coverage]
        if declared:
            args.coverage = statistics.median(declared)
            log.info("using declared coverage %s", args.coverage)
    if args.read_length is None:
        declared = [rs.declared_read_length for rs in sets if rs.declared_read_length]
        if declared:
            args.read_length = int(statistics.median(declared))
            log.info("using declared read length %s", args.read_length)
    cfg = _build_config(args)
    threads = args.threads if args.threads is not None else _default_threads()
    matrix = distance_matrix(sets, cfg, threads=threads)
    write_phylip(matrix, args.output)
    log.info("wrote %dx%d matrix to %s", len(matrix), len(matrix), args.output)
    return 0


def cmd_cluster(args: argparse.Namespace) -> int:
    matrix = read_phylip(args.matrix)
    tree = upgma(matrix) if args.method == "upgma" else neighbor_joining(matrix)
    Path(args.output).write_text(write_newick(tree))
    log.info("wrote %s tree to %s", args.method, args.output)
    return 0


def _is_ultrametric(tree: PhyloTree, tol: float = 1e-6) -> bool:
    depths: list[float] = []

    def walk(node, depth):
        if node.is_leaf:
            depths.append(depth)
        for child in node.children:
            walk(child, depth + child.branch_length)

    walk(tree.root, 0.0)
    return max(depths) - min(depths) <= tol


def cmd_eval(args: argparse.Namespace) -> int:
    if args.metric == "pearson":
        m1 = read_phylip(args.inputs[0])
        m2 = read_phylip(args.inputs[1])
        if set(m1.labels) != set(m2.labels):
            missing = set(m1.labels) ^ set(m2.labels)
            raise SystemExit(f"label sets differ; unmatched: {sorted(missing)}")
        if m1.labels != m2.labels:
            order = [m2.labels.index(lbl) for lbl in m1.labels]
            m2 = DistanceMatrix(m1.labels, m2.values[np.ix_(order, order)])
        r = pearson(m1, m2)
        print("pearson undefined" if r is None else f"pearson {r:.6f}")
        return 0
    trees = []
    for path in args.inputs:
        text = Path(path).read_text()
        tree = parse_newick(text)
        tree.ultrametric = _is_ultrametric(tree)
        if tree.ultrametric:
            tree = parse_newick(text, ultrametric=True)
        trees.append(tree)
    t1, t2 = trees
    labels1, labels2 = set(t1.leaf_labels()), set(t2.leaf_labels())
    if labels1 != labels2:
        raise SystemExit(f"leaf label sets differ; unmatched: {sorted(labels1 ^ labels2)}")
    n = len(labels1)
    print("k B_k")
    for k in range(2, n):
        bk = fowlkes_mallows(cut_tree(t1, k), cut_tree(t2, k))
        print(f"{k} {bk:.6f}")
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = read_fasta(args.fasta, replace_n=args.replace_n)
    if len(records) < 3:
        raise SystemExit("pipeline needs at least three sequences")
    params = SimulationParams(
        alpha=args.coverage,
        l=args.read_length,
        strand_noise=args.strand_noise,
        orientation_noise=args.orientation_noise,
        rng_seed=args.seed,
    )
    sets = [sample_reads(record, params) for record in records]
    # if noise was injected, the matching config must not assume knowledge
    args.strand_known = not args.strand_noise
    args.orientation_known = not args.orientation_noise
    cfg = _build_config(args)
    threads = args.threads if args.threads is not None else _default_threads()
    estimated = distance_matrix(sets, cfg, threads=threads)
    write_phylip(estimated, out_dir / "estimated.phylip")

    n = len(records)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = float(levenshtein(records[i].sequence, records[j].sequence))
            values[i, j] = values[j, i] = d
    reference = DistanceMatrix(tuple(r.identifier for r in records), values)
    write_phylip(reference, out_dir / "reference.phylip")

    build = upgma if args.method == "upgma" else neighbor_joining
    est_tree = build(estimated)
    ref_tree = build(reference)
    (out_dir / "estimated.nwk").write_text(write_newick(est_tree))
    (out_dir / "reference.nwk").write_text(write_newick(ref_tree))

    report = []
    r = pearson(reference, estimated)
    report.append("pearson undefined" if r is None else f"pearson {r:.6f}")
    report.append("k B_k")
    for k in range(2, n):
        bk = fowlkes_mallows(cut_tree(ref_tree, k), cut_tree(est_tree, k))
        report.append(f"{k} {bk:.6f}")
    text = "\n".join(report) + "\n"
    (out_dir / "report.txt").write_text(text)
    print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="readsetdist",
        description="Estimate edit distances between DNA sequences from read sets "
                    "and build phylogenetic trees from them.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample read sets from FASTA sequences")
    p.add_argument("fasta", help="input FASTA with source sequences")
    _add_simulation_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replace-n", action="store_true")
    p.add_argument("--out-dir", default=".", help="directory for <id>.reads.fa files")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dist", help="compute a read-set distance matrix")
    p.add_argument("read_sets", nargs="+", help="read-set files (FASTA or one per line)")
    _add_dist_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="output PHYLIP matrix file")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("cluster", help="build a tree from a distance matrix")
    p.add_argument("matrix", help="square PHYLIP matrix file")
    p.add_argument("--method", choices=("upgma", "nj"), default="upgma")
    p.add_argument("-o", "--output", required=True, help="output Newick file")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("eval", help="compare matrices or trees")
    p.add_argument("inputs", nargs=2,
                   help="two PHYLIP matrices (pearson) or two Newick trees (fm)")
    p.add_argument("--metric", choices=("pearson", "fm"), required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline",
                       help="simulate reads, estimate distances, cluster, evaluate")
    p.add_argument("fasta", help="input FASTA with source sequences")
    _add_simulation_flags(p)
    _add_dist_flags(p, with_data_flags=False)
    p.add_argument("--replace-n", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("upgma", "nj"), default="upgma")
    p.add_argument("--out-dir", default=".", help="directory for all outputs")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
