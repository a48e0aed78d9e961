"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[acceptance NN] ... PASS/FAIL`` line so a
plain ``pytest -s tests/test_acceptance.py`` doubles as a checklist.
The heavyweight simulated family (criteria 08 and 10) is built once per
module.
"""
from __future__ import annotations

import dataclasses
import itertools
import random

import numpy as np
import pytest
from numba import njit

from readsetdist import (
    DistanceMatrix,
    EmbeddingConfig,
    FamilyBranch,
    MarginGapParams,
    MatchConfig,
    MutationParams,
    ReadSet,
    SimulationParams,
    cut_tree,
    distance_matrix,
    fowlkes_mallows,
    leaf_path_distances,
    levenshtein,
    make_family,
    margin_gap_levenshtein,
    mes,
    neighbor_joining,
    pearson,
    preset_config,
    qgram_distance,
    sample_reads,
    set_distance,
    upgma,
)
from readsetdist.cli import main as cli_main
from readsetdist.io import write_fasta
from readsetdist.core import SequenceRecord

from conftest import ALPHABET, oracle_mes, random_read

DESK_SEED = 20240824

PLAIN = MatchConfig()


def _report(num: int, name: str, ok: bool) -> None:
    print(f"[acceptance {num:02d}] {name}: {'PASS' if ok else 'FAIL'}")


def _read_set(label: str, reads, **kw) -> ReadSet:
    return ReadSet(label, tuple(reads), **kw)


# --- criterion 1 -----------------------------------------------------------

def test_01_counterexample_values():
    a = _read_set("A", ["ATC", "ATC", "GGG"])
    b = _read_set("B", ["ATA", "GGG"])
    c = _read_set("C", ["CTA", "GGG"])
    d_ab = mes(a, b, PLAIN)
    d_bc = mes(b, c, PLAIN)
    d_ac = mes(a, c, PLAIN)
    ok = (
        abs(d_ab - 7 / 12) < 1e-9
        and abs(d_bc - 1 / 2) < 1e-9
        and abs(d_ac - 14 / 12) < 1e-9
        and d_ac > d_ab + d_bc
    )
    _report(1, "counterexample values and triangle violation", ok)
    assert ok, (d_ab, d_bc, d_ac)


# --- criterion 2 -----------------------------------------------------------

@njit(cache=True)
def _scan_short_pairs(strs, lens, profiles):
    """Count (lev, qgram) lower-bound violations over all string pairs."""
    n = strs.shape[0]
    width = strs.shape[1] + 1
    row = np.empty(width, np.int64)
    violations = 0
    for i in range(n):
        la = lens[i]
        for j in range(i, n):
            lb = lens[j]
            for col in range(lb + 1):
                row[col] = col
            for r in range(1, la + 1):
                prev = row[0]
                row[0] = r
                for col in range(1, lb + 1):
                    cost = 0 if strs[i, r - 1] == strs[j, col - 1] else 1
                    cur = min(prev + cost, row[col] + 1, row[col - 1] + 1)
                    prev = row[col]
                    row[col] = cur
            d = row[lb]
            qd = 0
            for k in range(64):
                qd += abs(profiles[i, k] - profiles[j, k])
            if 6 * d < qd:
                violations += 1
    return violations


def test_02_qgram_lower_bound():
    symbols = list(range(4))
    words = []
    for length in range(7):
        words.extend(itertools.product(symbols, repeat=length))
    strs = np.zeros((len(words), 6), np.uint8)
    lens = np.zeros(len(words), np.int64)
    profiles = np.zeros((len(words), 64), np.int64)
    for i, word in enumerate(words):
        lens[i] = len(word)
        for pos, sym in enumerate(word):
            strs[i, pos] = sym
        for pos in range(len(word) - 2):
            code = 16 * word[pos] + 4 * word[pos + 1] + word[pos + 2]
            profiles[i, code] += 1
    violations = _scan_short_pairs(strs, lens, profiles)

    rng = random.Random(2)
    for _ in range(10_000):
        a = random_read(rng, 50, min_len=0)
        b = random_read(rng, 50, min_len=0)
        if 6 * levenshtein(a, b) < qgram_distance(a, b, 3):
            violations += 1

    ok = violations == 0
    _report(2, "levenshtein >= qgram/6, exhaustive and random", ok)
    assert ok, violations


# --- criterion 3 -----------------------------------------------------------

def test_03_penalty_schedule_identity():
    worst = 0.0
    for l in range(2, 201):
        t = 0.0
        while t < l / 2:
            params = MarginGapParams(t)
            total = sum(params.penalty(x, l) for x in range(l))
            worst = max(worst, abs(total - l))
            t += 0.5
    rng = random.Random(3)
    for _ in range(100):
        w = random_read(rng, 60, min_len=4)
        t = 0.5 * rng.randrange(len(w) - 1)  # keeps t < |w|/2
        d = margin_gap_levenshtein(w, "", MarginGapParams(t))
        worst = max(worst, abs(d - len(w)))
    ok = worst < 1e-9
    _report(3, "penalty schedule sums to l, empty word exact", ok)
    assert ok, worst


# --- criterion 4 -----------------------------------------------------------

def test_04_shifted_reads():
    rng = random.Random(4)
    l = 50
    bad = 0
    for _ in range(1000):
        t = rng.randint(1, 24)
        seq = random_read(rng, l + 25, min_len=l + 25)
        params = MarginGapParams(float(t))
        s_free = rng.randint(0, t)
        s_paid = rng.randint(t + 1, 25)
        free = margin_gap_levenshtein(seq[:l], seq[s_free : s_free + l], params)
        paid = margin_gap_levenshtein(seq[:l], seq[s_paid : s_paid + l], params)
        if free != 0.0 or not paid > 0.0:
            bad += 1
    ok = bad == 0
    _report(4, "shift within margin is free, beyond is penalized", ok)
    assert ok, bad


# --- criterion 5 -----------------------------------------------------------

def test_05_oracle_equivalence():
    rng = random.Random(5)
    mismatches = 0
    for _ in range(500):
        a = _read_set("a", [random_read(rng, 8) for _ in range(rng.randint(1, 8))])
        b = _read_set("b", [random_read(rng, 8) for _ in range(rng.randint(1, 8))])
        expected = oracle_mes(a.reads, b.reads, transforms=[lambda r: r])
        if mes(a, b, PLAIN) != expected:
            mismatches += 1
    ok = mismatches == 0
    _report(5, "mes matches brute-force oracle exactly", ok)
    assert ok, mismatches


# --- criterion 6 -----------------------------------------------------------

def test_06_duplication_law():
    rng = random.Random(6)
    scaled_cfg = dataclasses.replace(PLAIN, use_scaling=True)
    bad = 0
    for _ in range(100):
        size_s = rng.randint(1, 6)
        size_r = rng.randint(size_s, 8)  # |R| >= |S| for the doubling claim
        r = _read_set("r", [random_read(rng, 8) for _ in range(size_r)])
        s = _read_set("s", [random_read(rng, 8) for _ in range(size_s)])
        rr = _read_set("r", r.reads + r.reads)
        if mes(rr, s, PLAIN) != mes(r, s, PLAIN):
            bad += 1
        if set_distance(rr, s, scaled_cfg) != 2 * set_distance(r, s, scaled_cfg):
            bad += 1
    ok = bad == 0
    _report(6, "duplicating a set leaves mes unchanged, doubles scaled", ok)
    assert ok, bad


# --- criterion 7 -----------------------------------------------------------

def test_07_embedding_upper_bound():
    rng = random.Random(7)
    cfg_q = preset_config("messgq", coverage=3.0, read_length=30, rng_seed=7)
    cfg_exact = dataclasses.replace(cfg_q, embedding=None)
    bad = 0
    for case in range(100):
        sets = []
        for side in "ab":
            seq = SequenceRecord(f"{side}{case}", random_read(rng, 600, min_len=600))
            params = SimulationParams(alpha=3.0, l=30, rng_seed=rng.randrange(10**6))
            sets.append(sample_reads(seq, params))
        a, b = sets
        approx = set_distance(a, b, cfg_q)
        exact = set_distance(a, b, cfg_exact)
        if not approx >= exact - 1e-9:
            bad += 1
        cfg_full = dataclasses.replace(
            cfg_q, embedding=EmbeddingConfig(candidate_count=len(b.reads))
        )
        if abs(set_distance(a, b, cfg_full) - exact) > 1e-12:
            bad += 1
    ok = bad == 0
    _report(7, "candidate pre-selection only overestimates", ok)
    assert ok, bad


# --- criteria 8 and 10 share the simulated family --------------------------

def _chain(step: MutationParams, depth: int) -> FamilyBranch:
    node = FamilyBranch(f"c{depth - 1}", step)
    for i in range(depth - 2, -1, -1):
        node = FamilyBranch(
            f"c{i}", step, (FamilyBranch(f"c{i}leaf", MutationParams()), node)
        )
    return node


@pytest.fixture(scope="module")
def desk_family(tmp_path_factory):
    step = MutationParams(
        substitution_rate=0.02, insertion_rate=0.005, deletion_rate=0.005
    )
    star = tuple(
        FamilyBranch(
            f"s{i}",
            MutationParams(
                substitution_rate=rate, insertion_rate=rate / 4, deletion_rate=rate / 4
            ),
        )
        for i, rate in enumerate((0.01, 0.03, 0.06, 0.10, 0.15))
    )
    leaves, reference = make_family(3000, (*star, _chain(step, 5)), rng_seed=DESK_SEED)
    sets = []
    files = []
    out_dir = tmp_path_factory.mktemp("desk")
    for leaf in leaves:
        params = SimulationParams(
            alpha=3.0, l=100, strand_noise=True, orientation_noise=True,
            rng_seed=DESK_SEED,
        )
        rs = sample_reads(leaf, params)
        sets.append(rs)
        path = out_dir / f"{leaf.identifier}.reads.fa"
        records = [
            SequenceRecord(f"{leaf.identifier}_r{i}", read)
            for i, read in enumerate(rs.reads)
        ]
        write_fasta(records, path, header_comment="coverage=3.0 #readlen=100")
        files.append(str(path))
    return sets, reference, files, out_dir


def _aligned_reference(reference: DistanceMatrix, labels) -> DistanceMatrix:
    order = [reference.labels.index(label) for label in labels]
    return DistanceMatrix(tuple(labels), reference.values[np.ix_(order, order)])


def test_08_desk_scale_correlation(desk_family):
    sets, reference, _, _ = desk_family
    correlations = {}
    for preset in ("mes", "messg"):
        cfg = preset_config(preset, coverage=3.0, read_length=100)
        estimated = distance_matrix(sets, cfg)
        correlations[preset] = pearson(
            estimated, _aligned_reference(reference, estimated.labels)
        )
    ok = correlations["messg"] >= 0.8 and correlations["messg"] >= correlations["mes"]
    _report(8, f"simulated family correlation {correlations}", ok)
    assert ok, correlations


# --- criterion 9 -----------------------------------------------------------

def _random_additive_matrix(seed: int, n: int = 6) -> DistanceMatrix:
    """Path metric of a random binary tree, by merging leaf-distance maps."""
    rng = random.Random(seed)
    labels = [f"t{i}" for i in range(n)]
    live = [{label: 0.0} for label in labels]
    values = np.zeros((n, n))
    index = {label: i for i, label in enumerate(labels)}
    while len(live) > 1:
        a = live.pop(rng.randrange(len(live)))
        b = live.pop(rng.randrange(len(live)))
        la, lb = rng.uniform(1, 9), rng.uniform(1, 9)
        for leaf_a, da in a.items():
            for leaf_b, db in b.items():
                i, j = index[leaf_a], index[leaf_b]
                values[i, j] = values[j, i] = da + la + db + lb
        merged = {leaf: d + la for leaf, d in a.items()}
        merged.update({leaf: d + lb for leaf, d in b.items()})
        live.append(merged)
    return DistanceMatrix(tuple(labels), values)


def test_09_clustering_metrics():
    additive = _random_additive_matrix(9)
    tree = upgma(additive)
    bk_ok = all(
        fowlkes_mallows(cut_tree(tree, k), cut_tree(tree, k)) == 1.0
        for k in range(2, len(additive))
    )

    ultra = leaf_path_distances(tree)
    rebuilt = leaf_path_distances(upgma(ultra))
    upgma_err = np.abs(rebuilt.values - ultra.values).max()

    recovered = leaf_path_distances(neighbor_joining(additive))
    order = [additive.labels.index(label) for label in recovered.labels]
    nj_err = np.abs(recovered.values - additive.values[np.ix_(order, order)]).max()

    ok = bk_ok and upgma_err < 1e-9 and nj_err < 1e-6
    _report(9, "B_k identity, UPGMA and NJ reconstruction", ok)
    assert ok, (bk_ok, upgma_err, nj_err)


# --- criterion 10 ----------------------------------------------------------

def test_10_thread_count_determinism(desk_family):
    _, _, files, out_dir = desk_family
    outputs = []
    for threads in ("1", "8"):
        out = out_dir / f"threads{threads}.phylip"
        rc = cli_main(
            ["dist", *files, "--preset", "messg", "--threads", threads,
             "-o", str(out)]
        )
        assert rc == 0
        outputs.append(out.read_bytes())
    ok = outputs[0] == outputs[1]
    _report(10, "distance matrix independent of thread count", ok)
    assert ok
