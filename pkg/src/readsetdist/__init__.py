"""Estimate edit distances between DNA sequences directly from read sets.

The package avoids sequence assembly: distances between read multisets
are computed with Monge-Elkan style best-match averaging on top of
(margin-gap) Levenshtein distances, then fed to hierarchical clustering.
"""

__version__ = "0.1.0"

from .alignment import (
    MarginGapParams,
    QGramProfile,
    compute_margin_t,
    levenshtein,
    margin_gap_levenshtein,
    margin_gap_penalty,
    qgram_distance,
    qgram_profile,
)
from .core import (
    DNA_ALPHABET,
    InvalidSequenceError,
    ReadSet,
    SequenceRecord,
    complement,
    reverse,
    reverse_complement,
)
from .distance import (
    DistanceMatrix,
    EmbeddingConfig,
    MatchConfig,
    best_match_approx,
    distance_matrix,
    downsample,
    me_directed,
    mes,
    preset_config,
    set_distance,
    variant_distance,
)
from .phylo import (
    Clustering,
    PhyloTree,
    TreeNode,
    cut_tree,
    fowlkes_mallows,
    leaf_path_distances,
    neighbor_joining,
    pearson,
    upgma,
)
from .newick import parse_newick, write_newick
from .simulate import (
    FamilyBranch,
    MutationParams,
    SimulationParams,
    make_family,
    mutate,
    random_sequence,
    sample_reads,
)

__all__ = [
    "DNA_ALPHABET",
    "Clustering",
    "DistanceMatrix",
    "EmbeddingConfig",
    "FamilyBranch",
    "InvalidSequenceError",
    "MarginGapParams",
    "MatchConfig",
    "MutationParams",
    "PhyloTree",
    "QGramProfile",
    "ReadSet",
    "SequenceRecord",
    "SimulationParams",
    "TreeNode",
    "best_match_approx",
    "complement",
    "compute_margin_t",
    "cut_tree",
    "distance_matrix",
    "downsample",
    "fowlkes_mallows",
    "leaf_path_distances",
    "levenshtein",
    "make_family",
    "margin_gap_levenshtein",
    "margin_gap_penalty",
    "me_directed",
    "mes",
    "mutate",
    "neighbor_joining",
    "parse_newick",
    "pearson",
    "preset_config",
    "qgram_distance",
    "qgram_profile",
    "random_sequence",
    "reverse",
    "reverse_complement",
    "sample_reads",
    "set_distance",
    "upgma",
    "variant_distance",
    "write_newick",
]
