"""Hierarchical clustering of distance matrices and tree evaluation.

UPGMA and neighbor joining build trees, cut_tree turns a tree into a
k-clustering, and fowlkes_mallows / pearson compare clusterings and
matrices.  All tie-breaking is lexicographic on labels so repeated runs
are bit-identical across platforms.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .distance import DistanceMatrix


@dataclass
class TreeNode:
    """One tree node; ``branch_length`` is the length to the parent."""

    label: str | None = None
    children: list["TreeNode"] = field(default_factory=list)
    branch_length: float = 0.0
    height: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> list["TreeNode"]:
        if self.is_leaf:
            return [self]
        return [leaf for child in self.children for leaf in child.leaves()]

    def leaf_labels(self) -> list[str]:
        return [leaf.label for leaf in self.leaves()]


@dataclass
class PhyloTree:
    """A rooted tree over the labels of a distance matrix.

    ``ultrametric`` marks UPGMA trees, whose node heights drive tree
    cutting; NJ trees are cut by edge lengths instead.
    """

    root: TreeNode
    ultrametric: bool

    def leaf_labels(self) -> list[str]:
        return self.root.leaf_labels()


@dataclass(frozen=True)
class Clustering:
    """A partition of labels into non-empty disjoint blocks."""

    blocks: tuple[frozenset[str], ...]

    def __post_init__(self) -> None:
        blocks = tuple(frozenset(b) for b in self.blocks)
        if any(not b for b in blocks):
            raise ValueError("clustering blocks must be non-empty")
        total = sum(len(b) for b in blocks)
        if total != len(set().union(*blocks)):
            raise ValueError("clustering blocks must be disjoint")
        object.__setattr__(self, "blocks", blocks)

    @property
    def k(self) -> int:
        return len(self.blocks)

    def labels(self) -> frozenset[str]:
        return frozenset().union(*self.blocks)

    def as_assignment(self) -> dict[str, int]:
        return {label: i for i, block in enumerate(self.blocks) for label in block}


def _min_leaf(node: TreeNode) -> str:
    return min(node.leaf_labels())


def upgma(matrix: DistanceMatrix) -> PhyloTree:
    """Average-linkage agglomerative tree; node height is half the merge
    distance, so the tree is ultrametric by construction."""
    n = len(matrix)
    if n < 2:
        raise ValueError("need at least two items")
    clusters: dict[str, TreeNode] = {}
    sizes: dict[str, int] = {}
    dist: dict[frozenset[str], float] = {}
    for label in matrix.labels:
        clusters[label] = TreeNode(label=label)
        sizes[label] = 1
    for i, a in enumerate(matrix.labels):
        for j in range(i + 1, n):
            b = matrix.labels[j]
            dist[frozenset((a, b))] = float(matrix.values[i, j])

    while len(clusters) > 1:
        keys = sorted(clusters)
        best_pair = None
        best_d = math.inf
        for i, a in enumerate(keys):
            for b in keys[i + 1 :]:
                d = dist[frozenset((a, b))]
                if d < best_d:
                    best_d = d
                    best_pair = (a, b)
        a, b = best_pair
        height = best_d / 2.0
        node_a, node_b = clusters.pop(a), clusters.pop(b)
        node_a.branch_length = height - node_a.height
        node_b.branch_length = height - node_b.height
        merged = TreeNode(children=[node_a, node_b], height=height)
        size_a, size_b = sizes.pop(a), sizes.pop(b)
        key = min(a, b)
        for other in clusters:
            d = (
                size_a * dist.pop(frozenset((a, other)))
                + size_b * dist.pop(frozenset((b, other)))
            ) / (size_a + size_b)
            dist[frozenset((key, other))] = d
        dist.pop(frozenset((a, b)))
        clusters[key] = merged
        sizes[key] = size_a + size_b

    return PhyloTree(root=next(iter(clusters.values())), ultrametric=True)


def neighbor_joining(matrix: DistanceMatrix) -> PhyloTree:
    """Saitou-Nei neighbor joining, exact on additive matrices.

    The unrooted result is rendered rooted at the final three-way join.
    Negative inferred branch lengths are clamped to zero with a warning.
    """
    n = len(matrix)
    if n < 2:
        raise ValueError("need at least two items")

    def clamp(value: float) -> float:
        if value < 0:
            warnings.warn(f"negative branch length {value:.6g} clamped to 0")
            return 0.0
        return value

    nodes: dict[str, TreeNode] = {
        label: TreeNode(label=label) for label in matrix.labels
    }
    dist: dict[frozenset[str], float] = {}
    for i, a in enumerate(matrix.labels):
        for j in range(i + 1, n):
            b = matrix.labels[j]
            dist[frozenset((a, b))] = float(matrix.values[i, j])

    if n == 2:
        a, b = sorted(nodes)
        d = dist[frozenset((a, b))]
        for key in (a, b):
            nodes[key].branch_length = d / 2.0
        root = TreeNode(children=[nodes[a], nodes[b]])
        return PhyloTree(root=root, ultrametric=False)

    while len(nodes) > 3:
        keys = sorted(nodes)
        m = len(keys)
        row_sum = {
            a: sum(dist[frozenset((a, b))] for b in keys if b != a) for a in keys
        }
        best_pair = None
        best_q = math.inf
        for i, a in enumerate(keys):
            for b in keys[i + 1 :]:
                q = (m - 2) * dist[frozenset((a, b))] - row_sum[a] - row_sum[b]
                if q < best_q:
                    best_q = q
                    best_pair = (a, b)
        a, b = best_pair
        d_ab = dist[frozenset((a, b))]
        node_a, node_b = nodes.pop(a), nodes.pop(b)
        node_a.branch_length = clamp(
            0.5 * d_ab + (row_sum[a] - row_sum[b]) / (2.0 * (m - 2))
        )
        node_b.branch_length = clamp(d_ab - (
            0.5 * d_ab + (row_sum[a] - row_sum[b]) / (2.0 * (m - 2))
        ))
        key = min(a, b)
        merged = TreeNode(children=[node_a, node_b])
        for other in nodes:
            d = 0.5 * (
                dist.pop(frozenset((a, other)))
                + dist.pop(frozenset((b, other)))
                - d_ab
            )
            dist[frozenset((key, other))] = d
        dist.pop(frozenset((a, b)))
        nodes[key] = merged

    a, b, c = sorted(nodes)
    d_ab = dist[frozenset((a, b))]
    d_ac = dist[frozenset((a, c))]
    d_bc = dist[frozenset((b, c))]
    nodes[a].branch_length = clamp(0.5 * (d_ab + d_ac - d_bc))
    nodes[b].branch_length = clamp(0.5 * (d_ab + d_bc - d_ac))
    nodes[c].branch_length = clamp(0.5 * (d_ac + d_bc - d_ab))
    root = TreeNode(children=[nodes[a], nodes[b], nodes[c]])
    return PhyloTree(root=root, ultrametric=False)


def leaf_path_distances(tree: PhyloTree) -> DistanceMatrix:
    """Pairwise path lengths between leaves, summing branch lengths."""
    depths: dict[str, float] = {}
    paths: dict[str, list[TreeNode]] = {}

    def walk(node: TreeNode, depth: float, path: list[TreeNode]) -> None:
        if node.is_leaf:
            depths[node.label] = depth
            paths[node.label] = path + [node]
            return
        for child in node.children:
            walk(child, depth + child.branch_length, path + [node])

    walk(tree.root, 0.0, [])
    labels = tuple(sorted(depths))
    n = len(labels)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            pa, pb = paths[labels[i]], paths[labels[j]]
            shared = 0
            for x, y in zip(pa, pb):
                if x is y:
                    shared += 1
                else:
                    break
            lca_depth = sum(node.branch_length for node in pa[1:shared])
            values[i, j] = values[j, i] = (
                depths[labels[i]] + depths[labels[j]] - 2.0 * lca_depth
            )
    return DistanceMatrix(labels, values)


def cut_tree(tree: PhyloTree, k: int) -> Clustering:
    """Cut a tree into exactly k leaf blocks.

    UPGMA trees dissolve the k-1 highest internal nodes; NJ trees cut
    the longest internal edges first, then pendant edges if the internal
    ones run out.
    """
    n = len(tree.leaf_labels())
    if not 2 <= k <= n - 1:
        raise ValueError(f"k={k} outside valid range [2, {n - 1}]")
    if tree.ultrametric:
        return _cut_by_height(tree, k)
    return _cut_by_edges(tree, k)


def _cut_by_height(tree: PhyloTree, k: int) -> Clustering:
    roots = [tree.root]
    for _ in range(k - 1):
        internal = [r for r in roots if not r.is_leaf]
        # deterministic among equal heights: smallest leaf label wins
        best = sorted(internal, key=lambda r: (-r.height, _min_leaf(r)))[0]
        roots.remove(best)
        roots.extend(best.children)
    return Clustering(tuple(frozenset(r.leaf_labels()) for r in roots))


def _cut_by_edges(tree: PhyloTree, k: int) -> Clustering:
    edges = []  # (is_pendant, -length, canonical key, child)
    def collect(node: TreeNode) -> None:
        for child in node.children:
            edges.append((child.is_leaf, -child.branch_length, _min_leaf(child), child))
            collect(child)
    collect(tree.root)
    edges.sort(key=lambda e: (e[0], e[1], e[2]))

    detached: set[int] = set()

    def blocks() -> list[frozenset[str]]:
        out: list[frozenset[str]] = []

        def gather(node: TreeNode, acc: list[str]) -> None:
            if node.is_leaf:
                acc.append(node.label)
            for child in node.children:
                if id(child) not in detached:
                    gather(child, acc)

        def component(root: TreeNode) -> None:
            acc: list[str] = []
            gather(root, acc)
            if acc:
                out.append(frozenset(acc))

        component(tree.root)
        for _, _, _, child in edges:
            if id(child) in detached:
                component(child)
        return out

    for _, _, _, child in edges:
        if len(blocks()) >= k:
            break
        detached.add(id(child))
    result = blocks()
    if len(result) != k:
        raise ValueError(f"could not cut tree into {k} blocks")
    return Clustering(tuple(result))


def fowlkes_mallows(c1: Clustering, c2: Clustering) -> float:
    """Fowlkes-Mallows index B_k of two k-clusterings of the same labels.

    B_k = (sum m_ij^2 - n) / sqrt((sum_i r_i^2 - n)(sum_j c_j^2 - n))
    with m the contingency matrix of shared labels and r, c its margins.
    A degenerate denominator (all-singleton clustering) yields 0.
    """
    if c1.labels() != c2.labels():
        raise ValueError("clusterings must cover the same labels")
    if c1.k != c2.k:
        raise ValueError(f"clusterings have different k: {c1.k} vs {c2.k}")
    n = len(c1.labels())
    m = np.zeros((c1.k, c2.k))
    for i, block_a in enumerate(c1.blocks):
        for j, block_b in enumerate(c2.blocks):
            m[i, j] = len(block_a & block_b)
    tk = float((m ** 2).sum() - n)
    pk = float((m.sum(axis=1) ** 2).sum() - n)
    qk = float((m.sum(axis=0) ** 2).sum() - n)
    if pk <= 0 or qk <= 0:
        warnings.warn("degenerate clustering (all singletons); B_k defined as 0")
        return 0.0
    return tk / math.sqrt(pk * qk)


def pearson(m1: DistanceMatrix, m2: DistanceMatrix) -> float | None:
    """Pearson correlation of two matrices over their upper triangles.

    Returns None (undefined) when either triangle has zero variance.
    """
    if m1.labels != m2.labels:
        raise ValueError("matrices must share labels and label order")
    if len(m1) < 3:
        raise ValueError("need at least three items for a meaningful correlation")
    x = m1.upper_triangle()
    y = m2.upper_triangle()
    xc = x - x.mean()
    yc = y - y.mean()
    vx = float((xc ** 2).sum())
    vy = float((yc ** 2).sum())
    if vx == 0.0 or vy == 0.0:
        return None
    return float((xc * yc).sum() / math.sqrt(vx * vy))
