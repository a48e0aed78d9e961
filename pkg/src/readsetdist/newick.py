"""Newick serialization for trees, with branch lengths at 6 decimals."""
from __future__ import annotations

from .phylo import PhyloTree, TreeNode


def write_newick(tree: PhyloTree) -> str:
    """Serialize a tree; trailing semicolon and newline are mandatory."""

    def render(node: TreeNode, is_root: bool) -> str:
        if node.is_leaf:
            body = node.label
        else:
            body = "(" + ",".join(render(c, False) for c in node.children) + ")"
        if is_root:
            return body
        return f"{body}:{node.branch_length:.6f}"

    return render(tree.root, True) + ";\n"


class NewickError(ValueError):
    """Raised on malformed Newick input."""


def parse_newick(text: str, *, ultrametric: bool = False) -> PhyloTree:
    """Parse a Newick string into a tree.

    UPGMA-style node heights are reconstructed from branch lengths when
    ``ultrametric`` is set.
    """
    text = text.strip()
    if not text.endswith(";"):
        raise NewickError("Newick string must end with ';'")
    body = text[:-1]
    pos = 0

    def parse_node() -> TreeNode:
        nonlocal pos
        node = TreeNode()
        if pos < len(body) and body[pos] == "(":
            pos += 1
            while True:
                node.children.append(parse_node())
                if pos >= len(body):
                    raise NewickError("unbalanced parentheses")
                if body[pos] == ",":
                    pos += 1
                    continue
                if body[pos] == ")":
                    pos += 1
                    break
                raise NewickError(f"unexpected character {body[pos]!r} at {pos}")
        start = pos
        while pos < len(body) and body[pos] not in ",();":
            pos += 1
        label_and_length = body[start:pos]
        if ":" in label_and_length:
            label, length = label_and_length.split(":", 1)
            try:
                node.branch_length = float(length)
            except ValueError as exc:
                raise NewickError(f"bad branch length {length!r}") from exc
        else:
            label = label_and_length
        if label:
            node.label = label
        if node.is_leaf and node.label is None:
            raise NewickError("leaf without a label")
        return node

    root = parse_node()
    if pos != len(body):
        raise NewickError(f"trailing characters after position {pos}")
    tree = PhyloTree(root=root, ultrametric=ultrametric)
    if ultrametric:
        _assign_heights(root)
    return tree


def _assign_heights(node: TreeNode) -> float:
    if node.is_leaf:
        node.height = 0.0
        return 0.0
    heights = [_assign_heights(c) + c.branch_length for c in node.children]
    node.height = max(heights)
    return node.height
