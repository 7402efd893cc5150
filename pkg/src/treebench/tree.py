"""Binary classification trees over binary features.

A branch routes an instance to its ``right`` child when the branch feature is
1 and to its ``left`` child otherwise. Leaf labels stored in a tree are what
:func:`predict` returns; :func:`leaf_stats` instead relabels each leaf by the
majority class of the instances it receives (ties go to label 0).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

from .objectives import LeafStats

__all__ = [
    "Branch",
    "Leaf",
    "Tree",
    "TreeMetrics",
    "deserialize",
    "from_json",
    "leaf_stats",
    "predict",
    "predict_all",
    "route",
    "serialize",
    "to_json",
    "tree_metrics",
]


@dataclass(frozen=True)
class Leaf:
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"leaf label must be 0 or 1, got {self.label!r}")

    @property
    def depth(self) -> int:
        return 0

    @property
    def branching_count(self) -> int:
        return 0

    @property
    def leaves(self) -> int:
        return 1

    @property
    def sort_key(self) -> tuple:
        return (1, self.label)

    def features(self) -> set[int]:
        return set()


@dataclass(frozen=True)
class Branch:
    feature: int
    left: "Tree"
    right: "Tree"

    def __post_init__(self) -> None:
        if self.feature < 0:
            raise ValueError(f"feature id must be >= 0, got {self.feature}")

    @cached_property
    def depth(self) -> int:
        return 1 + max(self.left.depth, self.right.depth)

    @cached_property
    def branching_count(self) -> int:
        return 1 + self.left.branching_count + self.right.branching_count

    @property
    def leaves(self) -> int:
        return self.branching_count + 1

    @cached_property
    def sort_key(self) -> tuple:
        # Tuple order equals string order of the canonical serialization:
        # "B..." sorts before "L...", feature ids compare as "<id>(" strings,
        # and the format is prefix-free so children compare independently.
        return (0, f"{self.feature}(", self.left.sort_key, self.right.sort_key)

    def features(self) -> set[int]:
        return {self.feature} | self.left.features() | self.right.features()


Tree = Union[Leaf, Branch]


@dataclass(frozen=True)
class TreeMetrics:
    leaves: int
    branching_nodes: int
    depth: int
    question_length: float


def _max_feature(t: Tree) -> int:
    if isinstance(t, Leaf):
        return -1
    return max(t.feature, _max_feature(t.left), _max_feature(t.right))


def _check_arity(t: Tree, width: int) -> None:
    top = _max_feature(t)
    if top >= width:
        raise ValueError(f"tree uses feature {top} but instances have {width} features")


def predict(t: Tree, instance) -> int:
    node = t
    while isinstance(node, Branch):
        if node.feature >= len(instance):
            raise ValueError(f"feature {node.feature} out of range for instance of width {len(instance)}")
        node = node.right if instance[node.feature] else node.left
    return node.label


def route(t: Tree, X: np.ndarray) -> tuple[list[Leaf], list[np.ndarray], np.ndarray]:
    """Send every row of the instance-major bool matrix ``X`` down the tree.

    Returns the leaves in preorder, the row indices reaching each leaf, and the
    number of branching nodes each row passes through.
    """
    X = np.asarray(X, dtype=bool)
    if X.ndim != 2:
        raise ValueError("expected a 2-D instance matrix")
    _check_arity(t, X.shape[1])
    leaves: list[Leaf] = []
    members: list[np.ndarray] = []
    path = np.zeros(X.shape[0], dtype=np.int64)

    def walk(node: Tree, idx: np.ndarray) -> None:
        if isinstance(node, Leaf):
            leaves.append(node)
            members.append(idx)
            return
        path[idx] += 1
        bit = X[idx, node.feature]
        walk(node.left, idx[~bit])
        walk(node.right, idx[bit])

    walk(t, np.arange(X.shape[0]))
    return leaves, members, path


def predict_all(t: Tree, X: np.ndarray) -> np.ndarray:
    leaves, members, _ = route(t, X)
    out = np.zeros(np.asarray(X).shape[0], dtype=np.int8)
    for leaf, idx in zip(leaves, members):
        out[idx] = leaf.label
    return out


def leaf_stats(t: Tree, d) -> list[LeafStats]:
    """Per-leaf (n, e) on dataset ``d`` under majority relabeling, in preorder."""
    _, members, _ = route(t, d.matrix)
    y = d.y
    out = []
    for idx in members:
        n = len(idx)
        pos = int(y[idx].sum())
        out.append(LeafStats(n, min(pos, n - pos)))
    return out


def tree_metrics(t: Tree, d) -> TreeMetrics:
    _, _, path = route(t, d.matrix)
    ql = float(path.mean()) if len(path) else 0.0
    return TreeMetrics(t.leaves, t.branching_count, t.depth, ql)


def serialize(t: Tree) -> str:
    """Canonical preorder text, e.g. ``B3(L0,L1)``."""
    if isinstance(t, Leaf):
        return f"L{t.label}"
    return f"B{t.feature}({serialize(t.left)},{serialize(t.right)})"


_TOKEN = re.compile(r"L[01]|B\d+\(|,|\)")


def deserialize(text: str) -> Tree:
    text = text.strip()
    tokens = _TOKEN.findall(text)
    if "".join(tokens) != text:
        raise ValueError(f"malformed tree text: {text!r}")
    pos = 0

    def take(expected: str | None = None) -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError(f"malformed tree text: {text!r}")
        tok = tokens[pos]
        if expected is not None and tok != expected:
            raise ValueError(f"malformed tree text: expected {expected!r} at token {pos} in {text!r}")
        pos += 1
        return tok

    def parse() -> Tree:
        tok = take()
        if tok.startswith("L"):
            return Leaf(int(tok[1]))
        if tok.startswith("B"):
            feature = int(tok[1:-1])
            left = parse()
            take(",")
            right = parse()
            take(")")
            return Branch(feature, left, right)
        raise ValueError(f"malformed tree text: {text!r}")

    tree = parse()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in tree text: {text!r}")
    return tree


def to_dict(t: Tree) -> dict:
    if isinstance(t, Leaf):
        return {"label": t.label}
    return {"feature": t.feature, "left": to_dict(t.left), "right": to_dict(t.right)}


def from_dict(obj: dict) -> Tree:
    if "label" in obj:
        return Leaf(int(obj["label"]))
    try:
        return Branch(int(obj["feature"]), from_dict(obj["left"]), from_dict(obj["right"]))
    except KeyError as exc:
        raise ValueError(f"malformed tree object, missing {exc}") from None


def to_json(t: Tree) -> str:
    return json.dumps(to_dict(t), sort_keys=True)


def from_json(text: str) -> Tree:
    return from_dict(json.loads(text))


def relabel(t: Tree, d) -> Tree:
    """Copy of ``t`` whose leaf labels are the majority class on ``d`` (ties -> 0)."""
    X, y = d.matrix, d.y

    def walk(node: Tree, idx: np.ndarray) -> Tree:
        if isinstance(node, Leaf):
            pos = int(y[idx].sum())
            return Leaf(1 if pos > len(idx) - pos else 0)
        bit = X[idx, node.feature]
        return Branch(node.feature, walk(node.left, idx[~bit]), walk(node.right, idx[bit]))

    _check_arity(t, X.shape[1])
    return walk(t, np.arange(len(y)))
