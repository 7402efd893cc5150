"""Top-down greedy induction, cost-complexity pruning and CV-tuned pruning.

``grow`` works like CART, except that any leaf objective can serve as the
splitting criterion. The pruning side follows RPart: it runs weakest-link
pruning on misclassification rate, uses the geometric means of consecutive
path alphas as candidates, and picks the best mean validation accuracy
(not the 1-SE rule).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import BinaryDataset, RawDataset, binarize_apply, exhaustive_binarizer, stratified_kfold
from .objectives import DEFAULT_PARAMS, ObjectiveKind, ObjectiveParams, leaf_values
from .tree import Branch, Leaf, Tree, route

__all__ = [
    "BINARY_FEATURES",
    "CcpPath",
    "DEPTH_CAP",
    "GrowConfig",
    "RAW_THRESHOLDS",
    "ccp_midpoints",
    "ccp_path",
    "cv_alpha_scores",
    "fit_tuned",
    "grow",
    "prune_at",
    "raw_view",
]

DEPTH_CAP = 20
SPLIT_TOL = 1e-12
BINARY_FEATURES = "binary-features"
RAW_THRESHOLDS = "raw-thresholds"


@dataclass(frozen=True)
class GrowConfig:
    """Settings of greedy induction.

    ``max_depth=None`` means unlimited, approximated by a depth of 20.
    """

    kind: ObjectiveKind = ObjectiveKind.GINI
    params: ObjectiveParams = DEFAULT_PARAMS
    max_depth: int | None = None
    min_support: int = 1
    numeric_mode: str = BINARY_FEATURES

    def __post_init__(self) -> None:
        if self.max_depth is not None and not 0 <= self.max_depth <= DEPTH_CAP:
            raise ValueError(f"max_depth must lie in [0, {DEPTH_CAP}], got {self.max_depth}")
        if self.min_support < 1:
            raise ValueError("min_support must be >= 1")
        if self.numeric_mode not in (BINARY_FEATURES, RAW_THRESHOLDS):
            raise ValueError(f"unknown numeric_mode {self.numeric_mode!r}")

    @property
    def depth_limit(self) -> int:
        return DEPTH_CAP if self.max_depth is None else self.max_depth


def raw_view(raw: RawDataset) -> BinaryDataset:
    """Binary view of ``raw`` with one predicate per candidate CART threshold.

    Feature ids of trees grown in raw-threshold mode index this view; build the
    test view with ``binarize_apply(exhaustive_binarizer(train), test,
    align_to=raw_view(train))``.
    """
    return binarize_apply(exhaustive_binarizer(raw), raw)


def _as_binary(d, cfg: GrowConfig) -> BinaryDataset:
    if isinstance(d, RawDataset):
        if cfg.numeric_mode != RAW_THRESHOLDS:
            raise ValueError("raw datasets need numeric_mode='raw-thresholds'")
        return raw_view(d)
    return d


def grow(d, cfg: GrowConfig = GrowConfig()) -> Tree:
    """Grow a tree greedily, splitting while the criterion strictly improves.

    A split is taken only when the children's summed criterion is below the
    node's by more than ``1e-12`` (relative for values above one). Ties between
    splits go to the lowest feature id.
    """
    d = _as_binary(d, cfg)
    X = d.matrix
    y = d.labels
    kind, params = cfg.kind, cfg.params
    ms = cfg.min_support

    def cost(n, pos):
        n = np.asarray(n)
        pos = np.asarray(pos)
        return leaf_values(kind, params, n, np.minimum(pos, n - pos))

    def leaf(m: int, pos: int) -> Leaf:
        return Leaf(1 if pos > m - pos else 0)

    def build(idx: np.ndarray, depth: int) -> Tree:
        m = len(idx)
        yi = y[idx]
        pos = int(yi.sum())
        if depth == 0 or pos == 0 or pos == m or m < 2 * ms or X.shape[1] == 0:
            return leaf(m, pos)
        Xs = X[idx]
        tot = Xs.sum(axis=0)
        tpos = Xs[yi].sum(axis=0)
        ok = (tot >= ms) & (m - tot >= ms)
        if not ok.any():
            return leaf(m, pos)
        vals = cost(tot, tpos) + cost(m - tot, pos - tpos)
        vals = np.where(ok, vals, math.inf)
        best = float(vals.min())
        parent = float(cost(m, pos))
        if not best < parent - SPLIT_TOL * max(1.0, abs(parent)):
            return leaf(m, pos)
        f = int(np.flatnonzero(vals <= best)[0])
        bit = Xs[:, f]
        return Branch(f, build(idx[~bit], depth - 1), build(idx[bit], depth - 1))

    return build(np.arange(d.instance_count), cfg.depth_limit)


# -- cost-complexity pruning -------------------------------------------------

@dataclass
class CcpPath:
    """Nested subtrees ordered by increasing pruning penalty.

    ``alphas[i]`` is the smallest penalty (in training misclassification rate
    per extra leaf) at which ``trees[i]`` is optimal.
    """

    alphas: list[float]
    trees: list[Tree]
    errors: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.alphas) != len(self.trees) or not self.alphas:
            raise ValueError("alphas and trees must be nonempty and of equal length")
        if self.alphas[0] != 0.0:
            raise ValueError("a pruning path starts at alpha 0")
        if any(b <= a for a, b in zip(self.alphas, self.alphas[1:])):
            raise ValueError("path alphas must be strictly increasing")

    def __len__(self) -> int:
        return len(self.alphas)


class _Node:
    __slots__ = ("feature", "left", "right", "n", "err", "label")

    def __init__(self, feature, left, right, n, err, label):
        self.feature = feature
        self.left = left
        self.right = right
        self.n = n
        self.err = err
        self.label = label


def _annotate(t: Tree, X: np.ndarray, y: np.ndarray, idx: np.ndarray) -> _Node:
    n = len(idx)
    pos = int(y[idx].sum())
    label = 1 if pos > n - pos else 0
    err = n - pos if label else pos
    if isinstance(t, Leaf):
        return _Node(None, None, None, n, err, label)
    bit = X[idx, t.feature]
    return _Node(t.feature, _annotate(t.left, X, y, idx[~bit]), _annotate(t.right, X, y, idx[bit]),
                 n, err, label)


def _subtree(node: _Node) -> tuple[int, int]:
    """(errors, leaves) of the subtree below ``node``."""
    if node.feature is None:
        return node.err, 1
    el, ll = _subtree(node.left)
    er, lr = _subtree(node.right)
    return el + er, ll + lr


def _freeze(node: _Node) -> Tree:
    if node.feature is None:
        return Leaf(node.label)
    return Branch(node.feature, _freeze(node.left), _freeze(node.right))


def ccp_path(t: Tree, d: BinaryDataset) -> CcpPath:
    """Weakest-link pruning path of ``t`` on ``d``.

    Each internal node's link strength is ``g = (R(node) - R(subtree)) /
    (leaves(subtree) - 1)``, where R is the misclassification count over
    ``|d|``. All nodes tied at the minimum g are collapsed together. Links with
    ``g = 0`` are collapsed before the first entry, so that entry is the
    smallest subtree with the full tree's training error.
    """
    X = d.matrix
    if not isinstance(t, Leaf) and max(t.features()) >= X.shape[1]:
        raise ValueError(f"tree uses feature {max(t.features())} but data has {X.shape[1]} features")
    root = _annotate(t, X, d.labels, np.arange(d.instance_count))
    n = d.instance_count
    alphas: list[float] = []
    trees: list[Tree] = []
    errors: list[int] = []

    def weakest(node: _Node, acc: list) -> tuple[int, int]:
        if node.feature is None:
            return node.err, 1
        el, ll = weakest(node.left, acc)
        er, lr = weakest(node.right, acc)
        e, lv = el + er, ll + lr
        acc.append(((node.err - e) / (lv - 1), node))
        return e, lv

    alpha = 0.0
    while True:
        links: list = []
        weakest(root, links)
        if links:
            g = min(x[0] for x in links)
        if not links or g > 0:
            alphas.append(alpha / n)
            trees.append(_freeze(root))
            errors.append(_subtree(root)[0])
            if not links:
                break
            alpha = g
        # collapse every link at the minimum, shallowest first
        for gi, node in links:
            if gi <= g + 1e-12 * max(1.0, g):
                node.feature = None
                node.left = node.right = None
    return CcpPath(alphas, trees, errors)


def ccp_midpoints(path: CcpPath) -> list[float]:
    """Candidate penalties: 0, geometric means of consecutive positive alphas,
    and the largest alpha (which selects the single leaf)."""
    cands = {0.0}
    pos = [a for a in path.alphas if a > 0]
    cands.update(math.sqrt(a * b) for a, b in zip(pos, pos[1:]))
    if pos:
        cands.add(pos[-1])
    return sorted(cands)


def prune_at(path: CcpPath, alpha: float) -> Tree:
    """Subtree of the path that is optimal at penalty ``alpha``."""
    i = int(np.searchsorted(path.alphas, alpha, side="right")) - 1
    return path.trees[max(i, 0)]


def cv_alpha_scores(d: BinaryDataset, cfg: GrowConfig, cv_seed: int,
                    candidates: list[float], folds: int | None = None) -> np.ndarray:
    """Validation accuracy per (candidate alpha, fold)."""
    from .tuning import fold_count

    k = folds if folds is not None else fold_count(d.instance_count)
    splits = stratified_kfold(d, k, cv_seed)
    scores = np.zeros((len(candidates), k))
    for j, (tr, va) in enumerate(splits):
        train = d.subset(tr)
        path = ccp_path(grow(train, cfg), train)
        Xv, yv = d.matrix[va], d.y[va]
        for i, a in enumerate(candidates):
            t = prune_at(path, a)
            leaves, members, _ = route(t, Xv)
            hits = sum(int((yv[m] == lf.label).sum()) for lf, m in zip(leaves, members))
            scores[i, j] = hits / len(va)
    return scores


def fit_tuned(d, cfg: GrowConfig, cv_seed: int, return_alpha: bool = False):
    """Greedy tree pruned at the cross-validated best penalty.

    The candidate with the highest mean validation accuracy wins, ties going
    to the larger penalty; the tree grown on all of ``d`` is then pruned at it.
    """
    from .tuning import fold_count

    d = _as_binary(d, cfg)
    k = fold_count(d.instance_count)
    if d.instance_count < k or k < 2:
        raise ValueError(f"{d.instance_count} instances are too few for {k}-fold cross-validation")
    path = ccp_path(grow(d, cfg), d)
    cands = ccp_midpoints(path)
    means = cv_alpha_scores(d, cfg, cv_seed, cands, k).mean(axis=1)
    top = means.max()
    best = max(i for i in range(len(cands)) if means[i] >= top - 1e-12)
    t = prune_at(path, cands[best])
    return (t, cands[best]) if return_alpha else t
