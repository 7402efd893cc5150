"""Synthetic benchmarks with a known ground truth.

Both generators draw clean features uniformly from [0, 1], add uniform
feature noise to the training copy, binarize the noisy training features at
10 quantiles per column, label every instance from its clean features, and
flip an exact share of training labels. Test sets are noise-free and are
binarized with the training binarizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import NUMERIC, Binarizer, BinaryDataset, RawDataset, binarize_apply, binarize_fit
from .tree import Branch, Leaf, Tree, predict_all

__all__ = [
    "SyntheticBundle",
    "SyntheticTreeConfig",
    "flip_class_noise",
    "gen_linear_dataset",
    "gen_tree_dataset",
]

QUANTILES = 10


@dataclass(frozen=True)
class SyntheticTreeConfig:
    """Parameters of a random-tree benchmark.

    Attributes:
        n: training instances.
        p: numeric features.
        d: maximum depth of the ground-truth tree.
        f: half-width of the uniform feature noise.
        c: share of training labels to flip.
        test_per_leaf: test instances drawn inside each truth leaf.
        min_leaf: minimum training instances per truth leaf.
        seed: RNG seed.
    """

    n: int = 1000
    p: int = 5
    d: int = 3
    f: float = 0.0
    c: float = 0.0
    test_per_leaf: int = 1000
    min_leaf: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.p < 1 or self.d < 0 or self.test_per_leaf < 1 or self.min_leaf < 1:
            raise ValueError("p, test_per_leaf and min_leaf must be >= 1 and d >= 0")
        if self.n < 2 * self.min_leaf:
            raise ValueError(f"n must be at least 2*min_leaf = {2 * self.min_leaf}, got {self.n}")
        if not 0.0 <= self.c <= 0.5:
            raise ValueError(f"class noise c must lie in [0, 0.5], got {self.c}")
        if not self.f >= 0:
            raise ValueError(f"feature noise f must be >= 0, got {self.f}")


@dataclass
class SyntheticBundle:
    train: BinaryDataset
    test: BinaryDataset
    truth: Tree
    truth_features: set[int]
    binarizer: Binarizer
    infeasible: bool = False
    flipped: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def flip_class_noise(labels, c: float, seed) -> np.ndarray:
    """Flip exactly ``floor(c * len(labels))`` labels chosen without replacement."""
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"noise fraction must lie in [0, 1], got {c}")
    out = np.asarray(labels).astype(bool).copy()
    k = math.floor(c * len(out) + 1e-9)
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(out), size=k, replace=False)
    out[idx] = ~out[idx]
    return out


def _raw(X: np.ndarray, y) -> RawDataset:
    cols = [(f"x{j}", NUMERIC) for j in range(X.shape[1])]
    return RawDataset(cols, [X[:, j].copy() for j in range(X.shape[1])], np.asarray(y, dtype=np.int8))


def _noisy_view(rng, Xc: np.ndarray, f: float):
    Xn = Xc + rng.uniform(-f, f, size=Xc.shape) if f > 0 else Xc.copy()
    b = binarize_fit(_raw(Xn, np.zeros(len(Xn))), QUANTILES)
    return Xn, b


def _grow_truth(rng, Xb: np.ndarray, d: int, min_leaf: int) -> Tree:
    """Random tree: split uniformly chosen feasible (leaf, feature) pairs."""
    # nodes: id -> [idx, depth, feature, left, right]
    nodes = {0: [np.arange(Xb.shape[0]), 0, None, None, None]}
    frontier = [0]
    while True:
        pairs = []
        for nid in frontier:
            idx, depth = nodes[nid][0], nodes[nid][1]
            if depth >= d:
                continue
            cnt = Xb[idx].sum(axis=0)
            for f in np.flatnonzero((cnt >= min_leaf) & (len(idx) - cnt >= min_leaf)):
                pairs.append((nid, int(f)))
        if not pairs:
            break
        nid, f = pairs[rng.integers(len(pairs))]
        idx, depth = nodes[nid][0], nodes[nid][1]
        bit = Xb[idx, f]
        left, right = len(nodes), len(nodes) + 1
        nodes[left] = [idx[~bit], depth + 1, None, None, None]
        nodes[right] = [idx[bit], depth + 1, None, None, None]
        nodes[nid][2:] = [f, left, right]
        frontier.remove(nid)
        frontier += [left, right]

    label = [int(rng.integers(2))]

    def freeze(nid: int) -> Tree:
        _, _, f, left, right = nodes[nid]
        if f is None:
            out = Leaf(label[0])
            label[0] ^= 1
            return out
        return Branch(f, freeze(left), freeze(right))

    return freeze(0)


def _leaf_boxes(t: Tree, b: Binarizer, train: BinaryDataset, p: int):
    """Axis-aligned box (lo, hi, lo_open) of every truth leaf, in preorder."""
    preds = b.predicates
    out = []

    def walk(node: Tree, lo, hi, lo_open):
        if isinstance(node, Leaf):
            out.append((node, lo.copy(), hi.copy(), lo_open.copy()))
            return
        pr = preds[train.predicates[node.feature]]
        j, t_ = pr.column, pr.value
        # left: x > t
        lo2, open2 = lo.copy(), lo_open.copy()
        if t_ >= lo2[j]:
            lo2[j], open2[j] = t_, True
        walk(node.left, lo2, hi, open2)
        hi2 = hi.copy()
        hi2[j] = min(hi2[j], t_)
        walk(node.right, lo, hi2, lo_open)

    walk(t, np.full(p, -np.inf), np.full(p, np.inf), np.zeros(p, dtype=bool))
    return out


def _sample_box(rng, lo, hi, lo_open, span_lo, span_hi, m: int) -> np.ndarray:
    p = len(lo)
    X = np.empty((m, p))
    for j in range(p):
        a, c = max(lo[j], 0.0), min(hi[j], 1.0)
        if not a < c:
            a, c = max(lo[j], span_lo[j]), min(hi[j], span_hi[j])
        if not a <= c:
            a, c = lo[j], hi[j]
        if lo_open[j] and a == lo[j]:
            a = np.nextafter(a, np.inf)
            c = max(c, a)
        col = rng.uniform(a, c, size=m) if c > a else np.full(m, a)
        if lo_open[j]:
            col = np.maximum(col, np.nextafter(lo[j], np.inf))
        X[:, j] = np.minimum(col, hi[j])
    return X


def gen_tree_dataset(cfg: SyntheticTreeConfig) -> SyntheticBundle:
    """Random ground-truth tree benchmark.

    The truth is grown on the noisy binarized training features. Instances
    are labeled by routing their clean features, binarized with the same
    thresholds, through the truth.
    """
    ss = np.random.SeedSequence(cfg.seed)
    r_feat, r_noise, r_tree, r_flip, r_test = (np.random.default_rng(s) for s in ss.spawn(5))
    Xc = r_feat.uniform(0.0, 1.0, size=(cfg.n, cfg.p))
    Xn, b = _noisy_view(r_noise, Xc, cfg.f)
    noisy = binarize_apply(b, _raw(Xn, np.zeros(cfg.n)))
    truth = _grow_truth(r_tree, noisy.matrix, cfg.d, cfg.min_leaf)
    infeasible = isinstance(truth, Leaf)

    clean = binarize_apply(b, _raw(Xc, np.zeros(cfg.n)), align_to=noisy)
    y = predict_all(truth, clean.matrix).astype(bool)
    seed_flip = int(r_flip.integers(2 ** 63))
    y_noisy = flip_class_noise(y, cfg.c, seed_flip)
    flipped = np.flatnonzero(y_noisy != y)
    train = BinaryDataset(noisy.features, y_noisy, noisy.feature_names, noisy.predicates)

    span_lo, span_hi = Xn.min(axis=0), Xn.max(axis=0)
    blocks = []
    for leaf, lo, hi, lo_open in _leaf_boxes(truth, b, noisy, cfg.p):
        blocks.append(_sample_box(r_test, lo, hi, lo_open, span_lo, span_hi, cfg.test_per_leaf))
    Xt = np.concatenate(blocks)
    test_b = binarize_apply(b, _raw(Xt, np.zeros(len(Xt))), align_to=noisy)
    test = test_b.with_labels(predict_all(truth, test_b.matrix))
    feats = set() if infeasible else truth.features()
    return SyntheticBundle(train, test, truth, feats, b, infeasible, flipped)


def gen_linear_dataset(n: int, p: int, f: float = 0.0, c: float = 0.0, test_size: int = 1000,
                       seed: int = 0) -> tuple[BinaryDataset, BinaryDataset]:
    """Random linear-separator benchmark.

    Weights are standard normal and the bias is the median training score, so
    the classes are balanced (up to one instance) before label noise.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if p < 1 or test_size < 1:
        raise ValueError("p and test_size must be >= 1")
    ss = np.random.SeedSequence(seed)
    r_feat, r_noise, r_w, r_flip, r_test = (np.random.default_rng(s) for s in ss.spawn(5))
    Xc = r_feat.uniform(0.0, 1.0, size=(n, p))
    Xn, b = _noisy_view(r_noise, Xc, f)
    w = r_w.standard_normal(p)
    bias = float(np.median(Xc @ w))
    y = Xc @ w > bias
    y_noisy = flip_class_noise(y, c, int(r_flip.integers(2 ** 63)))
    train = binarize_apply(b, _raw(Xn, y_noisy))
    Xt = r_test.uniform(0.0, 1.0, size=(test_size, p))
    test = binarize_apply(b, _raw(Xt, Xt @ w > bias), align_to=train)
    return train, test
