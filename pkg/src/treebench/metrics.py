"""Scoring and aggregation: accuracy, ranks, critical distance, TDR/FDR, SWA."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest, rankdata

from .data import BinaryDataset
from .tree import Leaf, Tree, predict_all

__all__ = [
    "ParetoCurve",
    "ScoreMatrix",
    "accuracy",
    "average_ranks",
    "nemenyi_cd",
    "sign_test",
    "swa",
    "tdr_fdr",
]

# Studentized range quantiles divided by sqrt(2), infinite degrees of
# freedom, for k = 2..20 methods.
_Q = {
    0.05: (1.960, 2.344, 2.569, 2.728, 2.850, 2.948, 3.031, 3.102, 3.164, 3.219,
           3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544),
    0.10: (1.645, 2.052, 2.291, 2.460, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978,
           3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291, 3.319),
}


def accuracy(t: Tree, d: BinaryDataset) -> float:
    """Share of instances whose prediction equals the label."""
    return float((predict_all(t, d.matrix) == d.y).mean())


@dataclass
class ScoreMatrix:
    """Test accuracy in percent per (dataset, method)."""

    methods: list[str]
    datasets: list[str]
    scores: np.ndarray

    def __post_init__(self) -> None:
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.scores.shape != (len(self.datasets), len(self.methods)):
            raise ValueError(f"score matrix shape {self.scores.shape} does not match "
                             f"{len(self.datasets)} datasets x {len(self.methods)} methods")
        if np.isnan(self.scores).any():
            raise ValueError("score matrix has missing cells")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", *self.methods])
        for name, row in zip(self.datasets, self.scores):
            w.writerow([name, *(f"{v:.6f}" for v in row)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ScoreMatrix":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if len(rows) < 2:
            raise ValueError("score matrix CSV needs a header and at least one row")
        methods = rows[0][1:]
        try:
            scores = [[float(v) for v in r[1:]] for r in rows[1:]]
        except ValueError as exc:
            raise ValueError(f"non-numeric score: {exc}") from None
        if any(len(s) != len(methods) for s in scores):
            raise ValueError("ragged score matrix CSV")
        return cls(methods, [r[0] for r in rows[1:]], np.array(scores))


def _round1(x: np.ndarray) -> np.ndarray:
    # half-up at one decimal; the epsilon absorbs binary representation error
    return np.floor(x * 10.0 + 0.5 + 1e-9) / 10.0


def average_ranks(m: ScoreMatrix) -> dict[str, float]:
    """Mean rank per method (1 = best) after rounding scores to one decimal."""
    if len(m.methods) < 2 or len(m.datasets) < 1:
        raise ValueError("ranking needs at least 2 methods and 1 dataset")
    ranks = np.vstack([rankdata(-_round1(row), method="average") for row in m.scores])
    return dict(zip(m.methods, map(float, ranks.mean(axis=0))))


def nemenyi_cd(k: int, n: int, alpha: float = 0.05) -> float:
    """Nemenyi critical distance for ``k`` methods ranked over ``n`` datasets."""
    table = _Q.get(alpha)
    if table is None:
        raise ValueError(f"alpha must be 0.05 or 0.10, got {alpha}")
    if not 2 <= k <= 20:
        raise ValueError(f"method count must lie in [2, 20], got {k}")
    if n < 2:
        raise ValueError(f"dataset count must be >= 2, got {n}")
    return table[k - 2] * math.sqrt(k * (k + 1) / (6.0 * n))


def tdr_fdr(trained: Tree, truth: Tree) -> tuple[float, float]:
    """Recovered share of truth split features, and share of trained split
    features absent from the truth (split identity = feature id)."""
    s_true = set() if isinstance(truth, Leaf) else truth.features()
    s_fit = set() if isinstance(trained, Leaf) else trained.features()
    tdr = len(s_true & s_fit) / len(s_true) if s_true else 1.0
    fdr = len(s_fit - s_true) / len(s_fit) if s_fit else 0.0
    return tdr, fdr


@dataclass
class ParetoCurve:
    """Best test accuracy per leaf count."""

    points: dict[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for size, acc in self.points.items():
            if int(size) != size or size < 1:
                raise ValueError(f"leaf counts must be integers >= 1, got {size}")
            if not 0.0 <= acc <= 1.0:
                raise ValueError(f"accuracy must lie in [0, 1], got {acc}")

    @classmethod
    def from_runs(cls, runs) -> "ParetoCurve":
        """Average the accuracies of runs that share a leaf count."""
        acc: dict[int, list[float]] = {}
        for size, a in runs:
            acc.setdefault(int(size), []).append(float(a))
        if not acc:
            raise ValueError("empty sweep")
        return cls({s: float(np.mean(v)) for s, v in sorted(acc.items())})

    def filled(self, n: int) -> np.ndarray:
        """acc_1..acc_n: interpolated, right-extended and made nondecreasing."""
        if not self.points:
            raise ValueError("empty curve")
        if 1 not in self.points:
            raise ValueError("size-1 anchor missing")
        sizes = np.array(sorted(self.points), dtype=np.float64)
        accs = np.array([self.points[int(s)] for s in sizes])
        # np.interp interpolates between neighbours and holds the last value
        acc = np.interp(np.arange(1, n + 1, dtype=np.float64), sizes, accs)
        return np.maximum.accumulate(acc)


def swa(curve: ParetoCurve, n: int) -> float:
    """Size-weighted accuracy ``sum(acc_i / i) / sum(1 / i)`` over ``i = 1..n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    acc = curve.filled(n)
    w = 1.0 / np.arange(1, n + 1)
    return float((acc * w).sum() / w.sum())


def sign_test(a, b) -> float:
    """One-sided paired sign test p-value for ``a > b``; ties are dropped."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    wins = int((a > b).sum())
    losses = int((a < b).sum())
    if wins + losses == 0:
        return 1.0
    return float(binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue)
