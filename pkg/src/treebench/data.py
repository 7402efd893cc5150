"""Tabular data loading, binarization and stratified cross-validation folds."""

from __future__ import annotations

import csv
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "BinaryDataset",
    "Binarizer",
    "Predicate",
    "RawDataset",
    "binarize_apply",
    "binarize_fit",
    "exhaustive_binarizer",
    "load_csv",
    "read_schema",
    "stratified_kfold",
]

NUMERIC = "numeric"
CATEGORICAL = "categorical"


class DataError(ValueError):
    """Raised for malformed or unsupported input data."""


@dataclass
class RawDataset:
    """Column-oriented raw table with binary labels.

    ``values[j]`` holds column ``j``: a float array for numeric columns, an
    array of strings for categorical ones.
    """

    columns: list[tuple[str, str]]
    values: list[np.ndarray]
    labels: np.ndarray
    label_names: tuple[str, str] = ("0", "1")

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=np.int8)
        n = len(self.labels)
        if n == 0:
            raise DataError("dataset has no rows")
        if len(self.columns) != len(self.values):
            raise DataError("column specification does not match data")
        for (name, kind), col in zip(self.columns, self.values):
            if kind not in (NUMERIC, CATEGORICAL):
                raise DataError(f"column {name!r} has unknown kind {kind!r}")
            if len(col) != n:
                raise DataError(f"column {name!r} has {len(col)} values, expected {n}")
        if not np.isin(self.labels, (0, 1)).all():
            raise DataError("labels must be 0 or 1")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def rows(self) -> list[list]:
        return [list(r) for r in zip(*self.values)] if self.values else [[] for _ in range(self.n)]

    def take(self, idx) -> "RawDataset":
        idx = np.asarray(idx)
        return RawDataset(self.columns, [v[idx] for v in self.values], self.labels[idx], self.label_names)


def read_schema(path: str | os.PathLike) -> dict[str, str]:
    """Parse a schema file with one ``name,kind`` line per column."""
    schema = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 2:
                raise DataError(f"schema line must be 'name,kind': {row!r}")
            name, kind = row[0].strip(), row[1].strip().lower()
            if kind not in (NUMERIC, CATEGORICAL):
                raise DataError(f"unknown column kind {kind!r} for {name!r}")
            schema[name] = kind
    return schema


def _as_float(s: str) -> float | None:
    try:
        v = float(s)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path: str | os.PathLike, label_column: str,
             schema: Mapping[str, str] | str | os.PathLike | None = None) -> RawDataset:
    """Read a headered CSV file into a :class:`RawDataset`.

    The two distinct label values are mapped to 0 and 1 in lexicographic order.
    Column kinds are inferred (numeric when every entry parses as a number)
    unless ``schema`` overrides them.
    """
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    if schema is not None and not isinstance(schema, Mapping):
        schema = read_schema(schema)
    schema = dict(schema or {})
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = [r for r in reader if r and any(c.strip() for c in r)]
    if label_column not in header:
        raise DataError(f"{path}: label column {label_column!r} not found")
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(header)
    for i, r in enumerate(rows, start=2):
        if len(r) != width:
            raise DataError(f"{path}: line {i} has {len(r)} fields, expected {width}")
        if any(c.strip() == "" for c in r):
            raise DataError(f"{path}: line {i} has a missing value")
    unknown = set(schema) - set(header)
    if unknown:
        raise DataError(f"{path}: schema names unknown columns {sorted(unknown)}")

    li = header.index(label_column)
    raw_labels = [r[li].strip() for r in rows]
    distinct = sorted(set(raw_labels))
    if len(distinct) != 2:
        raise DataError(f"{path}: label column must hold exactly two values, found {len(distinct)}")
    labels = np.array([distinct.index(v) for v in raw_labels], dtype=np.int8)

    columns, values = [], []
    for j, name in enumerate(header):
        if j == li:
            continue
        cells = [r[j].strip() for r in rows]
        parsed = [_as_float(c) for c in cells]
        kind = schema.get(name)
        if kind is None:
            numeric = sum(p is not None for p in parsed)
            if numeric == len(cells):
                kind = NUMERIC
            elif numeric == 0:
                kind = CATEGORICAL
            else:
                raise DataError(f"{path}: mixed column {name!r} (numeric and non-numeric entries)")
        if kind == NUMERIC:
            if any(p is None for p in parsed):
                raise DataError(f"{path}: mixed column {name!r} declared numeric")
            values.append(np.array(parsed, dtype=np.float64))
        else:
            values.append(np.array(cells, dtype=object))
        columns.append((name, kind))
    return RawDataset(columns, values, labels, (distinct[0], distinct[1]))


@dataclass(frozen=True)
class Predicate:
    """``column <= value`` for numeric columns, ``column == value`` for categorical."""

    column: int
    name: str
    kind: str
    value: object

    def evaluate(self, col: np.ndarray) -> np.ndarray:
        if self.kind == NUMERIC:
            return np.asarray(col, dtype=np.float64) <= self.value
        return np.asarray(col, dtype=object) == self.value

    def describe(self) -> str:
        op = "<=" if self.kind == NUMERIC else "=="
        val = f"{self.value:.6g}" if self.kind == NUMERIC else str(self.value)
        return f"{self.name} {op} {val}"


@dataclass
class Binarizer:
    columns: list[tuple[str, str]]
    thresholds: dict[int, list[float]] = field(default_factory=dict)
    categories: dict[int, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for j, ts in self.thresholds.items():
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError(f"thresholds of column {j} must be strictly increasing")
        for j, cs in self.categories.items():
            if len(set(cs)) != len(cs):
                raise ValueError(f"duplicate retained categories in column {j}")

    @property
    def predicates(self) -> list[Predicate]:
        out = []
        for j, (name, kind) in enumerate(self.columns):
            if kind == NUMERIC:
                out.extend(Predicate(j, name, kind, t) for t in self.thresholds.get(j, []))
            else:
                out.extend(Predicate(j, name, kind, c) for c in self.categories.get(j, []))
        return out

    def to_dict(self) -> dict:
        return {
            "columns": [list(c) for c in self.columns],
            "thresholds": {str(j): list(map(float, t)) for j, t in self.thresholds.items()},
            "categories": {str(j): list(c) for j, c in self.categories.items()},
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Binarizer":
        return cls(
            [tuple(c) for c in obj["columns"]],
            {int(j): list(t) for j, t in obj.get("thresholds", {}).items()},
            {int(j): list(c) for j, c in obj.get("categories", {}).items()},
        )


def _nearest_rank(sorted_vals: np.ndarray, level: float) -> float:
    n = len(sorted_vals)
    rank = min(n, max(1, math.ceil(level * n - 1e-12)))
    return float(sorted_vals[rank - 1])


def binarize_fit(raw: RawDataset, quantile_count: int = 10, max_categories: int = 10) -> Binarizer:
    """Fit quantile thresholds (numeric) and one-hot categories (categorical).

    Numeric thresholds sit at the nearest-rank empirical quantiles of levels
    ``i/(quantile_count+1)``; thresholds at or above the column maximum would
    be always true and are left out. Categorical columns keep their
    ``max_categories`` most frequent values (ties broken lexicographically).
    """
    if quantile_count < 1 or max_categories < 1:
        raise ValueError("quantile_count and max_categories must be >= 1")
    thresholds: dict[int, list[float]] = {}
    categories: dict[int, list[str]] = {}
    for j, (_, kind) in enumerate(raw.columns):
        col = raw.values[j]
        if kind == NUMERIC:
            s = np.sort(np.asarray(col, dtype=np.float64))
            top = s[-1]
            ts = {_nearest_rank(s, i / (quantile_count + 1)) for i in range(1, quantile_count + 1)}
            thresholds[j] = sorted(t for t in ts if t < top)
        else:
            counts = Counter(str(v) for v in col)
            ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
            categories[j] = [v for v, _ in ranked[:max_categories]]
    return Binarizer(list(raw.columns), thresholds, categories)


def exhaustive_binarizer(raw: RawDataset) -> Binarizer:
    """Thresholds at every midpoint between consecutive distinct values.

    Growing a greedy tree on the resulting predicates reproduces unbinarized
    CART on numeric columns; categorical columns get one predicate per value.
    """
    thresholds: dict[int, list[float]] = {}
    categories: dict[int, list[str]] = {}
    for j, (_, kind) in enumerate(raw.columns):
        col = raw.values[j]
        if kind == NUMERIC:
            u = np.unique(np.asarray(col, dtype=np.float64))
            thresholds[j] = [float(t) for t in (u[:-1] + u[1:]) / 2.0]
        else:
            categories[j] = sorted({str(v) for v in col})
    return Binarizer(list(raw.columns), thresholds, categories)


class BinaryDataset:
    """Feature-major boolean matrix of binarized predicates plus binary labels.

    ``features[f]`` is the bitset (bool array) of instances where predicate
    ``f`` holds; ``labels`` marks the positive instances. ``predicates`` holds,
    when known, the index of each feature within the fitting binarizer.
    """

    def __init__(self, features, labels, feature_names: Sequence[str] | None = None,
                 predicates: Sequence[int] | None = None):
        labels = np.asarray(labels).astype(bool)
        features = np.asarray(features, dtype=bool)
        if labels.ndim != 1 or len(labels) == 0:
            raise DataError("a dataset needs at least one instance")
        if features.ndim != 2:
            features = features.reshape(0, len(labels))
        if features.shape[1] != len(labels):
            raise DataError(f"feature bitsets have length {features.shape[1]}, expected {len(labels)}")
        self.features = features
        self.labels = labels
        p = features.shape[0]
        self.feature_names = list(feature_names) if feature_names is not None else [f"x{i}" for i in range(p)]
        if len(self.feature_names) != p:
            raise DataError("feature_names length does not match feature count")
        self.predicates = list(predicates) if predicates is not None else None

    @classmethod
    def from_matrix(cls, X, y, feature_names=None, predicates=None) -> "BinaryDataset":
        """Build from an instance-major 0/1 matrix ``X`` of shape (n, p)."""
        X = np.asarray(X, dtype=bool)
        y = np.asarray(y)
        if X.ndim == 1:
            X = X.reshape(len(y), -1)
        return cls(X.T, y, feature_names, predicates)

    @property
    def feature_count(self) -> int:
        return self.features.shape[0]

    @property
    def instance_count(self) -> int:
        return len(self.labels)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Instance-major (n, p) boolean view."""
        return np.ascontiguousarray(self.features.T)

    @cached_property
    def y(self) -> np.ndarray:
        return self.labels.astype(np.int8)

    @property
    def positives(self) -> int:
        return int(self.labels.sum())

    @property
    def majority_fraction(self) -> float:
        pos = self.positives
        return max(pos, self.instance_count - pos) / self.instance_count

    def subset(self, idx) -> "BinaryDataset":
        idx = np.asarray(idx)
        return BinaryDataset(self.features[:, idx], self.labels[idx], self.feature_names, self.predicates)

    def with_labels(self, labels) -> "BinaryDataset":
        return BinaryDataset(self.features, labels, self.feature_names, self.predicates)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryDataset):
            return NotImplemented
        return (np.array_equal(self.features, other.features)
                and np.array_equal(self.labels, other.labels)
                and self.feature_names == other.feature_names)

    def __repr__(self) -> str:
        return f"BinaryDataset(instances={self.instance_count}, features={self.feature_count})"


def binarize_apply(b: Binarizer, raw: RawDataset, align_to: BinaryDataset | None = None) -> BinaryDataset:
    """Evaluate the binarizer's predicates on ``raw``.

    Predicates that are constant on ``raw`` are dropped. Pass ``align_to`` (a
    dataset produced by this binarizer, typically the training set) to keep
    exactly its predicates instead, so that feature ids line up across
    train and test data.
    """
    if [tuple(c) for c in raw.columns] != [tuple(c) for c in b.columns]:
        raise DataError("raw dataset columns do not match the binarizer schema")
    preds = b.predicates
    bits = [p.evaluate(raw.values[p.column]) for p in preds]
    if align_to is not None:
        if align_to.predicates is None:
            raise DataError("align_to dataset carries no predicate ids")
        keep = list(align_to.predicates)
    else:
        keep = [i for i, col in enumerate(bits) if col.any() and not col.all()]
    feats = np.array([bits[i] for i in keep], dtype=bool).reshape(len(keep), raw.n)
    names = [preds[i].describe() for i in keep]
    return BinaryDataset(feats, raw.labels, names, keep)


def stratified_kfold(d, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split instance indices into ``k`` stratified (train, validation) pairs.

    Instances of each class are shuffled and dealt round-robin over the folds,
    continuing the deal across classes, so per-class counts and fold sizes
    both differ by at most one.
    """
    labels = np.asarray(d.labels if hasattr(d, "labels") else d).astype(bool)
    n = len(labels)
    if not 2 <= k <= n:
        raise ValueError(f"fold count must lie in [2, {n}], got {k}")
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.flatnonzero(labels == c)) for c in (False, True)])
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[order] = np.arange(n) % k
    out = []
    all_idx = np.arange(n)
    for i in range(k):
        val = all_idx[fold_of == i]
        out.append((all_idx[fold_of != i], val))
    return out
