"""Hyperparameter grids and cross-validated tuning of optimal trees."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .data import BinaryDataset, stratified_kfold
from .objectives import DEFAULT_PARAMS, ObjectiveKind, ObjectiveParams
from .optimal import Infeasible, Penalties, SolveLimits, Solver
from .tree import Tree, predict_all

__all__ = [
    "TuneGrid",
    "TuneMethod",
    "TuneResult",
    "fold_count",
    "make_grid",
    "parse_method",
    "support_count",
    "tune",
]


class TuneMethod(str, enum.Enum):
    NONE = "none"
    DEPTH = "depth"
    SIZE = "size"
    COMPLEXITY_COST = "cost"
    MIN_SUPPORT = "support"
    QUESTION_LENGTH = "qlen"
    SMOOTHING = "smooth"

    def __str__(self) -> str:
        return self.value


def parse_method(name: str | TuneMethod) -> TuneMethod:
    if isinstance(name, TuneMethod):
        return name
    try:
        return TuneMethod(name.strip().lower())
    except ValueError:
        names = ", ".join(m.value for m in TuneMethod)
        raise ValueError(f"unknown tuning method {name!r}; expected one of: {names}") from None


# Methods whose larger settings regularize more (CV ties go to the larger value).
_LARGER_IS_SIMPLER = frozenset({
    TuneMethod.COMPLEXITY_COST,
    TuneMethod.MIN_SUPPORT,
    TuneMethod.QUESTION_LENGTH,
    TuneMethod.SMOOTHING,
})


def fold_count(n: int) -> int:
    """Number of CV folds for ``n`` instances: 20 up to 100, 10 up to 250, else 5."""
    if n < 2:
        raise ValueError(f"cross-validation needs at least 2 instances, got {n}")
    k = 20 if n <= 100 else 10 if n <= 250 else 5
    return min(k, n)


@dataclass(frozen=True)
class TuneGrid:
    """Sorted, deduplicated settings of one tuning method.

    MinSupport values are fractions of the training set; see :func:`support_count`.
    """

    method: TuneMethod
    values: tuple
    k_requested: int

    @property
    def unconstrained(self):
        return self.values[-1] if self.method in (TuneMethod.DEPTH, TuneMethod.SIZE) else self.values[0]


def _log_space(lo: float, hi: float, m: int) -> list[float]:
    if m <= 0:
        return []
    if m == 1:
        return [hi]
    a, b = math.log(lo), math.log(hi)
    out = [math.exp(a + i * (b - a) / (m - 1)) for i in range(m)]
    out[0], out[-1] = lo, hi
    return out


def _min_step(values: list[float], step: float) -> list[float]:
    """Drop values closer than ``step`` to the last kept one; the top value stays."""
    kept: list[float] = []
    for v in values:
        if not kept or v - kept[-1] >= step * (1 - 1e-12):
            kept.append(v)
    if values and kept[-1] != values[-1]:
        if len(kept) > 1:
            kept.pop()
        kept.append(values[-1])
    return kept


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def make_grid(method: TuneMethod, k: int, dataset_size: int, majority_fraction: float,
              max_depth: int) -> TuneGrid:
    """Grid of candidate settings for ``method``.

    Log-spaced values follow ``exp(ln lo + i (ln hi - ln lo) / (m - 1))``. Integer
    grids round half up, and a minimum step drops values too close to their
    kept predecessor. When a range is empty (``hi < lo``) the grid holds the
    unconstraining setting and the upper bound.
    """
    method = parse_method(method)
    if k < 2:
        raise ValueError(f"grid size k must be >= 2, got {k}")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if dataset_size < 1:
        raise ValueError("dataset_size must be >= 1")
    if not 0.5 <= majority_fraction < 1:
        raise ValueError("majority_fraction must lie in [0.5, 1)")
    N, D = dataset_size, max_depth
    if method is TuneMethod.NONE:
        vals: list = [None]
    elif method is TuneMethod.DEPTH:
        if D + 1 <= k:
            vals = list(range(D + 1))
        else:
            vals = sorted({_round_half_up(i * D / (k - 1)) for i in range(k)})
    elif method is TuneMethod.SIZE:
        top = 2 ** D - 1
        vals = sorted({0, top} | {_round_half_up(v) for v in _log_space(1.0, float(top), k - 1)})
    elif method is TuneMethod.MIN_SUPPORT:
        lo, hi = 1.0 / N, 1.0 - majority_fraction
        if hi < lo:
            vals = [lo]
        else:
            vals = sorted(set(_min_step(_log_space(lo, hi, k), 1.0 / N)))
    else:
        if method is TuneMethod.COMPLEXITY_COST:
            lo, hi, step = 1.0 / (N * D), 0.05, 1.0 / (N * D)
        elif method is TuneMethod.QUESTION_LENGTH:
            lo, hi, step = 1.0 / (N * D), 0.1, 0.0
        else:
            lo, hi, step = 1.0 / D, 0.05 * N, 1.0 / D
        if hi < lo:
            vals = [0.0, hi]
        else:
            vals = [0.0] + _min_step(_log_space(lo, hi, k - 1), step)
        vals = sorted(set(vals))
    return TuneGrid(method, tuple(vals), k)


def support_count(fraction: float, n: int) -> int:
    """Materialize a minimum-support fraction as a count for ``n`` instances."""
    return max(1, _round_half_up(fraction * n))


@dataclass
class TuneResult:
    method: TuneMethod
    grid: TuneGrid
    setting: object
    tree: Tree
    table: list[tuple[object, int, float]] = field(default_factory=list)
    skipped: list[tuple[object, int, str]] = field(default_factory=list)
    solver_calls: int = 0

    def mean_scores(self) -> dict:
        out: dict = {}
        for s, _, acc in self.table:
            out.setdefault(s, []).append(acc)
        return {s: float(np.mean(v)) for s, v in out.items()}


class _Runner:
    """Trains one model per grid value on a given training set."""

    def __init__(self, method: TuneMethod, kind: ObjectiveKind, params: ObjectiveParams,
                 max_depth: int):
        self.method = method
        self.kind = kind
        self.params = params
        self.max_depth = max_depth
        self.calls = 0

    def fit_all(self, d: BinaryDataset, values) -> list:
        """Trees (or the Infeasible error) for every value, in grid order."""
        m, D = self.method, self.max_depth
        out: list = []
        if m in (TuneMethod.DEPTH, TuneMethod.SIZE, TuneMethod.COMPLEXITY_COST, TuneMethod.NONE):
            solver = Solver(d, self.kind, self.params)
            for v in values:
                self.calls += 1
                if m is TuneMethod.DEPTH:
                    out.append(solver.solve(SolveLimits(v)).tree)
                elif m is TuneMethod.SIZE:
                    out.append(solver.solve(SolveLimits(D, v)).tree)
                elif m is TuneMethod.COMPLEXITY_COST:
                    out.append(solver.best_with_leaf_penalty(D, v).tree)
                else:
                    out.append(solver.solve(SolveLimits(D)).tree)
            return out
        for v in values:
            self.calls += 1
            kind, params, pen = self.kind, self.params, Penalties()
            if m is TuneMethod.MIN_SUPPORT:
                pen = Penalties(min_support=support_count(v, d.instance_count))
            elif m is TuneMethod.QUESTION_LENGTH:
                pen = Penalties(omega_cost=v)
            else:
                kind = ObjectiveKind.SMOOTHED_ACCURACY
                params = ObjectiveParams(
                    alpha=self.params.alpha, rho0=self.params.rho0, rho1=self.params.rho1, x=v)
            try:
                out.append(Solver(d, kind, params, pen).solve(SolveLimits(D)).tree)
            except Infeasible as exc:
                out.append(exc)
        return out


def tune(d: BinaryDataset, kind: ObjectiveKind = ObjectiveKind.ACCURACY,
         params: ObjectiveParams = DEFAULT_PARAMS, method: TuneMethod = TuneMethod.SIZE,
         k: int = 16, max_depth: int = 4, seed: int = 0) -> TuneResult:
    """Pick a setting by cross-validated accuracy and retrain on all of ``d``.

    Ties in mean validation accuracy go to the more regularized setting.
    Settings infeasible on some fold are skipped and recorded.
    """
    method = parse_method(method)
    grid = make_grid(method, k, d.instance_count, d.majority_fraction, max_depth)
    runner = _Runner(method, kind, params, max_depth)
    if method is TuneMethod.NONE:
        tree = runner.fit_all(d, [None])[0]
        return TuneResult(method, grid, None, tree, solver_calls=runner.calls)

    folds = fold_count(d.instance_count)
    table: list = []
    skipped: list = []
    bad: set = set()
    for j, (tr, va) in enumerate(stratified_kfold(d, folds, seed)):
        trees = runner.fit_all(d.subset(tr), grid.values)
        Xv, yv = d.matrix[va], d.y[va]
        for v, t in zip(grid.values, trees):
            if isinstance(t, Exception):
                skipped.append((v, j, str(t)))
                bad.add(v)
                continue
            table.append((v, j, float((predict_all(t, Xv) == yv).mean())))

    means: dict = {}
    for v, _, acc in table:
        means.setdefault(v, []).append(acc)
    scores = {v: float(np.mean(a)) for v, a in means.items() if v not in bad}
    if not scores:
        raise Infeasible("no grid setting is feasible on every fold")
    top = max(scores.values())
    tied = [v for v in grid.values if v in scores and scores[v] >= top - 1e-12]
    choice = tied[-1] if method in _LARGER_IS_SIMPLER else tied[0]
    tree = runner.fit_all(d, [choice])[0]
    if isinstance(tree, Exception):
        raise tree
    return TuneResult(method, grid, choice, tree, table, skipped, runner.calls)
