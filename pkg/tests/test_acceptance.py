"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Statistical criteria draw replications from seed ranges that were not used
while choosing their configurations.
"""
import math
import time

import numpy as np
import pytest
from conftest import random_dataset
from oracles import brute_minimum

from treebench.cli import main, sweep_curve
from treebench.data import BinaryDataset
from treebench.greedy import GrowConfig, fit_tuned, grow
from treebench.metrics import ParetoCurve, accuracy, sign_test, swa
from treebench.objectives import DEFAULT_PARAMS, Concavity, ObjectiveKind, ObjectiveParams, concavity_class, leaf_value
from treebench.optimal import SolveLimits, objective_of_tree, solve
from treebench.synth import SyntheticTreeConfig, gen_tree_dataset
from treebench.tree import route
from treebench.tuning import TuneMethod, fold_count, make_grid, tune

K = ObjectiveKind
ALL = list(ObjectiveKind)
PARAMS = ObjectiveParams(x=1.5)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nacceptance {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok
    return emit


def oracle_datasets():
    rng = np.random.default_rng(2024)
    out = []
    for _ in range(200):
        n, p = int(rng.integers(1, 65)), int(rng.integers(1, 7))
        out.append((random_dataset(rng, n, p), int(rng.integers(0, 3))))
    return out


# 1 ------------------------------------------------------------------------------------------------------------

def test_criterion_1_published_leaf_values(report):
    f = lambda kind, *leaves, params=DEFAULT_PARAMS: sum(leaf_value(kind, params, n, e) for n, e in leaves)
    bits = ObjectiveParams(mdl_quinlan_table1_base=True)
    checks = [
        (f(K.GINI, (8, 2)), 3.000), (f(K.GINI, (4, 2), (4, 0)), 2.000),
        (f(K.ENTROPY, (8, 1)), 2.174), (f(K.ENTROPY, (4, 2), (4, 0)), 2.000),
        (f(K.MDL_MEHTA, (6, 2)), 5.513), (f(K.MDL_MEHTA, (4, 2), (2, 0)), 5.409),
        (f(K.BAYES, (6, 2)), 4.379), (f(K.BAYES, (4, 2), (2, 0)), 4.321),
        (f(K.MDL_QUINLAN, (6, 2), params=bits), 4.708), (f(K.MDL_QUINLAN, (4, 2), (2, 0), params=bits), 4.377),
        (f(K.MDL_QUINLAN, (6, 2)), 4.0943), (f(K.MDL_QUINLAN, (4, 2), (2, 0)), 3.5835),
    ]
    bad = [(got, want) for got, want in checks if abs(got - want) > 1e-3]
    assert report(1, not bad, f"{len(checks) - len(bad)}/{len(checks)} values within 1e-3")


# 2 ------------------------------------------------------------------------------------------------------------

def test_criterion_2_optimality_oracle(report):
    start = time.perf_counter()
    mismatches = []
    for i, (d, depth) in enumerate(oracle_datasets()):
        want = brute_minimum(d, ALL, PARAMS, depth)
        for kind in ALL:
            got = solve(d, kind, PARAMS, SolveLimits(depth)).objective_value
            ok = got == want[kind] if kind is K.ACCURACY else math.isclose(got, want[kind], rel_tol=1e-9, abs_tol=1e-12)
            if not ok:
                mismatches.append((i, kind.value, got, want[kind]))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 300
    assert report(2, ok, f"{len(mismatches)} mismatches over 200 datasets x {len(ALL)} objectives, "
                         f"{elapsed:.0f}s"), mismatches[:5]


# 3 ------------------------------------------------------------------------------------------------------------

def test_criterion_3_greedy_bound(report):
    datasets = [d for d, _ in oracle_datasets()]
    for s in range(20):
        b = gen_tree_dataset(SyntheticTreeConfig(n=300, p=3, d=3, c=0.15, test_per_leaf=1, seed=s))
        datasets.append(b.train)
    violations, checks = [], 0
    for i, d in enumerate(datasets):
        for depth in (1, 2, 3):
            for kind in ALL:
                opt = solve(d, kind, PARAMS, SolveLimits(depth)).objective_value
                g = objective_of_tree(grow(d, GrowConfig(kind, PARAMS, max_depth=depth)), d, kind, PARAMS)
                checks += 1
                if opt > g + 1e-9 * max(1.0, abs(g)):
                    violations.append((i, depth, kind.value, opt, g))
    assert report(3, not violations, f"{len(violations)} violations in {checks} comparisons"), violations[:5]


# 4 ------------------------------------------------------------------------------------------------------------

def _concavity_fixtures():
    # parent (10, 4) splitting into (6, 3) + (4, 1)
    y = [1, 1, 1, 0, 0, 0, 1, 0, 0, 0]
    yield BinaryDataset([[0, 0, 0, 0, 0, 0, 1, 1, 1, 1]], y)
    yield BinaryDataset([[0, 1]], [0, 1])
    rng = np.random.default_rng(77)
    for _ in range(100):
        yield random_dataset(rng, int(rng.integers(2, 80)), int(rng.integers(1, 6)))


def _refused_split(t, d):
    """True when some impure leaf keeps a split that would change its class ratio."""
    _, members, _ = route(t, d.matrix)
    for m in members:
        y = d.labels[m]
        if len(m) == 0 or y.all() or not y.any():
            continue
        for f in range(d.feature_count):
            bit = d.features[f, m]
            if bit.all() or not bit.any():
                continue
            if y[bit].mean() != y[~bit].mean():
                return True
    return False


def test_criterion_4_concavity_behavior(report):
    concave = [k for k in ALL if concavity_class(k) is Concavity.STRICTLY_CONCAVE]
    fixtures = list(_concavity_fixtures())
    per_kind = {k.value: not any(_refused_split(grow(d, GrowConfig(k)), d) for d in fixtures) for k in concave}
    stuck = BinaryDataset([[1, 1, 1, 1, 1, 1, 0, 0, 0, 0], [1, 0, 0, 1, 0, 0, 1, 0, 0, 1]],
                          [1, 1, 1, 0, 0, 0, 1, 0, 0, 0])
    acc_stuck = grow(stuck, GrowConfig(K.ACCURACY)).leaves == 1
    gini_splits = grow(stuck, GrowConfig(K.GINI)).leaves > 1
    ok = all(per_kind.values()) and acc_stuck and gini_splits
    kinds = ", ".join(f"{k}={'ok' if v else 'refuses'}" for k, v in per_kind.items())
    assert report(4, ok, f"{kinds}; accuracy stuck={acc_stuck}; gini splits={gini_splits}")


# 5 ------------------------------------------------------------------------------------------------------------

def test_criterion_5_size_tuned_optimal_beats_pruned_greedy(report):
    start = time.perf_counter()
    opt, grd = [], []
    for s in range(100, 200):
        b = gen_tree_dataset(SyntheticTreeConfig(n=1000, p=5, d=3, c=0.1, seed=s))
        res = tune(b.train, K.ACCURACY, method=TuneMethod.SIZE, k=16, max_depth=3, seed=s)
        g = fit_tuned(b.train, GrowConfig(K.GINI, max_depth=3), s)
        opt.append(accuracy(res.tree, b.test))
        grd.append(accuracy(g, b.test))
    margin = float(np.mean(opt) - np.mean(grd))
    p = sign_test(opt, grd)
    elapsed = time.perf_counter() - start
    ok = margin > 0 and p < 0.05 and elapsed < 1800
    assert report(5, ok, f"margin {100 * margin:+.2f} points, sign test p={p:.2g}, "
                         f"wins {int(np.sum(np.array(opt) > grd))}/losses {int(np.sum(np.array(opt) < grd))}, "
                         f"{elapsed:.0f}s")


# 6 ------------------------------------------------------------------------------------------------------------

def test_criterion_6_noiseless_recovery(report):
    start = time.perf_counter()
    acc, leaves, greedy_leaves = [], [], []
    for s in range(300, 350):
        b = gen_tree_dataset(SyntheticTreeConfig(n=1000, p=5, d=3, seed=s))
        res = tune(b.train, K.ACCURACY, method=TuneMethod.SIZE, k=16, max_depth=3, seed=s)
        acc.append(accuracy(res.tree, b.test))
        leaves.append(res.tree.leaves)
        greedy_leaves.append(fit_tuned(b.train, GrowConfig(K.GINI, max_depth=None), s).leaves)
    elapsed = time.perf_counter() - start
    med_acc, med_leaves, med_greedy = np.median(acc), np.median(leaves), np.median(greedy_leaves)
    ok = med_acc >= 0.99 and med_leaves == 8 and med_greedy > med_leaves and elapsed < 900
    assert report(6, ok, f"optimal median accuracy {med_acc:.4f}, median leaves {med_leaves:g}; "
                         f"unconstrained greedy median leaves {med_greedy:g}; {elapsed:.0f}s")


# 7 ------------------------------------------------------------------------------------------------------------

def test_criterion_7_tuning_necessity(report):
    methods = [m for m in TuneMethod if m is not TuneMethod.NONE]
    scores = {m: [] for m in TuneMethod}
    for s in range(1000, 1100):
        b = gen_tree_dataset(SyntheticTreeConfig(n=200, p=2, d=2, c=0.3, seed=s))
        for m in TuneMethod:
            res = tune(b.train, K.ACCURACY, method=m, k=8, max_depth=4, seed=s)
            scores[m].append(accuracy(res.tree, b.test))
    base = np.array(scores[TuneMethod.NONE])
    parts, ok = [], True
    for m in methods:
        a = np.array(scores[m])
        p = sign_test(a, base)
        good = a.mean() > base.mean() and p < 0.05
        ok &= good
        parts.append(f"{m.value} {100 * (a.mean() - base.mean()):+.2f} p={p:.2g}")
    assert report(7, ok, "; ".join(parts))


# 8 ------------------------------------------------------------------------------------------------------------

def _swa_direct(points, n):
    sizes = sorted(points)
    acc = []
    for i in range(1, n + 1):
        if i in points:
            a = points[i]
        elif i > sizes[-1]:
            a = points[sizes[-1]]
        else:
            lo = max(s for s in sizes if s < i)
            hi = min(s for s in sizes if s > i)
            a = points[lo] + (points[hi] - points[lo]) * (i - lo) / (hi - lo)
        acc.append(max(a, acc[-1]) if acc else a)
    return sum(a / i for i, a in enumerate(acc, 1)) / sum(1 / i for i in range(1, n + 1))


def test_criterion_8_swa(report):
    examples = (
        swa(ParetoCurve({1: 0.7, 5: 0.7, 12: 0.7}), 16) == pytest.approx(0.7, rel=1e-12)
        and round(swa(ParetoCurve({1: 0.6, 2: 0.8}), 2), 4) == 0.6667
        and round(swa(ParetoCurve({1: 0.6, 3: 0.9}), 3), 4) == 0.6955
    )
    rng = np.random.default_rng(8)
    monotone = True
    for _ in range(1000):
        sizes = {1} | set(rng.integers(2, 25, size=int(rng.integers(0, 7))).tolist())
        pts = {int(s): float(rng.uniform(0.3, 1.0)) for s in sizes}
        up = {s: min(1.0, a + float(rng.uniform(0, 0.2))) for s, a in pts.items()}
        n = int(rng.integers(1, 30))
        v = swa(ParetoCurve(pts), n)
        monotone &= abs(v - _swa_direct(pts, n)) < 1e-12 and swa(ParetoCurve(up), n) >= v - 1e-12
    wins = 0
    for s in range(500, 550):
        b = gen_tree_dataset(SyntheticTreeConfig(n=1000, p=5, d=3, seed=s))
        o = swa(sweep_curve("optimal", b.train, b.test, K.ACCURACY, DEFAULT_PARAMS, 4, 16, K.GINI), 16)
        g = swa(sweep_curve("greedy", b.train, b.test, K.ACCURACY, DEFAULT_PARAMS, 4, 16, K.GINI), 16)
        wins += o >= g
    ok = examples and monotone and wins >= 35
    assert report(8, ok, f"examples {'ok' if examples else 'wrong'}; dominance on 1000 curves "
                         f"{'ok' if monotone else 'violated'}; optimal SWA_16 >= greedy on {wins}/50 seeds")


# 9 ------------------------------------------------------------------------------------------------------------

def test_criterion_9_grid_and_fold_rules(report):
    folds = all(fold_count(n) == k for n, k in
                [(80, 20), (100, 20), (101, 10), (200, 10), (250, 10), (251, 5), (1000, 5), (7, 7)])
    grids = True
    zero = {TuneMethod.COMPLEXITY_COST, TuneMethod.QUESTION_LENGTH, TuneMethod.SMOOTHING}
    for method in TuneMethod:
        for k in (2, 5, 16):
            for n, maj, depth in ((20, 0.5, 1), (150, 0.7, 3), (1000, 0.55, 4), (50000, 0.9, 6)):
                g = make_grid(method, k, n, maj, depth)
                free = {TuneMethod.NONE: None, TuneMethod.DEPTH: depth, TuneMethod.SIZE: 2 ** depth - 1,
                        TuneMethod.MIN_SUPPORT: 1 / n}.get(method, 0.0)
                grids &= free in g.values and g.unconstrained == free
                grids &= method not in zero or 0.0 in g.values
                grids &= method is not TuneMethod.COMPLEXITY_COST or max(g.values) == 0.05
    assert report(9, folds and grids, f"fold rule {'ok' if folds else 'wrong'}; "
                                      f"grids {'ok' if grids else 'missing settings'}")


# 10 -----------------------------------------------------------------------------------------------------------

def test_criterion_10_cli_determinism(report, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "scores.csv").write_text("dataset,a,b,c\nx,90,80,85\ny,84.04,84.01,70\nz,60,61,62\n")
    (tmp_path / "raw.csv").write_text("x,c,label\n" + "".join(
        f"{(i * 37 % 101) / 10},{'rgb'[i % 3]},{'ab'[(i * 7) % 5 < 2]}\n" for i in range(60)))

    def run(tag):
        d = tmp_path / tag
        d.mkdir()
        commands = [
            ["synth", "--n", "300", "--p", "3", "--class-noise", "0.1", "--test-per-leaf", "20",
             "--seed", "3", "--out", str(d / "synth")],
            ["binarize", "--data", "raw.csv", "--out", str(d / "bin.csv")],
            ["fit", "--data", str(d / "synth" / "train.csv"), "--test", str(d / "synth" / "test.csv"),
             "--objective", "gini", "--out", str(d / "model.json"), "--report", str(d / "fit.csv")],
            ["fit", "--method", "greedy", "--prune", "--data", "raw.csv", "--seed", "5",
             "--out", str(d / "greedy.json"), "--report", str(d / "greedy.csv")],
            ["tune", "--data", str(d / "synth" / "train.csv"), "--tune", "cost", "--k", "5", "--seed", "2",
             "--out", str(d / "tuned.json"), "--table", str(d / "table.csv"), "--report", str(d / "tune.csv")],
            ["bench", "--reps", "3", "--n", "150", "--p", "2", "--test-per-leaf", "10", "--class-noise", "0.2",
             "--tune", "none,size", "--methods", "optimal,greedy,greedy-unlimited", "--out", str(d / "bench.csv")],
            ["swa", "--synth", "--n", "200", "--p", "2", "--test-per-leaf", "10", "--out", str(d / "curve.csv")],
            ["rank", "--scores", "scores.csv", "--out", str(d / "rank.json")],
        ]
        codes = [main(c) for c in commands]
        stdout = capsys.readouterr().out
        files = {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}
        return codes, stdout, files

    first, second = run("a"), run("b")
    ok = set(first[0]) == {0} and first == second
    assert report(10, ok, f"{len(first[2])} output files and stdout byte-identical across reruns"
                  if ok else f"exit codes {first[0]}; outputs differ or failed")
