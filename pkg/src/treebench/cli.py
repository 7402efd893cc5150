"""Command-line interface: ``treebench <command> [options]``.

Exit status is 0 on success, 1 on a configuration or input error and 2 when
a benchmark finished with some failed runs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import (DataError, NUMERIC, BinaryDataset, Binarizer, RawDataset, binarize_apply,
                   binarize_fit, exhaustive_binarizer, load_csv, stratified_kfold)
from .greedy import (BINARY_FEATURES, RAW_THRESHOLDS, GrowConfig, ccp_path, fit_tuned, grow,
                     raw_view)
from .metrics import ParetoCurve, ScoreMatrix, accuracy, average_ranks, nemenyi_cd, swa, tdr_fdr
from .objectives import ObjectiveKind, ObjectiveParams, parse_kind
from .optimal import Infeasible, Penalties, SolveLimits, Solver, objective_of_tree
from .synth import SyntheticTreeConfig, gen_linear_dataset, gen_tree_dataset
from .tree import Leaf, Tree, to_dict, tree_metrics
from .tuning import TuneMethod, make_grid, parse_method, tune

REPORT_HEADER = "# treebench-report v1"
MODEL_FORMAT = "treebench-model v1"


class ConfigError(Exception):
    """Invalid command-line configuration (exit status 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- shared helpers -----------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6f}"
    return str(v)


def _write_report(path: str | None, header: list[str], rows: list[list]) -> None:
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        fh.write(REPORT_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    finally:
        if path:
            fh.close()


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _is_binary(raw: RawDataset) -> bool:
    return bool(raw.columns) and all(
        kind == NUMERIC and np.isin(v, (0.0, 1.0)).all() for (_, kind), v in zip(raw.columns, raw.values))


def _direct(raw: RawDataset) -> BinaryDataset:
    names = [name for name, _ in raw.columns]
    feats = np.array([v == 1.0 for v in raw.values], dtype=bool).reshape(len(names), raw.n)
    return BinaryDataset(feats, raw.labels, names, list(range(len(names))))


@dataclass
class Prepared:
    """Train/test data in a shared binary feature space."""

    train: BinaryDataset
    test: BinaryDataset | None
    binarizer: Binarizer | None
    mode: str


def prepare(train_raw: RawDataset, test_raw: RawDataset | None, args) -> Prepared:
    """Binarize for the chosen mode; 0/1 inputs are used as features directly."""
    mode = getattr(args, "numeric_mode", BINARY_FEATURES)
    if mode == RAW_THRESHOLDS:
        b = exhaustive_binarizer(train_raw)
        train = raw_view(train_raw)
        test = binarize_apply(b, test_raw, align_to=train) if test_raw is not None else None
        return Prepared(train, test, b, mode)
    if _is_binary(train_raw):
        test = None
        if test_raw is not None:
            if [c for c, _ in test_raw.columns] != [c for c, _ in train_raw.columns]:
                raise DataError("test columns do not match training columns")
            test = _direct(test_raw)
        return Prepared(_direct(train_raw), test, None, mode)
    b = binarize_fit(train_raw, args.quantiles, args.categories)
    train = binarize_apply(b, train_raw)
    test = binarize_apply(b, test_raw, align_to=train) if test_raw is not None else None
    return Prepared(train, test, b, mode)


def _load(args) -> Prepared:
    for p in [args.data] + ([args.test] if args.test else []):
        if not os.path.exists(p):
            raise ConfigError(f"no such file: {p}")
    train = load_csv(args.data, args.label, args.schema)
    test = load_csv(args.test, args.label, args.schema) if args.test else None
    return prepare(train, test, args)


def _params(args) -> ObjectiveParams:
    return ObjectiveParams(alpha=args.alpha, rho0=args.rho0, rho1=args.rho1, x=args.smoothing)


def _model_json(t: Tree, prep: Prepared, kind: ObjectiveKind, value: float | None, extra: dict) -> dict:
    return {
        "format": MODEL_FORMAT,
        "tree": to_dict(t),
        "feature_names": prep.train.feature_names,
        "binarizer": prep.binarizer.to_dict() if prep.binarizer else None,
        "predicates": prep.train.predicates,
        "objective": kind.value,
        "objective_value": value,
        **extra,
    }


def _eval_row(t: Tree, train: BinaryDataset, test: BinaryDataset | None) -> list:
    m = tree_metrics(t, train)
    return [accuracy(t, train), accuracy(t, test) if test is not None else None,
            m.leaves, m.depth, m.question_length]


EVAL_COLUMNS = ["train_acc", "test_acc", "leaves", "depth", "question_length"]


# -- commands -------------------------------------------------------------------

def cmd_binarize(args) -> int:
    if not os.path.exists(args.data):
        raise ConfigError(f"no such file: {args.data}")
    raw = load_csv(args.data, args.label, args.schema)
    b = binarize_fit(raw, args.quantiles, args.categories)
    d = binarize_apply(b, raw)
    out = args.out or "binarized.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*d.feature_names, args.label])
        for row, y in zip(d.matrix.astype(int), d.labels.astype(int)):
            w.writerow([*row, raw.label_names[y]])
    _write_json(out + ".binarizer.json", {**b.to_dict(), "kept": d.predicates})
    return 0


def _fit_one(args, prep: Prepared):
    """Train per ``args``; returns (tree, objective value or None, extras)."""
    kind = parse_kind(args.objective)
    params = _params(args)
    if args.method == "greedy":
        cfg = GrowConfig(kind, params, None if args.no_depth_limit else args.max_depth,
                         args.min_support, BINARY_FEATURES)
        if args.prune:
            t, alpha = fit_tuned(prep.train, cfg, args.seed, return_alpha=True)
            return t, None, {"ccp_alpha": alpha}
        return grow(prep.train, cfg), None, {}
    pen = Penalties(args.cost, args.qlen, args.min_support)
    limits = SolveLimits(args.max_depth, args.max_nodes)
    sol = Solver(prep.train, kind, params, pen).solve(limits)
    return sol.tree, sol.objective_value, {"cache": sol.cache_stats}


def cmd_fit(args) -> int:
    prep = _load(args)
    start = time.perf_counter()
    t, value, extra = _fit_one(args, prep)
    wall = (time.perf_counter() - start) * 1000.0
    kind = parse_kind(args.objective)
    if args.out:
        extra.pop("cache", None)
        _write_json(args.out, _model_json(t, prep, kind, value, {"method": args.method, **extra}))
    header = ["method", "objective", "max_depth", "objective_value", *EVAL_COLUMNS]
    row = [args.method, kind.value, args.max_depth, value, *_eval_row(t, prep.train, prep.test)]
    if args.timing:
        header.append("wall_ms")
        row.append(wall)
    _write_report(args.report, header, [row])
    return 0


def cmd_tune(args) -> int:
    prep = _load(args)
    kind = parse_kind(args.objective)
    res = tune(prep.train, kind, _params(args), parse_method(args.tune), args.k, args.max_depth, args.seed)
    if args.out:
        value = objective_of_tree(res.tree, prep.train, kind, _params(args))
        _write_json(args.out, _model_json(res.tree, prep, kind, value, {
            "method": "optimal", "tune": res.method.value, "setting": res.setting}))
    if args.table:
        rows = [[s, j, acc] for s, j, acc in res.table] + [[s, j, f"skipped: {msg}"] for s, j, msg in res.skipped]
        _write_report(args.table, ["setting", "fold", "validation_acc"], rows)
    header = ["tune", "setting", *EVAL_COLUMNS]
    _write_report(args.report, header, [[res.method.value, res.setting, *_eval_row(res.tree, prep.train, prep.test)]])
    return 0


def _write_binary_csv(path: str, d: BinaryDataset) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*d.feature_names, "label"])
        for row, y in zip(d.matrix.astype(int), d.labels.astype(int)):
            w.writerow([*row, y])


def cmd_synth(args) -> int:
    out = args.out or "synth"
    os.makedirs(out, exist_ok=True)
    if args.kind == "tree":
        cfg = SyntheticTreeConfig(args.n, args.p, args.depth, args.feature_noise, args.class_noise,
                                  args.test_per_leaf, args.min_leaf, args.seed)
        b = gen_tree_dataset(cfg)
        train, test = b.train, b.test
        _write_json(os.path.join(out, "truth.json"), {
            "tree": to_dict(b.truth), "truth_features": sorted(b.truth_features),
            "infeasible": b.infeasible, "binarizer": b.binarizer.to_dict(),
            "predicates": train.predicates, "seed": args.seed})
    else:
        train, test = gen_linear_dataset(args.n, args.p, args.feature_noise, args.class_noise,
                                         args.test_size, args.seed)
    _write_binary_csv(os.path.join(out, "train.csv"), train)
    _write_binary_csv(os.path.join(out, "test.csv"), test)
    return 0


# -- benchmark ------------------------------------------------------------------

@dataclass
class Cell:
    """One (dataset, method, tuning) run of a benchmark."""

    run: str
    seed: int
    method: str
    tune: str
    source: dict = field(default_factory=dict)


def _cell_data(c: Cell, opts: dict):
    src = c.source
    if src["kind"] == "tree":
        b = gen_tree_dataset(SyntheticTreeConfig(
            src["n"], src["p"], src["depth"], src["f"], src["c"], src["test_per_leaf"], 5, c.seed))
        return b.train, b.test, b.truth
    if src["kind"] == "linear":
        train, test = gen_linear_dataset(src["n"], src["p"], src["f"], src["c"], src["test_size"], c.seed)
        return train, test, None
    raw = load_csv(src["path"], src["label"], src.get("schema"))
    tr, te = stratified_kfold(raw.labels, 5, c.seed)[0]
    ns = argparse.Namespace(numeric_mode=BINARY_FEATURES, quantiles=opts["quantiles"],
                            categories=opts["categories"])
    prep = prepare(raw.take(tr), raw.take(te), ns)
    return prep.train, prep.test, None


def run_cell(c: Cell, opts: dict) -> list:
    """Evaluate one cell; failures become rows with an error message."""
    try:
        train, test, truth = _cell_data(c, opts)
        kind = parse_kind(opts["objective"])
        params = ObjectiveParams(**opts["params"])
        D = opts["max_depth"]
        start = time.perf_counter()
        setting = None
        if c.method == "optimal":
            res = tune(train, kind, params, parse_method(c.tune), opts["k"], D, c.seed)
            t, setting = res.tree, res.setting
        elif c.method in ("greedy", "greedy-unlimited"):
            gk = parse_kind(opts["greedy_objective"])
            cfg = GrowConfig(gk, params, D if c.method == "greedy" else None)
            t, setting = fit_tuned(train, cfg, c.seed, return_alpha=True)
        else:
            raise ConfigError(f"unknown method {c.method!r}")
        wall = (time.perf_counter() - start) * 1000.0
        tdr, fdr = tdr_fdr(t, truth) if truth is not None else (None, None)
        row = [c.run, c.seed, c.method, c.tune, setting, *_eval_row(t, train, test), tdr, fdr, ""]
    except Exception as exc:  # one failed run must not stop the benchmark
        wall = float("nan")
        row = [c.run, c.seed, c.method, c.tune, None, None, None, None, None, None, None, None,
               f"{type(exc).__name__}: {exc}".replace("\n", " ")]
    if opts["timing"]:
        row.append(wall)
    return row


BENCH_COLUMNS = ["run", "seed", "method", "tune", "setting", *EVAL_COLUMNS, "tdr", "fdr", "error"]


def _bench_cells(args) -> list[Cell]:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    tunes = [parse_method(t).value for t in args.tune.split(",")]
    for m in methods:
        if m not in ("optimal", "greedy", "greedy-unlimited"):
            raise ConfigError(f"unknown method {m!r}; expected optimal, greedy or greedy-unlimited")
    sources: list[tuple[str, int, dict]] = []
    if args.data:
        for path in args.data:
            if not os.path.exists(path):
                raise ConfigError(f"no such file: {path}")
            for r in range(args.reps):
                name = f"{os.path.basename(path)}#{r}"
                sources.append((name, args.seed + r, {"kind": "csv", "path": path, "label": args.label,
                                                      "schema": args.schema}))
    else:
        for r in range(args.reps):
            sources.append((f"{args.synth}#{r}", args.seed + r, {
                "kind": args.synth, "n": args.n, "p": args.p, "depth": args.depth,
                "f": args.feature_noise, "c": args.class_noise,
                "test_per_leaf": args.test_per_leaf, "test_size": args.test_size}))
    cells = []
    for name, seed, src in sources:
        for m in methods:
            for t in (tunes if m == "optimal" else ["ccp"]):
                cells.append(Cell(name, seed, m, t, src))
    return cells


def _done_keys(path: str) -> dict:
    """Rows already present in a report file, keyed by (run, method, tune)."""
    done = {}
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    ei = BENCH_COLUMNS.index("error")
    for r in list(csv.reader(lines))[1:]:
        if len(r) > ei and not r[ei]:
            done[(r[0], r[2], r[3])] = r
    return done


def cmd_bench(args) -> int:
    cells = _bench_cells(args)
    opts = {
        "objective": args.objective, "greedy_objective": args.greedy_objective,
        "params": {"alpha": args.alpha, "rho0": args.rho0, "rho1": args.rho1, "x": args.smoothing},
        "max_depth": args.max_depth, "k": args.k, "timing": args.timing,
        "quantiles": args.quantiles, "categories": args.categories,
    }
    header = BENCH_COLUMNS + (["wall_ms"] if args.timing else [])
    out = args.out or "report.csv"
    done = _done_keys(out) if args.resume and os.path.exists(out) else {}
    todo = [c for c in cells if (c.run, c.method, c.tune) not in done]
    results: dict[int, list] = {}
    with open(out, "w", newline="") as fh:
        fh.write(REPORT_HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        next_i = 0

        def flush():
            nonlocal next_i
            while next_i < len(cells):
                c = cells[next_i]
                key = (c.run, c.method, c.tune)
                if key in done:
                    w.writerow(done[key])
                elif next_i in results:
                    w.writerow([_fmt(v) for v in results.pop(next_i)])
                else:
                    break
                next_i += 1
            fh.flush()

        index = {id(c): i for i, c in enumerate(cells)}
        if args.jobs > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as ex:
                futs = [(index[id(c)], ex.submit(run_cell, c, opts)) for c in todo]
                for i, f in futs:
                    results[i] = f.result()
                    flush()
        else:
            for c in todo:
                results[index[id(c)]] = run_cell(c, opts)
                flush()
        flush()
    failed = 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(ln for ln in fh if not ln.startswith("#")))
    ei = BENCH_COLUMNS.index("error")
    failed = sum(1 for r in rows[1:] if r[ei])
    if failed:
        print(f"{failed} of {len(cells)} runs failed; see the error column of {out}", file=sys.stderr)
        return 2
    return 0


# -- SWA and ranks ------------------------------------------------------------------

def _read_curve(path: str) -> ParetoCurve:
    runs = []
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(ln for ln in fh if not ln.startswith("#")) if r]
    if not rows or rows[0][:2] != ["leaves", "accuracy"]:
        raise ConfigError(f"{path}: expected a 'leaves,accuracy' header")
    for r in rows[1:]:
        try:
            runs.append((int(r[0]), float(r[1])))
        except (ValueError, IndexError):
            raise ConfigError(f"{path}: bad curve row {r!r}") from None
    return ParetoCurve.from_runs(runs)


def sweep_curve(method: str, train: BinaryDataset, test: BinaryDataset, kind: ObjectiveKind,
                params: ObjectiveParams, max_depth: int, k: int, greedy_kind: ObjectiveKind) -> ParetoCurve:
    """Leaf count and test accuracy for each complexity setting."""
    runs = []
    if method == "optimal":
        grid = make_grid(TuneMethod.SIZE, k, train.instance_count, train.majority_fraction, max_depth)
        solver = Solver(train, kind, params)
        for b in grid.values:
            t = solver.solve(SolveLimits(max_depth, b)).tree
            runs.append((t.leaves, accuracy(t, test)))
    elif method == "greedy":
        path = ccp_path(grow(train, GrowConfig(greedy_kind, params, max_depth)), train)
        runs = [(t.leaves, accuracy(t, test)) for t in path.trees]
    else:
        raise ConfigError(f"unknown sweep method {method!r}")
    return ParetoCurve.from_runs(runs)


def cmd_swa(args) -> int:
    if args.curve:
        if not os.path.exists(args.curve):
            raise ConfigError(f"no such file: {args.curve}")
        curve = _read_curve(args.curve)
    else:
        if args.synth:
            b = gen_tree_dataset(SyntheticTreeConfig(args.n, args.p, args.depth, args.feature_noise,
                                                     args.class_noise, args.test_per_leaf, 5, args.seed))
            train, test = b.train, b.test
        else:
            if not args.data or not args.test:
                raise ConfigError("swa needs --curve, --synth, or both --data and --test")
            prep = _load(args)
            train, test = prep.train, prep.test
        curve = sweep_curve(args.method, train, test, parse_kind(args.objective), _params(args),
                            args.max_depth, args.k, parse_kind(args.greedy_objective))
    value = swa(curve, args.swa_n)
    rows = [[s, a] for s, a in sorted(curve.points.items())]
    _write_report(args.out, ["leaves", "accuracy"], rows)
    print(f"swa_{args.swa_n},{value:.6f}")
    return 0


def cmd_rank(args) -> int:
    if not os.path.exists(args.scores):
        raise ConfigError(f"no such file: {args.scores}")
    with open(args.scores) as fh:
        m = ScoreMatrix.from_csv(fh.read())
    ranks = average_ranks(m)
    k, n = len(m.methods), len(m.datasets)
    out = {"methods": m.methods, "datasets": n,
           "average_ranks": {name: round(r, 6) for name, r in ranks.items()}}
    if 2 <= k <= 20 and n >= 2:
        out["critical_distance"] = round(nemenyi_cd(k, n, args.alpha_cd), 6)
        out["alpha"] = args.alpha_cd
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# -- argument parsing -------------------------------------------------------------

def _common(p: argparse.ArgumentParser, data: bool = True) -> None:
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--out", help="output path")
    p.add_argument("--objective", default="accuracy", help="leaf objective of the optimal solver")
    p.add_argument("--max-depth", type=int, default=3, help="maximum tree depth (default 3)")
    p.add_argument("--tune", default="none", help="tuning method: none|depth|size|cost|support|qlen|smooth")
    p.add_argument("--k", type=int, default=16, help="tuning grid size (default 16)")
    p.add_argument("--alpha", type=float, default=0.25, help="binomial pessimistic confidence level")
    p.add_argument("--rho0", type=float, default=2.5)
    p.add_argument("--rho1", type=float, default=2.5)
    p.add_argument("--smoothing", type=float, default=0.0, help="Laplace count x of the smoothed objective")
    p.add_argument("--timing", action="store_true", help="add a wall_ms column (makes reports non-reproducible)")
    if data:
        p.add_argument("--data", help="training CSV")
        p.add_argument("--test", help="test CSV")
        _input_flags(p)


def _input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--label", default="label", help="label column name (default 'label')")
    p.add_argument("--schema", help="schema file of 'name,kind' lines")
    p.add_argument("--quantiles", type=int, default=10, help="thresholds per numeric column")
    p.add_argument("--categories", type=int, default=10, help="kept values per categorical column")


def _synth_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=1000, help="training instances")
    p.add_argument("--p", type=int, default=5, help="numeric features")
    p.add_argument("--depth", type=int, default=3, help="depth of the ground-truth tree")
    p.add_argument("--feature-noise", type=float, default=0.0)
    p.add_argument("--class-noise", type=float, default=0.0)
    p.add_argument("--test-per-leaf", type=int, default=1000)
    p.add_argument("--test-size", type=int, default=1000, help="test instances (linear kind)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="treebench", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("binarize", help="binarize a CSV at quantile thresholds")
    _common(p)
    p.set_defaults(func=cmd_binarize)

    p = sub.add_parser("fit", help="train one tree")
    _common(p)
    p.add_argument("--method", choices=["optimal", "greedy"], default="optimal")
    p.add_argument("--max-nodes", type=int, default=None, help="branching-node limit (optimal)")
    p.add_argument("--no-depth-limit", action="store_true", help="greedy: grow up to depth 20")
    p.add_argument("--min-support", type=int, default=1)
    p.add_argument("--cost", type=float, default=0.0, help="per-leaf complexity cost lambda")
    p.add_argument("--qlen", type=float, default=0.0, help="question-length cost omega")
    p.add_argument("--prune", action="store_true", help="greedy: cross-validated cost-complexity pruning")
    p.add_argument("--numeric-mode", choices=[BINARY_FEATURES, RAW_THRESHOLDS], default=BINARY_FEATURES)
    p.add_argument("--report", help="report CSV path (default stdout)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("tune", help="cross-validated tuning of an optimal tree")
    _common(p)
    p.add_argument("--table", help="per-setting CV table CSV")
    p.add_argument("--report", help="report CSV path (default stdout)")
    p.set_defaults(func=cmd_tune, tune="size")

    p = sub.add_parser("synth", help="generate a synthetic benchmark")
    _common(p, data=False)
    p.add_argument("--kind", choices=["tree", "linear"], default="tree")
    p.add_argument("--min-leaf", type=int, default=5)
    _synth_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="run a method x tuning benchmark")
    _common(p, data=False)
    _input_flags(p)
    p.add_argument("--data", nargs="+", help="CSV datasets (default: synthetic)")
    p.add_argument("--synth", choices=["tree", "linear"], default="tree")
    p.add_argument("--reps", type=int, default=10, help="replications per dataset")
    p.add_argument("--methods", default="optimal,greedy", help="optimal, greedy, greedy-unlimited")
    p.add_argument("--greedy-objective", default="gini")
    p.add_argument("--resume", action="store_true", help="keep finished rows of an existing report")
    _synth_flags(p)
    p.set_defaults(func=cmd_bench, tune="size")

    p = sub.add_parser("swa", help="size-weighted accuracy of a complexity sweep")
    _common(p)
    p.add_argument("--curve", help="existing 'leaves,accuracy' CSV")
    p.add_argument("--synth", action="store_true", help="sweep on a synthetic tree dataset")
    p.add_argument("--method", choices=["optimal", "greedy"], default="optimal")
    p.add_argument("--greedy-objective", default="gini")
    p.add_argument("--swa-n", type=int, default=16, help="largest tree size of the SWA sum")
    _synth_flags(p)
    p.set_defaults(func=cmd_swa)

    p = sub.add_parser("rank", help="average ranks and Nemenyi critical distance")
    _common(p, data=False)
    p.add_argument("--scores", required=True, help="score matrix CSV (rows datasets, columns methods)")
    p.add_argument("--alpha-cd", type=float, default=0.05, choices=[0.05, 0.10])
    p.set_defaults(func=cmd_rank)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    if getattr(args, "jobs", 1) < 1:
        print("treebench: error: --jobs must be >= 1", file=sys.stderr)
        return 1
    if args.command in ("binarize", "fit", "tune") and not args.data:
        print(f"treebench {args.command}: error: --data is required", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ConfigError, DataError, Infeasible, ValueError, OSError) as exc:
        print(f"treebench {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
