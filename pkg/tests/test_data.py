import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treebench.data import (CATEGORICAL, NUMERIC, BinaryDataset, Binarizer, DataError, RawDataset,
                            binarize_apply, binarize_fit, exhaustive_binarizer, load_csv, read_schema,
                            stratified_kfold)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def raw_numeric(*cols, labels=None):
    n = len(cols[0])
    return RawDataset([(f"c{j}", NUMERIC) for j in range(len(cols))],
                      [np.asarray(c, dtype=float) for c in cols],
                      labels if labels is not None else [i % 2 for i in range(n)])


# -- load_csv -------------------------------------------------------------------

def test_load_lexicographic_labels(tmp_path):
    p = write(tmp_path, "a.csv", "x,cls\n1,yes\n2,no\n3,yes\n")
    raw = load_csv(p, "cls")
    assert raw.labels.tolist() == [1, 0, 1]
    assert raw.label_names == ("no", "yes")
    assert raw.columns == [("x", NUMERIC)]


def test_load_two_columns(tmp_path):
    p = write(tmp_path, "b.csv", "a,y\nred,0\nblue,1\n")
    raw = load_csv(p, "y")
    assert len(raw.columns) == 1 and raw.columns[0] == ("a", CATEGORICAL)


@pytest.mark.parametrize("text,label,msg", [
    ("x,y\n1,a\nfoo,b\n", "y", "mixed column"),
    ("x,y\n1,a\n2,b\n", "z", "not found"),
    ("x,y\n1,a\n2,b\n3,c\n", "y", "exactly two"),
    ("x,y\n1,a\n2\n", "y", "fields"),
    ("x,y\n", "y", "no data"),
    ("", "y", "empty"),
    ("x,y\n1,a\n,b\n", "y", "missing value"),
])
def test_load_errors(tmp_path, text, label, msg):
    with pytest.raises(DataError, match=msg):
        load_csv(write(tmp_path, "bad.csv", text), label)


def test_load_missing_file(tmp_path):
    with pytest.raises(DataError, match="no such file"):
        load_csv(tmp_path / "nope.csv", "y")


def test_schema_override(tmp_path):
    p = write(tmp_path, "c.csv", "zip,y\n1000,a\n2000,b\n1000,b\n")
    s = write(tmp_path, "schema.txt", "# kinds\nzip,categorical\n")
    assert read_schema(s) == {"zip": CATEGORICAL}
    raw = load_csv(p, "y", s)
    assert raw.columns == [("zip", CATEGORICAL)]


# -- binarization -------------------------------------------------------------------

def _nearest_rank_oracle(values, q):
    s = sorted(values)
    n = len(s)
    out = set()
    for i in range(1, q + 1):
        # smallest rank r with r/n >= level
        r = next(r for r in range(1, n + 1) if r * (q + 1) >= i * n)
        out.add(s[r - 1])
    return sorted(t for t in out if t < s[-1])


def test_quantiles_on_1_to_11():
    b = binarize_fit(raw_numeric(list(range(1, 12))), 10)
    assert b.thresholds[0] == [float(v) for v in range(1, 11)]


@settings(max_examples=200)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=60), st.integers(1, 12))
def test_quantiles_match_nearest_rank_oracle(values, q):
    b = binarize_fit(raw_numeric(values), q)
    assert b.thresholds[0] == [float(v) for v in _nearest_rank_oracle(values, q)]


def test_constant_column_has_no_thresholds():
    b = binarize_fit(raw_numeric([3.0] * 8), 10)
    assert b.thresholds[0] == []
    d = binarize_apply(b, raw_numeric([3.0] * 8))
    assert d.feature_count == 0


def test_top_categories():
    vals = [f"v{i:02d}" for i in range(12) for _ in range(12 - i)] + ["v11"]
    raw = RawDataset([("c", CATEGORICAL)], [np.array(vals, dtype=object)], [i % 2 for i in range(len(vals))])
    b = binarize_fit(raw, max_categories=10)
    assert b.categories[0] == [f"v{i:02d}" for i in range(10)]
    # ties broken lexicographically
    raw2 = RawDataset([("c", CATEGORICAL)], [np.array(["b", "a", "c", "c"], dtype=object)], [0, 1, 0, 1])
    assert binarize_fit(raw2, max_categories=2).categories[0] == ["c", "a"]


def test_apply_hand_example():
    b = Binarizer([("c0", NUMERIC)], {0: [0.5, 1.0]})
    raw = raw_numeric([0.1, 0.9])
    bits = np.array([p.evaluate(raw.values[0]) for p in b.predicates])
    assert bits.astype(int).tolist() == [[1, 0], [1, 1]]
    d = binarize_apply(b, raw)
    assert d.features.astype(int).tolist() == [[1, 0]]
    assert d.feature_names == ["c0 <= 0.5"]


def test_apply_uses_train_thresholds():
    train = raw_numeric(list(range(20)))
    test = raw_numeric([100.0 + i for i in range(5)] + [0.0], labels=[0, 1, 0, 1, 0, 1])
    b = binarize_fit(train, 4)
    d_train = binarize_apply(b, train)
    d_test = binarize_apply(b, test, align_to=d_train)
    assert d_test.feature_count == d_train.feature_count
    assert d_test.features[:, :5].sum() == 0  # above every train threshold
    assert d_test.features[:, 5].all()


def test_apply_is_idempotent_and_ordered():
    rng = np.random.default_rng(1)
    raw = RawDataset([("a", NUMERIC), ("b", CATEGORICAL)],
                     [rng.random(30), np.array(rng.choice(["x", "y", "z"], 30), dtype=object)],
                     rng.integers(0, 2, 30))
    b = binarize_fit(raw, 5)
    d1, d2 = binarize_apply(b, raw), binarize_apply(b, raw)
    assert d1 == d2
    cols = [b.predicates[i].column for i in d1.predicates]
    assert cols == sorted(cols)


def test_apply_schema_mismatch():
    b = binarize_fit(raw_numeric([1, 2, 3]))
    with pytest.raises(DataError):
        binarize_apply(b, raw_numeric([1, 2, 3], [4, 5, 6]))


def test_binarizer_invariants_and_round_trip():
    with pytest.raises(ValueError):
        Binarizer([("c0", NUMERIC)], {0: [1.0, 1.0]})
    with pytest.raises(ValueError):
        Binarizer([("c", CATEGORICAL)], {}, {0: ["a", "a"]})
    b = binarize_fit(raw_numeric([1, 5, 2, 8, 3]), 3)
    assert Binarizer.from_dict(b.to_dict()) == b


def test_exhaustive_midpoints():
    b = exhaustive_binarizer(raw_numeric([3, 1, 2, 2]))
    assert b.thresholds[0] == [1.5, 2.5]


def test_binary_dataset_invariants():
    with pytest.raises(DataError):
        BinaryDataset(np.zeros((1, 3), dtype=bool), [])
    with pytest.raises(DataError):
        BinaryDataset(np.zeros((1, 3), dtype=bool), [0, 1])
    d = BinaryDataset.from_matrix([[1, 0], [0, 1], [1, 1]], [1, 0, 1])
    assert (d.feature_count, d.instance_count, d.positives) == (2, 3, 2)
    assert d.majority_fraction == pytest.approx(2 / 3)
    assert d.subset([0, 2]).labels.tolist() == [True, True]


# -- stratified folds ---------------------------------------------------------------------

def test_balanced_folds():
    labels = np.array([0, 1] * 5)
    folds = stratified_kfold(labels, 5, seed=3)
    for _, va in folds:
        assert len(va) == 2 and labels[va].sum() == 1


def test_fold_sizes_with_remainder():
    sizes = sorted((len(va) for _, va in stratified_kfold(np.array([0, 0, 0, 1, 1, 1, 1]), 5, 0)), reverse=True)
    assert sizes == [2, 2, 1, 1, 1]


def test_folds_deterministic_and_range_checked():
    y = np.arange(30) % 3 == 0
    a = stratified_kfold(y, 4, 9)
    b = stratified_kfold(y, 4, 9)
    assert all((x[0] == z[0]).all() and (x[1] == z[1]).all() for x, z in zip(a, b))
    with pytest.raises(ValueError):
        stratified_kfold(y, 1, 0)
    with pytest.raises(ValueError):
        stratified_kfold(y, 31, 0)


@settings(max_examples=200)
@given(st.lists(st.booleans(), min_size=2, max_size=80), st.integers(2, 20), st.integers(0, 1000))
def test_fold_properties(labels, k, seed):
    labels = np.array(labels)
    k = min(k, len(labels))
    folds = stratified_kfold(labels, k, seed)
    vals = np.concatenate([va for _, va in folds])
    assert sorted(vals.tolist()) == list(range(len(labels)))
    for tr, va in folds:
        assert set(tr.tolist()).isdisjoint(va.tolist())
        assert len(tr) + len(va) == len(labels)
    for c in (False, True):
        counts = [int((labels[va] == c).sum()) for _, va in folds]
        assert max(counts) - min(counts) <= 1
    sizes = [len(va) for _, va in folds]
    assert max(sizes) - min(sizes) <= 1
