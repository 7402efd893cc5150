import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treebench.data import BinaryDataset
from treebench.objectives import LeafStats
from treebench.tree import (Branch, Leaf, deserialize, from_json, leaf_stats, predict, predict_all,
                            relabel, route, serialize, to_dict, to_json, tree_metrics)


def trees(max_feature: int = 12):
    return st.recursive(
        st.builds(Leaf, st.integers(0, 1)),
        lambda kids: st.builds(Branch, st.integers(0, max_feature), kids, kids),
        max_leaves=24,
    )


def test_predict_basics():
    assert predict(Leaf(1), [0, 1, 0]) == 1
    assert predict(Branch(0, Leaf(0), Leaf(1)), [1]) == 1
    assert predict(Branch(0, Leaf(0), Leaf(1)), [0]) == 0


def test_xor_truth_table():
    xor = Branch(0, Branch(1, Leaf(0), Leaf(1)), Branch(1, Leaf(1), Leaf(0)))
    for a in (0, 1):
        for b in (0, 1):
            assert predict(xor, [a, b]) == a ^ b
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=bool)
    assert predict_all(xor, X).tolist() == [0, 1, 1, 0]


def test_predict_out_of_range():
    with pytest.raises(ValueError):
        predict(Branch(3, Leaf(0), Leaf(1)), [0, 1])
    with pytest.raises(ValueError):
        predict_all(Branch(3, Leaf(0), Leaf(1)), np.zeros((2, 2), dtype=bool))


def test_invalid_nodes():
    with pytest.raises(ValueError):
        Leaf(2)
    with pytest.raises(ValueError):
        Branch(-1, Leaf(0), Leaf(1))


def test_leaf_stats_examples():
    d = BinaryDataset.from_matrix(np.zeros((10, 1)), [1] * 6 + [0] * 4)
    assert leaf_stats(Leaf(0), d) == [LeafStats(10, 4)]
    d2 = BinaryDataset.from_matrix(np.array([[1], [1], [0], [0], [0]]), [1, 1, 0, 0, 0])
    assert leaf_stats(Branch(0, Leaf(0), Leaf(1)), d2) == [LeafStats(3, 0), LeafStats(2, 0)]
    # nothing reaches the right leaf
    d3 = BinaryDataset.from_matrix(np.zeros((4, 1)), [1, 0, 0, 1])
    assert leaf_stats(Branch(0, Leaf(0), Leaf(1)), d3) == [LeafStats(4, 2), LeafStats(0, 0)]


def test_question_length_examples():
    rng = np.random.default_rng(0)
    X = rng.random((50, 3)) < 0.5
    d = BinaryDataset.from_matrix(X, rng.random(50) < 0.5)
    assert tree_metrics(Leaf(0), d).question_length == 0
    full = Branch(0, Branch(1, Leaf(0), Leaf(1)), Branch(2, Leaf(0), Leaf(1)))
    assert tree_metrics(full, d).question_length == 2.0
    # 30% of instances continue to a second branching node
    X = np.zeros((10, 2), dtype=bool)
    X[:3, 0] = True
    d = BinaryDataset.from_matrix(X, [0, 1] * 5)
    t = Branch(0, Leaf(0), Branch(1, Leaf(0), Leaf(1)))
    m = tree_metrics(t, d)
    assert m.question_length == pytest.approx(1.3)
    assert (m.leaves, m.branching_nodes, m.depth) == (3, 2, 2)


def test_serialize_format():
    assert serialize(Leaf(1)) == "L1"
    assert deserialize("L1") == Leaf(1)
    assert serialize(Branch(3, Leaf(0), Leaf(1))) == "B3(L0,L1)"
    assert serialize(Branch(12, Branch(3, Leaf(1), Leaf(0)), Leaf(1))) == "B12(B3(L1,L0),L1)"


@pytest.mark.parametrize("bad", ["", "L2", "B3(L0)", "B3(L0,L1", "B(L0,L1)", "L0L1", "B3(L0,L1))", "X"])
def test_deserialize_rejects_malformed(bad):
    with pytest.raises(ValueError):
        deserialize(bad)


@settings(max_examples=1000)
@given(trees())
def test_round_trip(t):
    assert deserialize(serialize(t)) == t
    assert from_json(to_json(t)) == t


@given(trees())
def test_structure_counts(t):
    assert t.leaves == t.branching_count + 1
    assert len(serialize(t).split("L")) - 1 == t.leaves


@given(trees(), trees())
def test_sort_key_matches_string_order(a, b):
    sa, sb = serialize(a), serialize(b)
    assert (a.sort_key < b.sort_key) == (sa < sb)
    assert (a.sort_key == b.sort_key) == (sa == sb)


def test_json_shape():
    t = Branch(2, Leaf(0), Leaf(1))
    assert to_dict(t) == {"feature": 2, "left": {"label": 0}, "right": {"label": 1}}
    assert json.loads(to_json(t))["feature"] == 2
    with pytest.raises(ValueError):
        from_json('{"feature": 1, "left": {"label": 0}}')


@given(trees(5), st.integers(0, 2 ** 31))
def test_route_partitions_instances(t, seed):
    rng = np.random.default_rng(seed)
    X = rng.random((40, 6)) < 0.5
    y = rng.random(40) < 0.4
    d = BinaryDataset.from_matrix(X, y)
    leaves, members, path = route(t, X)
    assert len(leaves) == t.leaves
    assert sorted(np.concatenate(members).tolist()) == list(range(40))
    stats = leaf_stats(t, d)
    assert sum(s.n for s in stats) == 40
    r = relabel(t, d)
    assert sum(s.e for s in stats) == int((predict_all(r, X) != y).sum())
    m = tree_metrics(t, d)
    assert 0 <= m.question_length <= m.depth
