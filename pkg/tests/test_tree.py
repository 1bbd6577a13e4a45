import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_dataset
from oracles import eq1_importance, plain_cart, same_structure
from privtree.data import Dataset
from privtree.errors import ConfigurationError, EmptyDatasetError, SchemaError
from privtree.synthetic import label_equals_feature
from privtree.tree import (
    DecisionTree,
    FeatureSensitivity,
    SensitivitySpec,
    TreeConfig,
    audit,
    impurity,
    split_score,
    train,
    train_tree,
)


# -- impurity and scoring ---------------------------------------------------

def test_impurity_examples():
    assert impurity([5, 5], "entropy") == 1.0
    assert impurity([10, 0], "entropy") == 0.0
    assert impurity([10, 0], "gini") == 0.0
    assert impurity([3, 1], "gini") == pytest.approx(0.375, abs=1e-15)
    with pytest.raises(ValueError):
        impurity([0, 0])


def test_split_score_examples():
    assert split_score([5, 5], [5, 0], [0, 5]) == 1.0
    assert split_score([4, 4], [2, 2], [2, 2]) == 0.0
    # the weight inflates the children's impurity, so a perfect split is unaffected
    assert split_score([5, 5], [5, 0], [0, 5], weight=0.5) == 1.0
    assert split_score([6, 2], [5, 0], [1, 2], weight=0.5) < split_score([6, 2], [5, 0], [1, 2])


def test_split_score_rejects_inconsistent_counts():
    with pytest.raises(ValueError):
        split_score([5, 5], [5, 0], [0, 4])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 20), min_size=2, max_size=4).flatmap(
    lambda left: st.tuples(st.just(left), st.lists(st.integers(0, 20), min_size=len(left),
                                                   max_size=len(left)))),
       st.floats(0, 1), st.floats(0, 1))
def test_split_score_decreasing_in_weight(pair, w1, w2):
    left, right = (np.array(v) for v in pair)
    node = left + right
    if left.sum() == 0 or right.sum() == 0 or np.count_nonzero(node) < 2:
        return
    lo, hi = sorted((w1, w2))
    children_imp = split_score(node, left, right, 0.0)
    s_lo, s_hi = split_score(node, left, right, lo), split_score(node, left, right, hi)
    assert s_hi <= s_lo + 1e-12
    if hi > lo + 1e-9 and impurity(node) - children_imp > 1e-9:
        assert s_hi < s_lo


# -- sensitivity spec -------------------------------------------------------

def test_sensitivity_validation():
    with pytest.raises(ConfigurationError):
        FeatureSensitivity(weight=1.5)
    with pytest.raises(ConfigurationError):
        FeatureSensitivity(split_budget=-1)
    spec = SensitivitySpec.weights({"a": 0.3})
    assert SensitivitySpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ConfigurationError):
        spec.resolve(["b"])


# -- training examples ------------------------------------------------------

def test_label_equals_feature_single_split():
    ds = label_equals_feature(200, 3, seed=1)
    t = train(ds)
    assert t.depth == 1 and t.root.feature == 0
    assert (t.predict(ds.X) == ds.y).all()
    imp = t.importance()
    assert imp["s"] == 1.0 and imp.values.sum() == 1.0


def test_budget_zero_never_splits_feature():
    ds = label_equals_feature(200, 3, seed=1)
    t = train(ds, SensitivitySpec.splits(["s"], 0), TreeConfig(growth="breadth_first"))
    assert t.split_counts()[0] == 0
    assert t.importance()["s"] == 0.0
    assert audit(t, ds) == []


def test_budgets_require_breadth_first():
    ds = label_equals_feature(50)
    with pytest.raises(ConfigurationError, match="breadth_first"):
        train(ds, SensitivitySpec.splits(["s"], 1))


def test_constraint_forbidding_root_gives_majority_leaf():
    ds = Dataset.from_arrays([[0], [0], [1], [1], [1]], [0, 0, 1, 1, 1], ["s"])
    t = train(ds, SensitivitySpec.levels(["s"], 1))
    assert len(t.nodes) == 1
    assert t.predict_row([0]) == 1
    imp = t.importance()
    assert imp.values.tolist() == [0.0] and not imp.normalized


def test_level_threshold_pushes_split_down():
    rng = np.random.default_rng(0)
    ds = random_dataset(rng, n=300, d=4, k=3)
    t = train(ds, SensitivitySpec.levels(["f0"], 2))
    for node in t.internal_nodes():
        if node.feature == 0:
            assert node.depth >= 2
    assert audit(t, ds) == []


def test_level_rank_mode():
    rng = np.random.default_rng(1)
    ds = random_dataset(rng, n=300, d=4, k=3)
    t = train(ds, SensitivitySpec.levels(["f1"], 5), TreeConfig(level_mode="rank", growth="breadth_first"))
    assert all(n.rank >= 5 for n in t.internal_nodes() if n.feature == 1)
    assert audit(t, ds) == []


def test_weight_one_reduces_importance():
    rng = np.random.default_rng(2)
    ds = random_dataset(rng, n=400, d=4, k=3)
    base = train(ds).importance()
    top = int(np.argmax(base.values))
    name = ds.feature_names[top]
    penalised = train(ds, SensitivitySpec.weights({name: 1.0})).importance()
    assert penalised[name] < base[name]


def test_empty_training_data():
    ds = Dataset.from_arrays(np.zeros((0, 1)), np.zeros(0, dtype=int), n_categories=[2], class_names=["a"])
    with pytest.raises(EmptyDatasetError):
        train(ds)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        TreeConfig(min_samples_split=1)
    with pytest.raises(ConfigurationError):
        TreeConfig(criterion="mse")


def test_max_depth_and_min_samples():
    rng = np.random.default_rng(3)
    ds = random_dataset(rng, n=200, d=5, k=3)
    assert train_tree(ds, max_depth=2).depth <= 2
    t = train_tree(ds, min_samples_split=50)
    assert all(n.n_samples >= 50 for n in t.internal_nodes())


# -- prediction and leaf paths ------------------------------------------------

def test_predict_examples():
    ds = Dataset.from_arrays([[0], [0], [0], [0], [0], [1], [1], [1]], [0, 0, 0, 0, 0, 1, 1, 1], ["a"])
    stump = train(ds)
    assert stump.predict_row([0]) == stump.nodes[stump.root.left].prediction == 0
    assert stump.leaf_path([0])[1] == 5 and stump.leaf_path([1])[1] == 3
    leaf_only = train_tree(ds, max_depth=0)
    assert leaf_only.leaf_path([1]) == (0, 8)
    assert leaf_only.predict_row([1]) == 0


def test_prediction_ties_go_to_lowest_class():
    ds = Dataset.from_arrays([[0], [0]], [1, 0], ["a"], [1])
    assert train(ds).predict_row([0]) == 0


def test_schema_mismatch_on_predict():
    t = train(label_equals_feature(40))
    with pytest.raises(SchemaError):
        t.predict(np.zeros((2, 2)))


def test_full_tree_fits_consistent_training_data(rng):
    for _ in range(20):
        ds = random_dataset(rng)
        t = train(ds)
        # rows with identical features but different labels cannot be separated
        keys = {}
        for row, label in zip(map(tuple, ds.X), ds.y):
            keys.setdefault(row, set()).add(label)
        consistent = np.array([len(keys[tuple(r)]) == 1 for r in ds.X])
        pred = np.array([t.predict_row(r) for r in ds.X])
        assert (pred[consistent] == ds.y[consistent]).all()
        assert sum(leaf.n_samples for leaf in t.leaves()) == ds.n


# -- oracles ------------------------------------------------------------------

@pytest.mark.parametrize("criterion", ["entropy", "gini"])
def test_null_constraints_match_plain_cart(rng, criterion):
    for _ in range(25):
        ds = random_dataset(rng)
        t = train(ds, SensitivitySpec({"f0": FeatureSensitivity()}), TreeConfig(criterion=criterion))
        oracle = plain_cart(ds.X.tolist(), ds.y.tolist(), ds.n_classes, criterion)
        assert same_structure(t, oracle)


def test_importance_matches_eq1_oracle(rng):
    for _ in range(25):
        ds = random_dataset(rng)
        t = train(ds)
        raw = np.array(eq1_importance(t.to_dict()))
        np.testing.assert_allclose(t.training_importance, raw, rtol=0, atol=1e-12)
        if raw.sum() > 0:
            np.testing.assert_allclose(t.importance().values, raw / raw.sum(), atol=1e-12)


def test_audit_detects_violations():
    ds = label_equals_feature(100)
    t = train(ds)
    d = t.to_dict()
    d["sensitivity"] = {"s": {"weight": 0.0, "level_threshold": 3, "split_budget": None}}
    tampered = DecisionTree.from_dict(d)
    assert any("level" in p for p in audit(tampered))
    d["sensitivity"] = {"s": {"weight": 0.0, "level_threshold": None, "split_budget": 0}}
    assert any("budget" in p for p in audit(DecisionTree.from_dict(d)))


def test_audit_detects_suboptimal_split():
    ds = label_equals_feature(100, 2, seed=4)
    d = train(ds).to_dict()
    d["nodes"][0]["feature"] = 1
    d["nodes"][0]["threshold"] = 0.5
    assert any("not an eligible" in p or "below best" in p for p in audit(DecisionTree.from_dict(d), ds))


# -- serialisation --------------------------------------------------------------

def test_round_trip_is_byte_identical(rng):
    ds = random_dataset(rng, n=150, d=4)
    t = train(ds, SensitivitySpec.weights({"f1": 0.4}))
    text = t.to_json()
    back = DecisionTree.from_json(text)
    assert back.to_json() == text
    assert np.array_equal(back.predict(ds.X), t.predict(ds.X))
    assert np.array_equal(back.importance().values, t.importance().values)


def test_training_is_deterministic(rng):
    ds = random_dataset(rng, n=150, d=4)
    cfg = TreeConfig(growth="breadth_first", max_features=2, seed=9)
    spec = SensitivitySpec.splits(["f0"], 2)
    assert train(ds, spec, cfg).to_json() == train(ds, spec, cfg).to_json()


def test_version_mismatch():
    d = train(label_equals_feature(20)).to_dict()
    d["version"] = 99
    with pytest.raises(SchemaError):
        DecisionTree.from_dict(d)


def test_render_mentions_split():
    text = train(label_equals_feature(40)).render()
    assert "s in {0}" in text and "leaf" in text


def test_json_is_plain(rng):
    d = json.loads(train(random_dataset(rng)).to_json())
    assert d["format"] == "privtree.tree"
    assert all(math.isfinite(n["impurity"]) for n in d["nodes"])
