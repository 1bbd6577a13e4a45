import math

import numpy as np
import pytest

from conftest import random_dataset
from privtree.data import Dataset
from privtree.ensemble import (
    BoostConfig,
    EnsembleModel,
    ForestConfig,
    importance_ensemble,
    predict_ensemble,
    resolve_max_features,
    samme_alpha,
    train_adaboost,
    train_forest,
)
from privtree.errors import ConfigurationError, DegenerateModelError, SchemaError
from privtree.synthetic import gss_like, label_equals_feature
from privtree.tree import SensitivitySpec, TreeConfig, audit, train


def _stump(feature_value_to_class, n_categories=2):
    """A depth-1 tree on f0 predicting the given class on each side."""
    left, right = feature_value_to_class
    X = np.array([[0], [0], [1], [1]])
    y = np.array([left, left, right, right])
    return train(Dataset.from_arrays(X, y, ["f0"], [n_categories], ["a", "b", "c"]))


def _nodes(tree):
    return [n.to_dict() for n in tree.nodes]


def test_single_tree_forest_equals_tree(rng):
    ds = random_dataset(rng, n=120, d=4)
    forest = train_forest(ds, config=ForestConfig(n_trees=1, bootstrap=False, max_features=None))
    tree = train(ds)
    assert _nodes(forest.trees[0]) == _nodes(tree)
    assert np.array_equal(forest.predict(ds.X), tree.predict(ds.X))
    assert np.array_equal(importance_ensemble(forest).values, tree.importance().values)
    forest_all = train_forest(ds, config=ForestConfig(n_trees=1, bootstrap=False, max_features=4))
    assert _nodes(forest_all.trees[0]) == _nodes(tree)


def test_forest_budget_propagates():
    ds = label_equals_feature(150, 3, seed=2)
    forest = train_forest(ds, SensitivitySpec.splits(["s"], 0), ForestConfig(n_trees=8, seed=1))
    for t in forest.trees:
        assert t.split_counts()[0] == 0
        assert audit(t) == []
    assert importance_ensemble(forest)["s"] == 0.0


def test_forest_member_audits_with_levels(rng):
    ds = random_dataset(rng, n=200, d=5, k=3)
    forest = train_forest(ds, SensitivitySpec.levels(["f0", "f2"], 2), ForestConfig(n_trees=10))
    assert all(audit(t) == [] for t in forest.trees)


def test_forest_determinism(rng):
    ds = random_dataset(rng, n=100, d=5)
    a = train_forest(ds, config=ForestConfig(n_trees=5, seed=3))
    b = train_forest(ds, config=ForestConfig(n_trees=5, seed=3))
    c = train_forest(ds, config=ForestConfig(n_trees=5, seed=4))
    assert a.to_json() == b.to_json()
    assert a.to_json() != c.to_json()


def test_forest_config_errors(rng):
    ds = random_dataset(rng, n=50, d=3)
    with pytest.raises(ConfigurationError):
        train_forest(ds, config=ForestConfig(max_features=7))
    with pytest.raises(ConfigurationError):
        ForestConfig(n_trees=0)
    assert resolve_max_features("sqrt", 8) == 3
    assert resolve_max_features(None, 8) is None


def test_vote_examples():
    t0, t1 = _stump((0, 1)), _stump((1, 0))
    single = EnsembleModel("random_forest", [t0], [1.0], None, SensitivitySpec(), t0.schema, t0.label_meta)
    assert predict_ensemble(single, [0]) == t0.predict_row([0])
    trio = EnsembleModel("random_forest", [t0, t0, t1], [1, 1, 1], None, SensitivitySpec(),
                         t0.schema, t0.label_meta)
    assert predict_ensemble(trio, [0]) == 0 and predict_ensemble(trio, [1]) == 1
    # a 1-1 tie goes to the lowest class id
    pair = EnsembleModel("random_forest", [t0, t1], [1, 1], None, SensitivitySpec(), t0.schema, t0.label_meta)
    assert predict_ensemble(pair, [0]) == 0 and predict_ensemble(pair, [1]) == 0


def test_vote_invariant_to_weight_scale(rng):
    ds = random_dataset(rng, n=200, d=4, k=3)
    model = train_adaboost(ds, config=BoostConfig(n_trees=10, max_depth=2))
    scaled = EnsembleModel(model.kind, model.trees, model.tree_weights * 7, model.config,
                           model.sensitivity, model.schema, model.label_meta)
    assert np.array_equal(model.predict(ds.X), scaled.predict(ds.X))


def test_importance_averaging():
    t0 = train(Dataset.from_arrays([[0, 0], [1, 0]], [0, 1], ["a", "b"], [2, 2]))
    t1 = train(Dataset.from_arrays([[0, 0], [0, 1]], [0, 1], ["a", "b"], [2, 2]))
    model = EnsembleModel("random_forest", [t0, t1], [1, 1], None, SensitivitySpec(), t0.schema, t0.label_meta)
    assert importance_ensemble(model).values.tolist() == [0.5, 0.5]


def test_forest_importance_sums_to_one(rng):
    for _ in range(5):
        ds = random_dataset(rng, n=100)
        imp = importance_ensemble(train_forest(ds, config=ForestConfig(n_trees=10)))
        assert abs(imp.values.sum() - 1.0) < 1e-9


def test_samme_alpha():
    err = 0.2
    assert samme_alpha(err, 2) == math.log(0.8 / 0.2)
    assert samme_alpha(err, 4) == pytest.approx(math.log(4.0) + math.log(3.0))


def test_adaboost_separable_data_single_stage():
    ds = label_equals_feature(100, 2, seed=3)
    model = train_adaboost(ds, config=BoostConfig(max_depth=None))
    assert len(model.trees) == 1
    assert model.tree_weights[0] > 20
    assert (model.predict(ds.X) == ds.y).all()


def test_adaboost_stage_errors_below_chance(rng):
    ds = random_dataset(rng, n=300, d=5, k=3)
    model, errors = train_adaboost(ds, config=BoostConfig(n_trees=15, max_depth=1), return_errors=True)
    assert len(errors) == len(model.trees)
    assert all(e < 1 - 1 / 3 for e in errors)
    assert all(audit(t) == [] for t in model.trees)


def test_adaboost_matches_reference_samme():
    """Replays SAMME by hand with the library's base learner."""
    ds = gss_like(600, seed=5)
    cfg = BoostConfig(n_trees=6, max_depth=2)
    model = train_adaboost(ds, config=cfg)
    w = np.ones(ds.n) / ds.n
    K = ds.n_classes
    for tree, alpha in zip(model.trees, model.tree_weights):
        ref = train(ds, config=TreeConfig(max_depth=2), sample_weight=w * ds.n)
        assert [(n.feature, n.threshold, n.n_samples) for n in ref.nodes] == \
            [(n.feature, n.threshold, n.n_samples) for n in tree.nodes]
        miss = ref.predict(ds.X) != ds.y
        err = w[miss].sum() / w.sum()
        assert alpha == pytest.approx(math.log((1 - err) / err) + math.log(K - 1), rel=1e-9)
        w = w * np.exp(alpha * miss)
        w /= w.sum()


def test_adaboost_degenerate_first_stage():
    ds = label_equals_feature(100, 0, seed=1)
    with pytest.raises(DegenerateModelError, match="chance"):
        train_adaboost(ds, SensitivitySpec.splits(["s"], 0))


def test_adaboost_weights_reduce_importance():
    ds = gss_like(3000, seed=2)
    cfg = BoostConfig(n_trees=10)
    base = importance_ensemble(train_adaboost(ds, config=cfg))["happiness"]
    pen = importance_ensemble(train_adaboost(ds, SensitivitySpec.weights({"happiness": 1.0}), cfg))["happiness"]
    assert pen < base


def test_ensemble_round_trip(rng):
    ds = random_dataset(rng, n=150, d=4)
    forest = train_forest(ds, config=ForestConfig(n_trees=20, seed=2))
    back = EnsembleModel.from_dict(forest.to_dict())
    assert back.to_json() == forest.to_json()
    assert np.array_equal(back.importance().values, forest.importance().values)
    assert np.array_equal(back.predict(ds.X), forest.predict(ds.X))


def test_ensemble_schema_mismatch(rng):
    ds = random_dataset(rng, n=60, d=3)
    model = train_forest(ds, config=ForestConfig(n_trees=2))
    with pytest.raises(SchemaError):
        model.predict(np.zeros((1, 5)))
