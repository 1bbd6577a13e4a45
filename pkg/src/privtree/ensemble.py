"""Random forests and SAMME AdaBoost over privacy-guided trees.

Every member tree is trained with the same :class:`SensitivitySpec`; level
thresholds and split budgets are enforced per tree.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .data import Dataset, FeatureMeta
from .errors import ConfigurationError, DegenerateModelError, SchemaError
from .tree import (
    BREADTH_FIRST,
    DEPTH_FIRST,
    ENTROPY,
    FORMAT_VERSION,
    LEVEL_DEPTH,
    DecisionTree,
    ImportanceVector,
    SensitivitySpec,
    TreeConfig,
    _check_training_data,
    train,
)

RANDOM_FOREST = "random_forest"
ADABOOST = "adaboost"


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    bootstrap: bool = True
    max_features: int | str | None = "sqrt"  # "sqrt" -> ceil(sqrt(d)); None -> all
    max_depth: int | None = None
    min_samples_split: int = 2
    criterion: str = ENTROPY
    growth: str | None = None  # None picks breadth_first when budgets are set
    level_mode: str = LEVEL_DEPTH
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigurationError("n_trees must be >= 1")


@dataclass(frozen=True)
class BoostConfig:
    n_trees: int = 50
    max_depth: int | None = 3
    min_samples_split: int = 2
    criterion: str = ENTROPY
    growth: str | None = None
    level_mode: str = LEVEL_DEPTH
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigurationError("n_trees must be >= 1")


def _growth(config, sensitivity) -> str:
    if config.growth is not None:
        return config.growth
    return BREADTH_FIRST if sensitivity.uses_budgets else DEPTH_FIRST


def resolve_max_features(max_features, n_features: int) -> int | None:
    if max_features is None:
        return None
    if max_features == "sqrt":
        return max(1, math.ceil(math.sqrt(n_features)))
    if isinstance(max_features, str):
        raise ConfigurationError(f"unknown max_features {max_features!r}")
    if max_features > n_features:
        raise ConfigurationError(f"feature_subsample={max_features} exceeds {n_features} features")
    if max_features < 1:
        raise ConfigurationError("feature_subsample must be >= 1")
    return int(max_features)


class EnsembleModel:
    """Weighted bag of decision trees sharing one sensitivity regime."""

    def __init__(self, kind, trees, tree_weights, config, sensitivity, schema, label_meta):
        self.kind = kind
        self.trees: list[DecisionTree] = list(trees)
        self.tree_weights = np.asarray(tree_weights, dtype=np.float64)
        self.config = config
        self.sensitivity = sensitivity
        self.schema = tuple(schema)
        self.label_meta = label_meta
        if len(self.trees) != len(self.tree_weights) or not self.trees:
            raise ConfigurationError("need one weight per tree and at least one tree")
        if np.any(self.tree_weights < 0) or not np.any(self.tree_weights > 0):
            raise ConfigurationError("tree weights must be non-negative with one positive")

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.schema]

    @property
    def n_classes(self) -> int:
        return len(self.label_meta.categories)

    def _as_matrix(self, X) -> np.ndarray:
        if isinstance(X, Dataset):
            if X.feature_names != self.feature_names:
                raise SchemaError("dataset features do not match the ensemble's schema")
            return X.X
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != len(self.schema):
            raise SchemaError(f"expected rows with {len(self.schema)} features, got shape {X.shape}")
        return X

    def vote(self, X) -> np.ndarray:
        """(n, K) matrix of summed tree weights per predicted class."""
        X = self._as_matrix(X)
        scores = np.zeros((X.shape[0], self.n_classes))
        rows = np.arange(X.shape[0])
        for tree, w in zip(self.trees, self.tree_weights):
            scores[rows, tree.predict(X)] += w
        return scores

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.vote(X), axis=1)

    def predict_row(self, row) -> int:
        return int(self.predict(np.asarray(row, dtype=np.float64)[None, :])[0])

    def importance(self) -> ImportanceVector:
        return importance_ensemble(self)

    def to_dict(self) -> dict:
        return {
            "format": "privtree.ensemble",
            "version": FORMAT_VERSION,
            "kind": self.kind,
            "config": asdict(self.config),
            "sensitivity": self.sensitivity.to_dict(),
            "schema": [f.to_dict() for f in self.schema],
            "label": self.label_meta.to_dict(),
            "tree_weights": [float(w) for w in self.tree_weights],
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleModel":
        if d.get("format") != "privtree.ensemble":
            raise SchemaError(f"not a serialised ensemble (format={d.get('format')!r})")
        if d.get("version") != FORMAT_VERSION:
            raise SchemaError(f"unsupported ensemble format version {d.get('version')!r}")
        config_cls = ForestConfig if d["kind"] == RANDOM_FOREST else BoostConfig
        return cls(
            d["kind"],
            [DecisionTree.from_dict(t) for t in d["trees"]],
            d["tree_weights"],
            config_cls(**d["config"]),
            SensitivitySpec.from_dict(d["sensitivity"]),
            [FeatureMeta.from_dict(f) for f in d["schema"]],
            FeatureMeta.from_dict(d["label"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def __repr__(self):
        return f"EnsembleModel(kind={self.kind!r}, trees={len(self.trees)})"


def train_forest(data: Dataset, sensitivity: SensitivitySpec | None = None,
                 config: ForestConfig | None = None) -> EnsembleModel:
    """Bootstrap-aggregated trees with per-node random feature subsets.

    Per-tree seeds are spawned from ``config.seed``; the feature subset at
    each node is drawn from the features still eligible under the
    constraints.
    """
    sensitivity = sensitivity or SensitivitySpec()
    config = config or ForestConfig()
    _check_training_data(data)
    max_features = resolve_max_features(config.max_features, data.n_features)
    growth = _growth(config, sensitivity)
    trees = []
    for child in np.random.SeedSequence(config.seed).spawn(config.n_trees):
        rng = np.random.default_rng(child)
        sample = data
        if config.bootstrap:
            sample = data.subset(np.sort(rng.integers(0, data.n, size=data.n)))
        tree_config = TreeConfig(
            criterion=config.criterion,
            max_depth=config.max_depth,
            min_samples_split=config.min_samples_split,
            growth=growth,
            level_mode=config.level_mode,
            max_features=max_features,
            seed=int(rng.integers(0, 2**31 - 1)),
        )
        trees.append(train(sample, sensitivity, tree_config))
    return EnsembleModel(RANDOM_FOREST, trees, np.ones(len(trees)), config, sensitivity,
                         data.schema, data.label_meta)


def samme_alpha(err: float, n_classes: int) -> float:
    """SAMME stage weight ln((1 - err) / err) + ln(K - 1)."""
    return math.log((1.0 - err) / err) + math.log(n_classes - 1)


def train_adaboost(data: Dataset, sensitivity: SensitivitySpec | None = None,
                   config: BoostConfig | None = None, return_errors: bool = False):
    """SAMME boosting of privacy-guided trees on weighted class counts.

    Stops early when a stage reaches zero weighted error (the stage is kept,
    its error clipped to 1e-10) or when a later stage is no better than
    chance, ``err >= 1 - 1/K`` (that stage is discarded).  With
    ``return_errors`` the weighted error of each kept stage is returned too.
    """
    sensitivity = sensitivity or SensitivitySpec()
    config = config or BoostConfig()
    _check_training_data(data)
    K = data.n_classes
    if K < 2:
        raise DegenerateModelError("boosting needs at least two classes")
    growth = _growth(config, sensitivity)
    tree_config = TreeConfig(
        criterion=config.criterion,
        max_depth=config.max_depth,
        min_samples_split=config.min_samples_split,
        growth=growth,
        level_mode=config.level_mode,
        seed=config.seed,
    )
    n = data.n
    w = np.full(n, 1.0)
    trees, alphas, errors = [], [], []
    chance = 1.0 - 1.0 / K
    for stage in range(config.n_trees):
        tree = train(data, sensitivity, tree_config, sample_weight=w)
        miss = tree.predict(data.X) != data.y
        err = float(w[miss].sum() / w.sum())
        if err >= chance:
            if stage == 0:
                raise DegenerateModelError(
                    f"first boosting stage has weighted error {err:.4f} >= {chance:.4f} (chance level); "
                    "the base learner cannot split under the given constraints"
                )
            break
        clipped = max(err, 1e-10)
        alpha = samme_alpha(clipped, K)
        trees.append(tree)
        alphas.append(alpha)
        errors.append(err)
        if err <= 0.0:
            break
        w = w * np.exp(alpha * miss)
        w *= n / w.sum()
    model = EnsembleModel(ADABOOST, trees, alphas, config, sensitivity, data.schema, data.label_meta)
    return (model, errors) if return_errors else model


def predict_ensemble(model: EnsembleModel, row) -> int:
    return model.predict_row(row)


def importance_ensemble(model: EnsembleModel) -> ImportanceVector:
    """Tree-weight-weighted mean of the members' normalised importances."""
    acc = np.zeros(len(model.schema))
    for tree, w in zip(model.trees, model.tree_weights):
        imp = tree.importance()
        acc += w * imp.values
    return ImportanceVector.from_raw(acc, model.feature_names)
