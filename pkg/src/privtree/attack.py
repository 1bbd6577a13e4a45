"""Attribute-inference attacks on a boolean sensitive feature.

* ``ideal``: a shallow network predicts the sensitive value from the other
  features alone; the target model is never consulted.
* ``black_box``: same network, with the target model's classification of
  the full record as an extra input.
* ``white_box``: for decision trees.  The two candidate records (0, x_K)
  and (1, x_K) are classified; if exactly one reproduces the observed label
  it wins.  Otherwise each value v is scored by
  ``n_leaf(v) / N * prior[v]``, where ``n_leaf(v)`` is the number of
  training samples in the leaf reached by (v, x_K).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .ensemble import EnsembleModel
from .errors import CapabilityError, ConfigurationError
from .mlp import MLPConfig, ShallowNetClassifier
from .tree import DecisionTree

IDEAL = "ideal"
BLACK_BOX = "black_box"
WHITE_BOX = "white_box"
ATTACK_KINDS = (IDEAL, BLACK_BOX, WHITE_BOX)


@dataclass(frozen=True)
class AttackConfig:
    mlp: MLPConfig = field(default_factory=MLPConfig)
    seed: int = 0
    # which split the attacked individuals are drawn from: "train" or "test"
    instances: str = "train"

    def __post_init__(self):
        if self.instances not in ("train", "test"):
            raise ConfigurationError(f"instances must be 'train' or 'test', not {self.instances!r}")


@dataclass(frozen=True)
class AttackInstance:
    known_features: np.ndarray
    observed_label: int
    true_sensitive_value: int


@dataclass(frozen=True, eq=False)
class AttackInstances:
    """Batch of attack targets.

    ``known`` holds full feature rows with the sensitive column set to NaN.
    """

    known: np.ndarray
    observed: np.ndarray
    truth: np.ndarray
    feature_index: int

    def __len__(self):
        return self.truth.shape[0]

    def __getitem__(self, i) -> AttackInstance:
        return AttackInstance(self.known[i], int(self.observed[i]), int(self.truth[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def with_value(self, v: int) -> np.ndarray:
        rows = np.array(self.known)
        rows[:, self.feature_index] = v
        return rows


@dataclass
class AttackReport:
    kind: str
    accuracy: float
    n_instances: int
    context: dict = field(default_factory=dict)


def _check_boolean(ds: Dataset, feature: str) -> int:
    meta = ds.feature(feature)
    col = ds.X[:, meta.index]
    if not meta.is_categorical or not np.isin(col, (0.0, 1.0)).all():
        raise ConfigurationError(f"attacked feature {feature!r} must be boolean (0/1); booleanize it first")
    return meta.index


def make_instances(ds: Dataset, feature: str, model) -> AttackInstances:
    """Mask the sensitive column and record the model's label for each full row."""
    f = _check_boolean(ds, feature)
    known = np.array(ds.X)
    known[:, f] = np.nan
    return AttackInstances(known, np.asarray(model.predict(ds.X)), ds.X[:, f].astype(np.int64), f)


def sensitive_prior(attack_train: Dataset, feature: str) -> np.ndarray:
    f = _check_boolean(attack_train, feature)
    counts = np.bincount(attack_train.X[:, f].astype(np.int64), minlength=2)
    return counts / counts.sum()


class _Encoder:
    """One-hot encodes categorical inputs and standardises numeric ones."""

    def __init__(self, ds: Dataset, drop: int, n_label_classes: int | None):
        self.columns = [m for m in ds.schema if m.index != drop]
        self.n_label_classes = n_label_classes
        self.stats = {}
        for m in self.columns:
            if not m.is_categorical:
                col = ds.X[:, m.index]
                self.stats[m.index] = (col.mean(), col.std() or 1.0)

    def __call__(self, X, labels=None) -> np.ndarray:
        parts = []
        for m in self.columns:
            col = X[:, m.index]
            if m.is_categorical:
                parts.append(np.eye(len(m.categories))[col.astype(np.int64)])
            else:
                mu, sd = self.stats[m.index]
                parts.append(((col - mu) / sd)[:, None])
        if self.n_label_classes is not None:
            parts.append(np.eye(self.n_label_classes)[np.asarray(labels, dtype=np.int64)])
        return np.hstack(parts) if parts else np.zeros((X.shape[0], 0))


def _score(kind, pred, instances, context) -> AttackReport:
    acc = float(np.mean(pred == instances.truth)) if len(instances) else float("nan")
    return AttackReport(kind, acc, len(instances), dict(context or {}))


def ideal_attack(attack_train: Dataset, instances: AttackInstances,
                 config: AttackConfig | None = None, context=None) -> AttackReport:
    """Baseline adversary: non-sensitive features only."""
    config = config or AttackConfig()
    f = instances.feature_index
    enc = _Encoder(attack_train, f, None)
    net = ShallowNetClassifier(config.mlp, seed=config.seed)
    net.fit(enc(attack_train.X), attack_train.X[:, f].astype(np.int64))
    pred = net.predict(enc(instances.known))
    return _score(IDEAL, pred, instances, context)


def blackbox_attack(attack_train: Dataset, instances: AttackInstances, target_model,
                    config: AttackConfig | None = None, context=None) -> AttackReport:
    """Baseline adversary plus the target's classification as an input."""
    config = config or AttackConfig()
    f = instances.feature_index
    n_classes = len(attack_train.label_meta.categories)
    enc = _Encoder(attack_train, f, n_classes)
    train_labels = target_model.predict(attack_train.X)
    net = ShallowNetClassifier(config.mlp, seed=config.seed)
    net.fit(enc(attack_train.X, train_labels), attack_train.X[:, f].astype(np.int64))
    pred = net.predict(enc(instances.known, instances.observed))
    return _score(BLACK_BOX, pred, instances, context)


def whitebox_decisions(instances: AttackInstances, tree: DecisionTree, prior) -> np.ndarray:
    """Per-instance inferred sensitive value (0 or 1)."""
    if not isinstance(tree, DecisionTree):
        raise CapabilityError("the white-box attack needs a single decision tree")
    counts = np.array([n.n_samples for n in tree.nodes], dtype=np.float64)
    if tree.total_samples <= 0 or np.any(counts < 0):
        raise CapabilityError("tree does not carry per-leaf training sample counts")
    prior = np.asarray(prior, dtype=np.float64)
    if prior.shape != (2,):
        raise ConfigurationError("white-box attack needs a two-value prior")
    N = float(tree.total_samples)
    leaf0 = tree.apply(instances.with_value(0))
    leaf1 = tree.apply(instances.with_value(1))
    y0 = tree._pred[leaf0]
    y1 = tree._pred[leaf1]
    obs = instances.observed
    p0 = counts[leaf0] / N * prior[0]
    p1 = counts[leaf1] / N * prior[1]
    prior_pick = 1 if prior[1] > prior[0] else 0
    scored = np.where(p1 > p0, 1, np.where(p0 > p1, 0, prior_pick))
    decisive = (y0 != y1) & ((y0 == obs) | (y1 == obs))
    return np.where(decisive, (y1 == obs).astype(np.int64), scored)


def whitebox_attack(instances: AttackInstances, target_tree: DecisionTree, prior,
                    context=None) -> AttackReport:
    return _score(WHITE_BOX, whitebox_decisions(instances, target_tree, prior), instances, context)


def model_importance(model, feature: str) -> float:
    return float(model.importance()[feature])


def evaluate_attacks(train: Dataset, test: Dataset, feature: str, target_model,
                     config: AttackConfig | None = None, kinds=ATTACK_KINDS) -> list[AttackReport]:
    """Run the applicable attacks against ``target_model``.

    The attack training set is the model's training split; the prior comes
    from it as well.  Instances are drawn from the split named by
    ``config.instances``.  The white-box attack is skipped for ensembles.
    """
    config = config or AttackConfig()
    if not isinstance(target_model, (DecisionTree, EnsembleModel)):
        raise CapabilityError("target model must be a DecisionTree or EnsembleModel")
    source = train if config.instances == "train" else test
    instances = make_instances(source, feature, target_model)
    pri = sensitive_prior(train, feature)
    context = {
        "model_accuracy": float(np.mean(target_model.predict(test.X) == test.y)),
        "importance": model_importance(target_model, feature),
        "prior": [float(p) for p in pri],
        "instances": config.instances,
    }
    reports = []
    for kind in kinds:
        if kind == IDEAL:
            reports.append(ideal_attack(train, instances, config, context))
        elif kind == BLACK_BOX:
            reports.append(blackbox_attack(train, instances, target_model, config, context))
        elif kind == WHITE_BOX:
            if isinstance(target_model, DecisionTree):
                reports.append(whitebox_attack(instances, target_model, pri, context))
        else:
            raise ConfigurationError(f"unknown attack kind {kind!r}")
    return reports
