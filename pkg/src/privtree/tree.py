"""CART-style decision trees trained under privacy-guided constraints.

Three constraints reduce the influence of sensitive features:

* a per-feature weight in [0, 1] that inflates the post-split entropy of
  candidate splits on that feature,
* a level threshold: the feature may not split nodes whose level is below it
  (level is depth by default, or the node's rank in growth order),
* a split budget: a tree-wide cap on the number of nodes splitting on the
  feature.  Budgets require breadth-first growth so the cap is consumed
  evenly across the top of the tree.

Feature importance is the sample-weighted impurity decrease summed over the
nodes splitting on each feature, normalised to sum to one.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np

from .data import Dataset, FeatureMeta
from .errors import ConfigurationError, EmptyDatasetError, SchemaError

ENTROPY = "entropy"
GINI = "gini"
DEPTH_FIRST = "depth_first"
BREADTH_FIRST = "breadth_first"
LEVEL_DEPTH = "depth"
LEVEL_RANK = "rank"

# scores closer than this are treated as ties
EPS = 1e-12

FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# sensitivity configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureSensitivity:
    weight: float = 0.0
    level_threshold: int | None = None
    split_budget: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ConfigurationError(f"weight must be in [0, 1], got {self.weight}")
        for name in ("level_threshold", "split_budget"):
            v = getattr(self, name)
            if v is not None and (int(v) != v or v < 0):
                raise ConfigurationError(f"{name} must be a non-negative integer, got {v}")

    @property
    def is_null(self) -> bool:
        return self.weight == 0.0 and self.level_threshold is None and self.split_budget is None


class SensitivitySpec:
    """Per-feature privacy constraints, keyed by feature name.

    Features that are not listed are unconstrained.
    """

    def __init__(self, entries: Mapping[str, FeatureSensitivity] | None = None):
        self.entries = dict(sorted((entries or {}).items()))

    @classmethod
    def weights(cls, mapping: Mapping[str, float]) -> "SensitivitySpec":
        return cls({k: FeatureSensitivity(weight=float(v)) for k, v in mapping.items()})

    @classmethod
    def levels(cls, features, threshold: int) -> "SensitivitySpec":
        return cls({k: FeatureSensitivity(level_threshold=int(threshold)) for k in features})

    @classmethod
    def splits(cls, features, budget: int) -> "SensitivitySpec":
        return cls({k: FeatureSensitivity(split_budget=int(budget)) for k in features})

    @property
    def is_null(self) -> bool:
        return all(e.is_null for e in self.entries.values())

    @property
    def uses_budgets(self) -> bool:
        return any(e.split_budget is not None for e in self.entries.values())

    def __getitem__(self, name) -> FeatureSensitivity:
        return self.entries.get(name, FeatureSensitivity())

    def __eq__(self, other):
        return isinstance(other, SensitivitySpec) and self.entries == other.entries

    def __repr__(self):
        return f"SensitivitySpec({self.entries!r})"

    def resolve(self, feature_names) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Arrays of weights, level thresholds and budgets (-1 = none)."""
        unknown = set(self.entries) - set(feature_names)
        if unknown:
            raise ConfigurationError(f"sensitivity names unknown features: {sorted(unknown)}")
        weights = np.array([self[n].weight for n in feature_names], dtype=np.float64)
        levels = np.array([-1 if self[n].level_threshold is None else self[n].level_threshold
                           for n in feature_names], dtype=np.int64)
        budgets = np.array([-1 if self[n].split_budget is None else self[n].split_budget
                            for n in feature_names], dtype=np.int64)
        return weights, levels, budgets

    def to_dict(self) -> dict:
        return {k: asdict(v) for k, v in self.entries.items()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "SensitivitySpec":
        return cls({k: FeatureSensitivity(**v) for k, v in (d or {}).items()})


@dataclass(frozen=True)
class TreeConfig:
    criterion: str = ENTROPY
    max_depth: int | None = None
    min_samples_split: int = 2
    growth: str = DEPTH_FIRST
    level_mode: str = LEVEL_DEPTH
    max_features: int | None = None  # per-node random feature subset (forests)
    seed: int = 0

    def __post_init__(self):
        if self.criterion not in (ENTROPY, GINI):
            raise ConfigurationError(f"unknown criterion {self.criterion!r}")
        if self.growth not in (DEPTH_FIRST, BREADTH_FIRST):
            raise ConfigurationError(f"unknown growth order {self.growth!r}")
        if self.level_mode not in (LEVEL_DEPTH, LEVEL_RANK):
            raise ConfigurationError(f"unknown level mode {self.level_mode!r}")
        if self.min_samples_split < 2:
            raise ConfigurationError("min_samples_split must be >= 2")
        if self.max_depth is not None and self.max_depth < 0:
            raise ConfigurationError("max_depth must be >= 0")
        if self.max_features is not None and self.max_features < 1:
            raise ConfigurationError("max_features must be >= 1")


# ---------------------------------------------------------------------------
# impurity and split scoring
# ---------------------------------------------------------------------------

def _impurity_rows(counts: np.ndarray, criterion: str) -> np.ndarray:
    """Impurity of each row of a (m, K) count matrix; rows must be non-empty."""
    totals = counts.sum(axis=-1, keepdims=True)
    p = counts / totals
    if criterion == ENTROPY:
        logp = np.log2(np.where(p > 0, p, 1.0))
        return np.maximum(-(p * logp).sum(axis=-1), 0.0)
    return np.maximum(1.0 - (p * p).sum(axis=-1), 0.0)


def impurity(class_counts, criterion: str = ENTROPY) -> float:
    """Entropy (bits) or Gini index of a class-count vector."""
    c = np.asarray(class_counts, dtype=np.float64)
    if np.any(c < 0):
        raise ValueError("class counts must be non-negative")
    if c.sum() <= 0:
        raise ValueError("impurity of an empty node is undefined")
    if criterion not in (ENTROPY, GINI):
        raise ConfigurationError(f"unknown criterion {criterion!r}")
    if np.count_nonzero(c) <= 1:
        return 0.0
    return float(_impurity_rows(c[None, :], criterion)[0])


def split_score(node_counts, left_counts, right_counts, weight: float = 0.0,
                criterion: str = ENTROPY) -> float:
    """Penalised information gain of a candidate split; larger is better.

    ``S(node) - (1 + weight) * (E(left) + E(right))`` where ``E(child)`` is
    the child impurity scaled by its share of the node's samples.  With
    ``weight == 0`` this is the ordinary information gain.
    """
    node = np.asarray(node_counts, dtype=np.float64)
    left = np.asarray(left_counts, dtype=np.float64)
    right = np.asarray(right_counts, dtype=np.float64)
    if not np.allclose(left + right, node):
        raise ValueError("left and right counts must add up to the node counts")
    n = node.sum()
    children = 0.0
    for part in (left, right):
        if part.sum() > 0:
            children += impurity(part, criterion) * part.sum() / n
    return impurity(node, criterion) - (1.0 + weight) * children


# ---------------------------------------------------------------------------
# tree structure
# ---------------------------------------------------------------------------

@dataclass
class TreeNode:
    id: int
    depth: int
    n_samples: int
    weighted_n: float
    class_counts: np.ndarray
    impurity: float
    rank: int = -1
    feature: int = -1
    threshold: float = math.nan
    left: int = -1
    right: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    @property
    def kind(self) -> str:
        return "leaf" if self.is_leaf else "internal"

    @property
    def prediction(self) -> int:
        # argmax returns the lowest class id on ties
        return int(np.argmax(self.class_counts))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "depth": self.depth,
            "rank": self.rank,
            "feature": self.feature,
            "threshold": None if self.is_leaf else self.threshold,
            "n_samples": self.n_samples,
            "weighted_n": self.weighted_n,
            "impurity": self.impurity,
            "class_counts": [float(c) for c in self.class_counts],
            "left": self.left,
            "right": self.right,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        return cls(
            id=d["id"], depth=d["depth"], n_samples=d["n_samples"], weighted_n=d["weighted_n"],
            class_counts=np.asarray(d["class_counts"], dtype=np.float64), impurity=d["impurity"],
            rank=d["rank"], feature=d["feature"],
            threshold=math.nan if d["threshold"] is None else d["threshold"],
            left=d["left"], right=d["right"],
        )


@dataclass
class ImportanceVector:
    values: np.ndarray
    feature_names: list[str]
    normalized: bool

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.feature_names.index(name)])

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.feature_names, self.values)}

    @classmethod
    def from_raw(cls, raw, feature_names) -> "ImportanceVector":
        raw = np.clip(np.asarray(raw, dtype=np.float64), 0.0, None)
        total = raw.sum()
        if total > 0:
            return cls(raw / total, list(feature_names), True)
        return cls(np.zeros_like(raw), list(feature_names), False)


class DecisionTree:
    """A trained tree.  Nodes are stored in creation order; node 0 is the root."""

    def __init__(self, nodes, schema, label_meta, criterion, config: TreeConfig,
                 sensitivity: SensitivitySpec, training_importance=None):
        self.nodes: list[TreeNode] = list(nodes)
        self.schema: tuple[FeatureMeta, ...] = tuple(schema)
        self.label_meta = label_meta
        self.criterion = criterion
        self.config = config
        self.sensitivity = sensitivity
        self.training_importance = (
            None if training_importance is None else np.asarray(training_importance, dtype=np.float64)
        )
        self._compile()

    def _compile(self):
        nodes = self.nodes
        self._feature = np.array([n.feature for n in nodes], dtype=np.int64)
        self._threshold = np.array([n.threshold for n in nodes], dtype=np.float64)
        self._left = np.array([n.left for n in nodes], dtype=np.int64)
        self._right = np.array([n.right for n in nodes], dtype=np.int64)
        self._pred = np.array([n.prediction for n in nodes], dtype=np.int64)

    # -- basic properties ---------------------------------------------------

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.schema]

    @property
    def n_features(self) -> int:
        return len(self.schema)

    @property
    def n_classes(self) -> int:
        return len(self.label_meta.categories)

    @property
    def total_samples(self) -> int:
        return self.root.n_samples

    @property
    def total_weight(self) -> float:
        return self.root.weighted_n

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.nodes)

    def leaves(self) -> list[TreeNode]:
        return [n for n in self.nodes if n.is_leaf]

    def internal_nodes(self) -> list[TreeNode]:
        return [n for n in self.nodes if not n.is_leaf]

    def split_counts(self) -> np.ndarray:
        return np.bincount(self._feature[self._feature >= 0], minlength=self.n_features)

    # -- inference ----------------------------------------------------------

    def _as_matrix(self, X) -> np.ndarray:
        if isinstance(X, Dataset):
            if X.feature_names != self.feature_names:
                raise SchemaError("dataset features do not match the tree's schema")
            return X.X
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise SchemaError(f"expected rows with {self.n_features} features, got shape {X.shape}")
        return X

    def apply(self, X) -> np.ndarray:
        """Leaf id reached by each row."""
        X = self._as_matrix(X)
        idx = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self._feature[idx] >= 0
        while active.any():
            r = rows[active]
            node = idx[r]
            go_left = X[r, self._feature[node]] <= self._threshold[node]
            idx[r] = np.where(go_left, self._left[node], self._right[node])
            active = self._feature[idx] >= 0
        return idx

    def predict(self, X) -> np.ndarray:
        return self._pred[self.apply(X)]

    def predict_row(self, row) -> int:
        return int(self.predict(np.asarray(row, dtype=np.float64)[None, :])[0])

    def leaf_path(self, row) -> tuple[int, int]:
        """(leaf id, number of training samples that reached that leaf)."""
        leaf = int(self.apply(np.asarray(row, dtype=np.float64)[None, :])[0])
        return leaf, self.nodes[leaf].n_samples

    # -- importance ---------------------------------------------------------

    def importance(self) -> ImportanceVector:
        """Normalised impurity-decrease importance, recomputed from the nodes."""
        return ImportanceVector.from_raw(raw_importance(self), self.feature_names)

    # -- serialisation ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": "privtree.tree",
            "version": FORMAT_VERSION,
            "schema": [f.to_dict() for f in self.schema],
            "label": self.label_meta.to_dict(),
            "criterion": self.criterion,
            "config": asdict(self.config),
            "sensitivity": self.sensitivity.to_dict(),
            "training_importance": (
                None if self.training_importance is None else [float(v) for v in self.training_importance]
            ),
            "nodes": [n.to_dict() for n in self.nodes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        if d.get("format") != "privtree.tree":
            raise SchemaError(f"not a serialised tree (format={d.get('format')!r})")
        if d.get("version") != FORMAT_VERSION:
            raise SchemaError(f"unsupported tree format version {d.get('version')!r}")
        return cls(
            nodes=[TreeNode.from_dict(n) for n in d["nodes"]],
            schema=[FeatureMeta.from_dict(f) for f in d["schema"]],
            label_meta=FeatureMeta.from_dict(d["label"]),
            criterion=d["criterion"],
            config=TreeConfig(**d["config"]),
            sensitivity=SensitivitySpec.from_dict(d["sensitivity"]),
            training_importance=d.get("training_importance"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "DecisionTree":
        return cls.from_dict(json.loads(text))

    def render(self, max_depth: int | None = None) -> str:
        """Indented text view; categorical splits list the categories sent left."""
        lines = []
        stack = [(0, 0, "")]
        while stack:
            i, indent, tag = stack.pop()
            n = self.nodes[i]
            pad = "    " * indent + tag
            stats = f"n={n.n_samples} -> {self.label_meta.categories[n.prediction]}"
            if n.is_leaf or (max_depth is not None and n.depth >= max_depth):
                lines.append(f"{pad}leaf {stats}" + ("" if n.is_leaf else " ..."))
                continue
            f = self.schema[n.feature]
            if f.is_categorical:
                cats = f.categories[: int(math.floor(n.threshold)) + 1]
                test = f"{f.name} in {{{', '.join(cats)}}}"
            else:
                test = f"{f.name} <= {n.threshold:.6g}"
            lines.append(f"{pad}[{n.id}] {test}  ({stats})")
            stack.append((n.right, indent + 1, "no:  "))
            stack.append((n.left, indent + 1, "yes: "))
        return "\n".join(lines)

    def __repr__(self):
        return (f"DecisionTree(nodes={len(self.nodes)}, leaves={len(self.leaves())}, "
                f"depth={self.depth}, criterion={self.criterion!r})")


def raw_importance(tree: DecisionTree) -> np.ndarray:
    """Unnormalised importance: sum of (S(i) - E(l) - E(r)) * n_i / N per feature."""
    out = np.zeros(tree.n_features)
    total = tree.total_weight
    for node in tree.nodes:
        if node.is_leaf:
            continue
        left, right = tree.nodes[node.left], tree.nodes[node.right]
        decrease = (node.impurity
                    - left.impurity * left.weighted_n / node.weighted_n
                    - right.impurity * right.weighted_n / node.weighted_n)
        out[node.feature] += decrease * node.weighted_n / total
    return out


def importance(tree: DecisionTree) -> ImportanceVector:
    return tree.importance()


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def _best_split(Xn, yn, wn, n_classes, node_counts, node_imp, candidates, penalty, criterion):
    """Best (feature, threshold, score) over ``candidates`` or None.

    Ties go to the lowest feature index, then the lowest threshold.
    """
    best = None
    best_score = -math.inf
    total = node_counts.sum()
    for f in candidates:
        vals, inv = np.unique(Xn[:, f], return_inverse=True)
        m = vals.shape[0]
        if m < 2:
            continue
        table = np.bincount(inv * n_classes + yn, weights=wn, minlength=m * n_classes)
        table = table.reshape(m, n_classes)
        left = np.cumsum(table, axis=0)[:-1]
        right = np.cumsum(table[::-1], axis=0)[::-1][1:]
        nl = left.sum(axis=1)
        nr = right.sum(axis=1)
        children = (nl * _impurity_rows(left, criterion) + nr * _impurity_rows(right, criterion)) / total
        scores = node_imp - (1.0 + penalty[f]) * children
        top = scores.max()
        j = int(np.argmax(scores >= top - EPS))
        if scores[j] > best_score + EPS:
            best_score = float(scores[j])
            best = (int(f), float((vals[j] + vals[j + 1]) / 2.0), best_score)
    return best


def _check_training_data(data: Dataset):
    if data.n == 0:
        raise EmptyDatasetError("cannot train on an empty dataset")
    if np.isnan(data.X).any():
        raise ConfigurationError("training data contains missing feature values")
    if (data.y < 0).any():
        raise ConfigurationError("training data contains missing labels; run filter_label first")


def train(data: Dataset, sensitivity: SensitivitySpec | None = None,
          config: TreeConfig | None = None, sample_weight=None) -> DecisionTree:
    """Grow a privacy-guided tree on ``data``.

    At every node all (feature, threshold) pairs are scored, with thresholds
    at midpoints between consecutive distinct values.  Features are excluded
    while the node's level is below their level threshold or once their split
    budget is spent.  Growth stops at pure nodes, at ``min_samples_split``,
    at ``max_depth`` or when no candidate has a positive score.

    ``sample_weight`` (used by boosting) replaces raw counts with weight sums
    in every impurity and in the importance; ``n_samples`` stays a raw count.
    """
    sensitivity = sensitivity or SensitivitySpec()
    config = config or TreeConfig()
    _check_training_data(data)
    if sensitivity.uses_budgets and config.growth != BREADTH_FIRST:
        raise ConfigurationError("split budgets require breadth_first growth")
    penalty, levels, budgets = sensitivity.resolve(data.feature_names)

    X, y = data.X, data.y
    K = data.n_classes
    d = data.n_features
    w = np.ones(data.n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    if w.shape != (data.n,) or np.any(w < 0) or w.sum() <= 0:
        raise ConfigurationError("sample_weight must be non-negative with a positive sum")
    crit = config.criterion
    rng = np.random.default_rng(config.seed)
    max_features = config.max_features
    if max_features is not None and max_features > d:
        raise ConfigurationError(f"max_features={max_features} exceeds {d} features")

    nodes: list[TreeNode] = []
    gains = np.zeros(d)
    used = np.zeros(d, dtype=np.int64)

    def make_node(idx, depth):
        counts = np.bincount(y[idx], weights=w[idx], minlength=K)
        wn = float(counts.sum())
        imp = 0.0 if np.count_nonzero(counts) <= 1 else float(_impurity_rows(counts[None, :], crit)[0])
        node = TreeNode(len(nodes), depth, int(idx.shape[0]), wn, counts, imp)
        nodes.append(node)
        return node

    root = make_node(np.arange(data.n), 0)
    total_weight = root.weighted_n
    frontier = deque([(root.id, np.arange(data.n))])
    rank = 0
    bfs = config.growth == BREADTH_FIRST
    while frontier:
        node_id, idx = frontier.popleft() if bfs else frontier.pop()
        node = nodes[node_id]
        node.rank = rank
        rank += 1
        if node.impurity <= 0.0 or node.n_samples < config.min_samples_split:
            continue
        if config.max_depth is not None and node.depth >= config.max_depth:
            continue
        level = node.depth if config.level_mode == LEVEL_DEPTH else node.rank
        eligible = (levels < 0) | (level >= levels)
        eligible &= (budgets < 0) | (used < budgets)
        candidates = np.flatnonzero(eligible)
        if max_features is not None and candidates.shape[0] > max_features:
            candidates = np.sort(rng.choice(candidates, size=max_features, replace=False))
        if candidates.shape[0] == 0:
            continue
        best = _best_split(X[idx], y[idx], w[idx], K, node.class_counts, node.impurity,
                           candidates, penalty, crit)
        if best is None or best[2] <= EPS:
            continue
        f, thr, _ = best
        go_left = X[idx, f] <= thr
        left = make_node(idx[go_left], node.depth + 1)
        right = make_node(idx[~go_left], node.depth + 1)
        node.feature, node.threshold, node.left, node.right = f, thr, left.id, right.id
        used[f] += 1
        gains[f] += (node.impurity
                     - left.impurity * left.weighted_n / node.weighted_n
                     - right.impurity * right.weighted_n / node.weighted_n) * node.weighted_n / total_weight
        if bfs:
            frontier.append((left.id, idx[go_left]))
            frontier.append((right.id, idx[~go_left]))
        else:
            frontier.append((right.id, idx[~go_left]))
            frontier.append((left.id, idx[go_left]))

    return DecisionTree(nodes, data.schema, data.label_meta, crit, config, sensitivity, gains)


def train_tree(data, sensitivity=None, **config) -> DecisionTree:
    """Keyword shortcut: ``train_tree(ds, spec, max_depth=3, growth="breadth_first")``."""
    return train(data, sensitivity, TreeConfig(**config))


# ---------------------------------------------------------------------------
# audits
# ---------------------------------------------------------------------------

def audit(tree: DecisionTree, data: Dataset | None = None, sample_weight=None) -> list[str]:
    """Check a tree against its recorded constraints; returns violation messages.

    Structural, level and budget checks need only the tree.  When the
    training data is given (and the tree was grown without feature
    subsampling) every internal node is also checked to carry a split of
    maximal penalised score among the features eligible at that point,
    found by brute force over every threshold.
    """
    problems = []
    penalty, levels, budgets = tree.sensitivity.resolve(tree.feature_names)
    for node in tree.nodes:
        if abs(node.class_counts.sum() - node.weighted_n) > 1e-9 * max(1.0, node.weighted_n):
            problems.append(f"node {node.id}: class counts do not sum to the node weight")
        if node.impurity < 0 or (node.impurity == 0 and np.count_nonzero(node.class_counts) > 1):
            problems.append(f"node {node.id}: inconsistent impurity {node.impurity}")
        if node.is_leaf:
            continue
        l, r = tree.nodes[node.left], tree.nodes[node.right]
        if l.n_samples + r.n_samples != node.n_samples:
            problems.append(f"node {node.id}: children hold {l.n_samples}+{r.n_samples} of {node.n_samples}")
        if l.depth != node.depth + 1 or r.depth != node.depth + 1:
            problems.append(f"node {node.id}: child depth mismatch")
        f = node.feature
        level = node.depth if tree.config.level_mode == LEVEL_DEPTH else node.rank
        if levels[f] >= 0 and level < levels[f]:
            problems.append(f"node {node.id}: {tree.feature_names[f]} split at level {level} < {levels[f]}")
    counts = tree.split_counts()
    for f in np.flatnonzero(budgets >= 0):
        if counts[f] > budgets[f]:
            problems.append(f"{tree.feature_names[f]} split {counts[f]} times, budget {budgets[f]}")
    if data is not None and tree.config.max_features is None:
        problems.extend(_audit_split_choice(tree, data, sample_weight, penalty, levels, budgets))
    return problems


def _audit_split_choice(tree, data, sample_weight, penalty, levels, budgets):
    problems = []
    X, y = data.X, data.y
    w = np.ones(data.n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    K = tree.n_classes
    members = {0: np.arange(data.n)}
    used = np.zeros(tree.n_features, dtype=np.int64)
    for node in sorted(tree.nodes, key=lambda n: n.rank):
        idx = members[node.id]
        if node.is_leaf:
            continue
        level = node.depth if tree.config.level_mode == LEVEL_DEPTH else node.rank
        parent = np.bincount(y[idx], weights=w[idx], minlength=K)
        chosen = None
        best = -math.inf
        for f in range(tree.n_features):
            if levels[f] >= 0 and level < levels[f]:
                continue
            if budgets[f] >= 0 and used[f] >= budgets[f]:
                continue
            vals = np.unique(X[idx, f])
            for a, b in zip(vals[:-1], vals[1:]):
                thr = (a + b) / 2.0
                mask = X[idx, f] <= thr
                lc = np.bincount(y[idx][mask], weights=w[idx][mask], minlength=K)
                s = split_score(parent, lc, parent - lc, penalty[f], tree.criterion)
                if s > best:
                    best = s
                if f == node.feature and thr == node.threshold:
                    chosen = s
        if chosen is None:
            problems.append(f"node {node.id}: chosen split is not an eligible candidate")
        elif chosen < best - 1e-9:
            problems.append(f"node {node.id}: chosen score {chosen:.6g} below best {best:.6g}")
        used[node.feature] += 1
        mask = X[idx, node.feature] <= node.threshold
        members[node.left] = idx[mask]
        members[node.right] = idx[~mask]
    return problems
