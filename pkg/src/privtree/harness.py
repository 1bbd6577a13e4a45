"""Experiment orchestration: constraint sweeps and attack experiments.

Each run is a pure function of its configuration and seed.  Results are
written as CSV (one row per run) plus a summary CSV of per-point means and
the configuration as JSON; every row carries the configuration hash and
seed needed to reproduce it.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .attack import (
    ATTACK_KINDS,
    BLACK_BOX,
    IDEAL,
    WHITE_BOX,
    AttackConfig,
    blackbox_attack,
    ideal_attack,
    make_instances,
    sensitive_prior,
    whitebox_attack,
)
from .data import Dataset, SplitSpec, train_test_split
from .ensemble import BoostConfig, EnsembleModel, ForestConfig, train_adaboost, train_forest
from .errors import ConfigurationError, SchemaError
from .mlp import MLPConfig
from .recipes import default_sensitive, load_dataset
from .tree import BREADTH_FIRST, DecisionTree, SensitivitySpec, TreeConfig, train

log = logging.getLogger(__name__)

MODELS = ("dt", "rf", "ab")
METHODS = ("weights", "levels", "splits")


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    dataset: str = "nursery-like"
    data_path: str | None = None
    schema_path: str | None = None
    label: str | None = None
    n_samples: int | None = None
    data_seed: int = 0
    model: str = "dt"
    method: str = "splits"
    sensitive_features: list[str] = field(default_factory=list)
    grid: list[Any] = field(default_factory=list)
    # importance-increase mode: constrain growing sets of non-attacked features,
    # either listed explicitly or as counts of the least important ones
    feature_sets: list[list[str]] | None = None
    increase_counts: list[int] | None = None
    attacked_feature: str | None = None
    seeds: list[int] = field(default_factory=lambda: [0])
    train_fraction: float = 0.8
    tree: dict = field(default_factory=dict)
    forest: dict = field(default_factory=dict)
    boost: dict = field(default_factory=dict)
    mlp: dict = field(default_factory=dict)
    attack_instances: str = "train"
    attack_kinds: list[str] = field(default_factory=lambda: list(ATTACK_KINDS))
    output_dir: str | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigurationError(f"model must be one of {MODELS}, not {self.model!r}")
        if self.method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}, not {self.method!r}")
        if not self.grid:
            raise ConfigurationError("parameter grid is empty")
        if not self.seeds:
            raise ConfigurationError("need at least one seed")
        unknown = set(self.attack_kinds) - set(ATTACK_KINDS)
        if unknown or not self.attack_kinds:
            raise ConfigurationError(f"attack_kinds must be a non-empty subset of {ATTACK_KINDS}")
        if self.feature_sets is not None and self.increase_counts is not None:
            raise ConfigurationError("give feature_sets or increase_counts, not both")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown experiment keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        d = self.to_dict()
        d.pop("output_dir")
        d.pop("seeds")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def load_data(self) -> Dataset:
        return load_dataset(self.dataset, self.data_path, self.schema_path, self.label,
                            self.n_samples, self.data_seed)


def load_config(path) -> ExperimentConfig:
    import yaml

    with open(path, encoding="utf-8") as fh:
        d = yaml.safe_load(fh) or {}
    return ExperimentConfig.from_dict(d)


# ---------------------------------------------------------------------------
# model construction
# ---------------------------------------------------------------------------

def build_sensitivity(method: str, features, param) -> SensitivitySpec:
    if param is None or not features:
        return SensitivitySpec()
    if method == "weights":
        return SensitivitySpec.weights({f: float(param) for f in features})
    if method == "levels":
        return SensitivitySpec.levels(features, int(param))
    if method == "splits":
        return SensitivitySpec.splits(features, int(param))
    raise ConfigurationError(f"unknown method {method!r}")


def train_model(kind: str, data: Dataset, sensitivity: SensitivitySpec, seed: int,
                tree: dict | None = None, forest: dict | None = None, boost: dict | None = None):
    if kind == "dt":
        opts = dict(tree or {})
        if sensitivity.uses_budgets:
            opts["growth"] = BREADTH_FIRST
        return train(data, sensitivity, TreeConfig(seed=seed, **opts))
    if kind == "rf":
        return train_forest(data, sensitivity, ForestConfig(seed=seed, **(forest or {})))
    if kind == "ab":
        return train_adaboost(data, sensitivity, BoostConfig(seed=seed, **(boost or {})))
    raise ConfigurationError(f"unknown model kind {kind!r}")


def _grid_points(config: ExperimentConfig, data: Dataset, split_seed: int):
    """(constrained feature tuple, parameter) for every grid point."""
    if config.feature_sets is not None:
        sets = [tuple(s) for s in config.feature_sets]
    elif config.increase_counts is not None:
        order = least_important_first(config, data, split_seed)
        sets = [tuple(order[:k]) for k in config.increase_counts]
    else:
        sets = [tuple(config.sensitive_features)]
    return [(s, p) for s in sets for p in config.grid]


def least_important_first(config: ExperimentConfig, data: Dataset, seed: int) -> list[str]:
    """Non-attacked features sorted by ascending baseline importance (name breaks ties)."""
    train_split, _ = train_test_split(data, SplitSpec(config.train_fraction, seed))
    model = train_model(config.model, train_split, SensitivitySpec(), seed,
                        config.tree, config.forest, config.boost)
    imp = model.importance().as_dict()
    others = [f for f in data.feature_names if f != config.attacked_feature]
    return sorted(others, key=lambda f: (imp[f], f))


def _accuracy(model, ds: Dataset) -> float:
    return float(np.mean(model.predict(ds.X) == ds.y))


def _param_str(p) -> str:
    return "none" if p is None else str(p)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def run_sweep(config: ExperimentConfig, data: Dataset | None = None) -> list[dict]:
    """Model accuracy and per-feature importance for every grid point and seed.

    An unconstrained baseline (param ``none``) is trained per seed so the
    accumulated importance loss over the constrained features can be
    reported.
    """
    data = data if data is not None else config.load_data()
    chash = config.config_hash()
    rows = []
    points = None
    for seed in config.seeds:
        train_split, test_split = train_test_split(data, SplitSpec(config.train_fraction, seed))
        if points is None:
            points = _grid_points(config, data, config.seeds[0])
        baseline = train_model(config.model, train_split, SensitivitySpec(), seed,
                               config.tree, config.forest, config.boost)
        base_imp = baseline.importance().as_dict()
        todo = [((), None)] + points
        for features, param in todo:
            row = {
                "experiment": config.name,
                "config_hash": chash,
                "dataset": config.dataset,
                "model": config.model,
                "method": config.method,
                "param": _param_str(param),
                "constrained": ";".join(features),
                "seed": seed,
            }
            try:
                if param is None:
                    model = baseline
                else:
                    spec = build_sensitivity(config.method, features, param)
                    model = train_model(config.model, train_split, spec, seed,
                                        config.tree, config.forest, config.boost)
                imp = model.importance().as_dict()
                row["model_accuracy"] = _accuracy(model, test_split)
                row["accumulated_importance_loss"] = float(sum(base_imp[f] - imp[f] for f in features))
                for f, v in imp.items():
                    row[f"imp:{f}"] = v
                row["status"] = "ok"
            except Exception as e:  # recorded per row, the sweep continues
                log.warning("run failed (%s, param=%s, seed=%s): %s", features, param, seed, e)
                row["status"] = f"error: {e}"
            rows.append(row)
    if config.output_dir:
        write_outputs(config, rows, "sweep", ["param", "constrained"])
    return rows


def run_attack_experiment(config: ExperimentConfig, data: Dataset | None = None) -> list[dict]:
    """Attack accuracy against every grid point's model, joined with its
    accuracy and the attacked feature's importance.

    Covers three experiment shapes through the configuration alone:
    constraining the attacked feature itself (importance reduction),
    constraining other features only (accuracy-reduction control), and
    constraining growing sets of other features (importance increase).
    The ideal attack does not depend on the target model and is run once per
    seed.
    """
    feature = config.attacked_feature or default_sensitive(config.dataset)
    if feature is None:
        raise ConfigurationError("attacked_feature is required for attack experiments")
    config.attacked_feature = feature
    data = data if data is not None else config.load_data()
    chash = config.config_hash()
    mlp = MLPConfig(**config.mlp)
    rows = []
    points = None
    for seed in config.seeds:
        train_split, test_split = train_test_split(data, SplitSpec(config.train_fraction, seed))
        if points is None:
            points = _grid_points(config, data, config.seeds[0])
        acfg = AttackConfig(mlp=mlp, seed=seed, instances=config.attack_instances)
        source = train_split if acfg.instances == "train" else test_split
        pri = sensitive_prior(train_split, feature)
        ideal = None
        for features, param in [((), None)] + points:
            base = {
                "experiment": config.name,
                "config_hash": chash,
                "dataset": config.dataset,
                "feature": feature,
                "model": config.model,
                "method": config.method,
                "param": _param_str(param),
                "constrained": ";".join(features),
                "seed": seed,
                "instances": acfg.instances,
            }
            try:
                spec = build_sensitivity(config.method, features, param)
                model = train_model(config.model, train_split, spec, seed,
                                    config.tree, config.forest, config.boost)
                instances = make_instances(source, feature, model)
                reports = []
                if IDEAL in config.attack_kinds:
                    if ideal is None:
                        ideal = ideal_attack(train_split, instances, acfg)
                    reports.append(ideal)
                if BLACK_BOX in config.attack_kinds:
                    reports.append(blackbox_attack(train_split, instances, model, acfg))
                if WHITE_BOX in config.attack_kinds and isinstance(model, DecisionTree):
                    reports.append(whitebox_attack(instances, model, pri))
                context = {
                    "importance": float(model.importance()[feature]),
                    "model_accuracy": _accuracy(model, test_split),
                }
                for rep in reports:
                    rows.append({**base, **context, "attack_kind": rep.kind,
                                 "attack_accuracy": rep.accuracy, "status": "ok"})
            except Exception as e:
                log.warning("attack run failed (%s, param=%s, seed=%s): %s", features, param, seed, e)
                rows.append({**base, "status": f"error: {e}"})
    if config.output_dir:
        write_outputs(config, rows, "attack", ["param", "constrained", "attack_kind"])
    return rows


# ---------------------------------------------------------------------------
# aggregation and output
# ---------------------------------------------------------------------------

def summarize(rows: list[dict], keys: list[str]) -> list[dict]:
    """Mean of every numeric column over seeds, grouped by ``keys`` (first-seen order)."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        if r.get("status") != "ok":
            continue
        groups.setdefault(tuple(r[k] for k in keys), []).append(r)
    out = []
    for key, members in groups.items():
        agg = dict(zip(keys, key))
        for col in members[0]:
            if col in keys or col == "seed":
                continue
            vals = [m.get(col) for m in members]
            if all(isinstance(v, float) for v in vals):
                agg[col] = float(np.mean(vals))
            elif col not in agg:
                agg[col] = members[0][col]
        agg["n_seeds"] = len(members)
        out.append(agg)
    return out


def write_csv(path, rows: list[dict]) -> None:
    columns: list[str] = []
    for r in rows:
        for k in r:
            if k not in columns:
                columns.append(k)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_outputs(config: ExperimentConfig, rows, kind: str, keys) -> dict[str, Path]:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "rows": out / f"{config.name}_{kind}.csv",
        "summary": out / f"{config.name}_{kind}_summary.csv",
        "config": out / f"{config.name}_config.json",
    }
    write_csv(paths["rows"], rows)
    write_csv(paths["summary"], summarize(rows, keys))
    paths["config"].write_text(
        json.dumps({"config_hash": config.config_hash(), **config.to_dict()}, indent=2, sort_keys=True) + "\n"
    )
    return paths


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def model_to_json(model) -> str:
    return model.to_json()


def save_model(model, path) -> None:
    Path(path).write_text(model.to_json() + "\n", encoding="utf-8")


def load_model(path, expected_features: list[str] | None = None):
    """Load a tree or ensemble; ``expected_features`` guards against schema drift."""
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    fmt = d.get("format")
    if fmt == "privtree.tree":
        model = DecisionTree.from_dict(d)
    elif fmt == "privtree.ensemble":
        model = EnsembleModel.from_dict(d)
    else:
        raise SchemaError(f"{path}: unrecognised model format {fmt!r}")
    if expected_features is not None and list(expected_features) != model.feature_names:
        raise SchemaError(
            f"model was trained on features {model.feature_names}, data has {list(expected_features)}"
        )
    return model


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

NURSERY_CONTROL_FEATURES = ["children", "health", "has_nurs", "parents", "housing", "finance"]

PRESETS: dict[str, dict] = {
    # importance reduction of the attacked feature via split budgets
    "nursery-splits-attack": dict(
        dataset="nursery", model="dt", method="splits", sensitive_features=["social"],
        grid=[30, 10, 5, 3, 2, 1], attacked_feature="social", seeds=[0, 1, 2, 3, 4],
    ),
    # accuracy-reduction control: constrain six other features only
    "nursery-control-attack": dict(
        dataset="nursery", model="dt", method="splits", sensitive_features=NURSERY_CONTROL_FEATURES,
        grid=[50, 30, 10, 5, 3], attacked_feature="social", seeds=[0, 1, 2, 3, 4],
    ),
    "nursery-splits-sweep": dict(
        dataset="nursery", model="dt", method="splits", sensitive_features=["social"],
        grid=[30, 10, 5, 3, 2, 1], seeds=[0, 1, 2, 3, 4],
    ),
    "nursery-forest-splits": dict(
        dataset="nursery", model="rf", method="splits", sensitive_features=["social"],
        grid=[15, 12, 10, 9], seeds=[0],
    ),
    "gss-like-adaboost-weights": dict(
        dataset="gss-like", model="ab", method="weights", sensitive_features=["happiness"],
        grid=[0.2, 0.4, 0.6, 0.8, 1.0], seeds=[0, 1, 2],
    ),
    # importance increase: budget 0 on growing sets of the least important other features
    "gss-like-increase-attack": dict(
        dataset="gss-like", model="dt", method="splits", grid=[0],
        increase_counts=[9, 11, 14, 15, 17], attacked_feature="happiness", seeds=[0, 1, 2],
    ),
}
for _name in list(PRESETS):
    if PRESETS[_name]["dataset"] == "nursery":
        PRESETS[_name.replace("nursery", "nursery-like", 1)] = {**PRESETS[_name], "dataset": "nursery-like"}
for _name, _preset in PRESETS.items():
    _preset.setdefault("name", _name)


def preset(key: str, /, **overrides) -> ExperimentConfig:
    if key not in PRESETS:
        raise ConfigurationError(f"unknown preset {key!r}; choose from {sorted(PRESETS)}")
    return ExperimentConfig.from_dict({**PRESETS[key], **overrides})
