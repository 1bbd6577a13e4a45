"""Decision trees and tree ensembles with per-feature privacy constraints,
plus attribute-inference attacks to measure what a model leaks."""

from .attack import (
    ATTACK_KINDS,
    AttackConfig,
    AttackInstance,
    AttackInstances,
    AttackReport,
    blackbox_attack,
    evaluate_attacks,
    ideal_attack,
    make_instances,
    whitebox_attack,
    whitebox_decisions,
)
from .data import (
    Dataset,
    FeatureMeta,
    SplitSpec,
    booleanize_feature,
    filter_label,
    load_csv,
    load_schema,
    prior,
    train_test_split,
)
from .ensemble import (
    BoostConfig,
    EnsembleModel,
    ForestConfig,
    importance_ensemble,
    predict_ensemble,
    train_adaboost,
    train_forest,
)
from .errors import (
    CapabilityError,
    ConfigurationError,
    DegenerateModelError,
    EmptyDatasetError,
    EncodingError,
    ParseError,
    PrivtreeError,
    SchemaError,
    SplitError,
)
from .harness import (
    ExperimentConfig,
    load_model,
    preset,
    run_attack_experiment,
    run_sweep,
    save_model,
)
from .mlp import MLPConfig, ShallowNetClassifier
from .recipes import load_dataset
from .tree import (
    DecisionTree,
    FeatureSensitivity,
    ImportanceVector,
    SensitivitySpec,
    TreeConfig,
    audit,
    importance,
    split_score,
    train,
    train_tree,
)

__version__ = "0.1.0"
