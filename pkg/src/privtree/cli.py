"""Command-line entry point.

Every subcommand that builds an experiment accepts the ExperimentConfig
fields as flags.  Values are layered: ``--preset`` first, then
``--config`` (YAML), then explicit flags.

    privtree prep --dataset nursery-like --out nursery_like.csv
    privtree train --dataset nursery-like --method splits --sensitive-features social --param 3 --out tree.json
    privtree show tree.json --max-depth 3
    privtree importance tree.json
    privtree sweep --preset nursery-like-splits-sweep --output-dir results
    privtree attack --preset nursery-like-splits-attack --seeds 0 --output-dir results
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields

import numpy as np
import yaml

from .data import SplitSpec, format_schema, train_test_split
from .errors import ConfigurationError, PrivtreeError
from .harness import (
    PRESETS,
    ExperimentConfig,
    build_sensitivity,
    load_model,
    run_attack_experiment,
    run_sweep,
    save_model,
    summarize,
    train_model,
)
from .recipes import load_dataset

log = logging.getLogger("privtree")


def _scalar(text: str):
    # "3" -> 3, "0.5" -> 0.5, "none" -> None, anything else stays a string
    if text.strip().lower() == "none":
        return None
    return yaml.safe_load(text)


def _list(text: str):
    return [_scalar(t) for t in text.split(",") if t.strip()]


def _names(text: str):
    return [t.strip() for t in text.split(",") if t.strip()]


def _feature_sets(text: str):
    return [_names(group) for group in text.split(";")]


def _mapping(text: str):
    value = yaml.safe_load(text)
    if not isinstance(value, dict):
        raise argparse.ArgumentTypeError(f"expected a mapping such as '{{max_depth: 8}}', got {text!r}")
    return value


# flag name -> parser for the value; every ExperimentConfig field is covered
_FIELD_TYPES = {
    "name": str,
    "dataset": str,
    "data_path": str,
    "schema_path": str,
    "label": str,
    "n_samples": int,
    "data_seed": int,
    "model": str,
    "method": str,
    "sensitive_features": _names,
    "grid": _list,
    "feature_sets": _feature_sets,
    "increase_counts": lambda t: [int(v) for v in _names(t)],
    "attacked_feature": str,
    "seeds": lambda t: [int(v) for v in _names(t)],
    "train_fraction": float,
    "tree": _mapping,
    "forest": _mapping,
    "boost": _mapping,
    "mlp": _mapping,
    "attack_instances": str,
    "attack_kinds": _names,
    "output_dir": str,
}
assert set(_FIELD_TYPES) == {f.name for f in fields(ExperimentConfig)}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("experiment configuration")
    g.add_argument("--config", help="YAML file with any subset of the configuration fields")
    g.add_argument("--preset", choices=sorted(PRESETS), help="start from a named preset")
    for name, typ in _FIELD_TYPES.items():
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)


def _collect_config(args, require_grid: bool = True) -> ExperimentConfig:
    d: dict = {}
    if args.preset:
        d.update(PRESETS[args.preset])
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise ConfigurationError(f"{args.config}: expected a mapping at top level")
        d.update(loaded)
    for name in _FIELD_TYPES:
        value = getattr(args, name)
        if value is not None:
            d[name] = value
    if not require_grid and not d.get("grid"):
        d["grid"] = [None]
    return ExperimentConfig.from_dict(d)


def _train_one(args):
    """Train the model for one grid point and seed; returns (model, config, test split)."""
    if args.param is not None:
        args.grid = [args.param]
    cfg = _collect_config(args, require_grid=False)
    data = cfg.load_data()
    seed = cfg.seeds[0]
    train_split, test_split = train_test_split(data, SplitSpec(cfg.train_fraction, seed))
    spec = build_sensitivity(cfg.method, cfg.sensitive_features, cfg.grid[0])
    model = train_model(cfg.model, train_split, spec, seed, cfg.tree, cfg.forest, cfg.boost)
    return model, cfg, test_split


def _print_importance(model, out) -> None:
    imp = model.importance().as_dict()
    width = max(len(k) for k in imp)
    for name, value in sorted(imp.items(), key=lambda kv: (-kv[1], kv[0])):
        print(f"{name:<{width}}  {value:.6f}", file=out)


def _print_table(rows, out) -> None:
    if not rows:
        print("(no rows)", file=out)
        return
    cols = [c for c in rows[0] if not c.startswith("imp:")]
    print("\t".join(cols), file=out)
    for r in rows:
        print("\t".join(f"{r.get(c):.4f}" if isinstance(r.get(c), float) else str(r.get(c, ""))
                        for c in cols), file=out)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_prep(args, out) -> int:
    cfg = _collect_config(args, require_grid=False)
    data = load_dataset(cfg.dataset, cfg.data_path, cfg.schema_path, cfg.label, cfg.n_samples, cfg.data_seed)
    counts = np.bincount(data.y, minlength=data.n_classes)
    print(f"{cfg.dataset}: {data.n} rows, {data.n_features} features, label {data.label_meta.name!r}", file=out)
    for cat, c in zip(data.label_meta.categories, counts):
        print(f"  {cat}: {c}", file=out)
    if args.out:
        data.write_csv(args.out)
        schema_path = args.out + ".schema"
        with open(schema_path, "w", encoding="utf-8") as fh:
            fh.write(format_schema(data))
        print(f"wrote {args.out} and {schema_path}", file=out)
    return 0


def cmd_train(args, out) -> int:
    model, cfg, test_split = _train_one(args)
    acc = float(np.mean(model.predict(test_split.X) == test_split.y))
    print(f"{model!r}", file=out)
    print(f"test accuracy {acc:.4f}", file=out)
    _print_importance(model, out)
    if args.out:
        save_model(model, args.out)
        print(f"wrote {args.out}", file=out)
    return 0


def cmd_importance(args, out) -> int:
    model = load_model(args.model_path) if args.model_path else _train_one(args)[0]
    _print_importance(model, out)
    return 0


def cmd_show(args, out) -> int:
    model = load_model(args.model_path)
    print(repr(model), file=out)
    trees = getattr(model, "trees", None)
    if trees is None:
        print(model.render(args.max_depth), file=out)
    else:
        weights = model.tree_weights
        for i in args.tree or range(min(len(trees), 3)):
            if not 0 <= i < len(trees):
                raise ConfigurationError(f"tree index {i} out of range (model has {len(trees)})")
            print(f"--- tree {i} (weight {weights[i]:.6g})", file=out)
            print(trees[i].render(args.max_depth), file=out)
    return 0


def cmd_sweep(args, out) -> int:
    cfg = _collect_config(args)
    rows = run_sweep(cfg)
    _print_table(summarize(rows, ["param", "constrained"]), out)
    return _status(rows)


def cmd_attack(args, out) -> int:
    cfg = _collect_config(args)
    rows = run_attack_experiment(cfg)
    _print_table(summarize(rows, ["param", "constrained", "attack_kind"]), out)
    return _status(rows)


def _status(rows) -> int:
    failed = [r for r in rows if r.get("status") != "ok"]
    for r in failed:
        print(f"privtree: run failed (param={r['param']}, seed={r['seed']}): {r['status']}", file=sys.stderr)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privtree", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="materialise a dataset recipe and describe it")
    _add_config_flags(p)
    p.add_argument("--out", help="write the preprocessed CSV here (schema goes to OUT.schema)")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("train", help="train one model (first seed, one parameter value)")
    _add_config_flags(p)
    p.add_argument("--param", type=_scalar, help="constraint parameter; overrides the grid")
    p.add_argument("--out", help="save the model as JSON")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("importance", help="feature importance of a saved or freshly trained model")
    p.add_argument("model_path", nargs="?")
    _add_config_flags(p)
    p.add_argument("--param", type=_scalar)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("sweep", help="accuracy and importance across the parameter grid")
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("attack", help="attack accuracy across the parameter grid")
    _add_config_flags(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("show", help="pretty-print a saved model")
    p.add_argument("model_path")
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--tree", type=int, action="append", help="ensemble member to print (repeatable)")
    p.set_defaults(func=cmd_show)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, sys.stdout)
    except (PrivtreeError, OSError, yaml.YAMLError, json.JSONDecodeError, KeyError) as e:
        print(f"privtree: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
