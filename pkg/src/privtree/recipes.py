"""Named preprocessing recipes for the evaluation datasets.

=============  ==============================================================
``nursery``    UCI Nursery (``nursery.data``, headerless, or a CSV with the
               header below).  Drops classes under 1% ("recommend"),
               booleanizes ``social`` as problematic vs. the rest.
``gss``        A GSS marital-happiness CSV plus schema file supplied by the
               user.  Drops unlabeled rows and rare classes, booleanizes
               ``happiness`` as "Very happy" vs. the rest.
``nursery-like``  :func:`privtree.synthetic.nursery_like` with the Nursery
               preprocessing applied.
``gss-like``   :func:`privtree.synthetic.gss_like` with the GSS
               preprocessing applied.
=============  ==============================================================

The real Nursery file is looked up at the given path, then at
``$PRIVTREE_NURSERY``, then at ``data/nursery.data`` under the working
directory.
"""

from __future__ import annotations

import csv
import io
import os
from pathlib import Path

from .data import (
    Dataset,
    FeatureMeta,
    _encode_table,
    booleanize_feature,
    filter_label,
    load_csv,
    load_schema,
)
from .errors import ConfigurationError, ParseError
from .synthetic import NURSERY_ATTRIBUTES, NURSERY_CLASSES, gss_like, nursery_like

NURSERY_COLUMNS = list(NURSERY_ATTRIBUTES) + ["class"]
NURSERY_SCHEMA = [FeatureMeta(n, "categorical", c) for n, c in NURSERY_ATTRIBUTES.items()] + [
    FeatureMeta("class", "categorical", NURSERY_CLASSES)
]
NURSERY_SENSITIVE = "social"
NURSERY_POSITIVE = ("problematic",)
GSS_SENSITIVE = "happiness"
GSS_POSITIVE = ("Very happy",)
MIN_CLASS_FRACTION = 0.01


def find_nursery(path=None) -> Path | None:
    candidates = [path, os.environ.get("PRIVTREE_NURSERY"), Path("data") / "nursery.data"]
    for c in candidates:
        if c and Path(c).is_file():
            return Path(c)
    return None


def load_nursery_raw(path) -> Dataset:
    """Parse ``nursery.data`` (no header) or a CSV whose header matches."""
    text = Path(path).read_text(encoding="utf-8")
    records = [r for r in csv.reader(io.StringIO(text)) if r]
    if records and [h.strip() for h in records[0]] == NURSERY_COLUMNS:
        records = records[1:]
    body = []
    for lineno, rec in enumerate(records, 1):
        if len(rec) != len(NURSERY_COLUMNS):
            raise ParseError(f"expected {len(NURSERY_COLUMNS)} columns, found {len(rec)}", lineno)
        body.append((lineno, [v.strip() for v in rec]))
    return _encode_table(NURSERY_COLUMNS, body, NURSERY_SCHEMA, "class", ())


def preprocess_nursery(raw: Dataset) -> Dataset:
    ds = filter_label(raw, MIN_CLASS_FRACTION)
    return booleanize_feature(ds, NURSERY_SENSITIVE, NURSERY_POSITIVE)


def nursery(path=None) -> Dataset:
    found = find_nursery(path)
    if found is None:
        raise FileNotFoundError(
            "UCI nursery.data not found; pass a path or set PRIVTREE_NURSERY "
            "(https://archive.ics.uci.edu/dataset/76/nursery)"
        )
    return preprocess_nursery(load_nursery_raw(found))


def preprocess_gss(raw: Dataset) -> Dataset:
    ds = filter_label(raw, MIN_CLASS_FRACTION)
    return booleanize_feature(ds, GSS_SENSITIVE, GSS_POSITIVE)


def gss(path, schema_path=None, label=None) -> Dataset:
    hint, schema_label = load_schema(schema_path) if schema_path else (None, None)
    raw = load_csv(path, hint, label or schema_label, allow_missing=[GSS_SENSITIVE])
    return preprocess_gss(raw)


RECIPES = {
    "nursery": (NURSERY_SENSITIVE, "real"),
    "gss": (GSS_SENSITIVE, "real"),
    "nursery-like": (NURSERY_SENSITIVE, "synthetic"),
    "gss-like": (GSS_SENSITIVE, "synthetic"),
}


def load_dataset(name: str, path=None, schema_path=None, label=None, n=None, seed: int = 0) -> Dataset:
    """Materialise a recipe by name; ``csv`` loads a generic file unchanged."""
    if name == "nursery":
        return nursery(path)
    if name == "gss":
        if path is None:
            raise ConfigurationError("the gss recipe needs a CSV path")
        return gss(path, schema_path, label)
    if name == "nursery-like":
        return preprocess_nursery(nursery_like())
    if name == "gss-like":
        return preprocess_gss(gss_like(n or 24455, seed))
    if name == "csv":
        if path is None:
            raise ConfigurationError("the csv source needs a path")
        hint, schema_label = load_schema(schema_path) if schema_path else (None, None)
        return load_csv(path, hint, label or schema_label)
    raise ConfigurationError(f"unknown dataset recipe {name!r}; choose from {sorted(RECIPES) + ['csv']}")


def default_sensitive(name: str) -> str | None:
    entry = RECIPES.get(name)
    return entry[0] if entry else None
