"""Tabular data ingestion, ordinal encoding and preprocessing.

Categorical columns are stored as ordinal codes (float64) inside a dense
feature matrix; missing cells are NaN and missing labels are -1.  Every
operation returns a new :class:`Dataset`, arrays are made read-only.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    EmptyDatasetError,
    EncodingError,
    ParseError,
    SchemaError,
    SplitError,
)

CATEGORICAL = "categorical"
NUMERIC = "numeric"
MISSING_TOKENS = frozenset({"", "?", "NA", "N/A", "nan", "NaN"})


@dataclass(frozen=True)
class FeatureMeta:
    """Column description: name, kind, category vocabulary and position."""

    name: str
    kind: str = CATEGORICAL
    categories: tuple[str, ...] = ()
    index: int = 0

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, NUMERIC):
            raise ConfigurationError(f"unknown feature kind {self.kind!r}")
        object.__setattr__(self, "categories", tuple(self.categories))
        if self.kind == CATEGORICAL:
            if not self.categories:
                raise ConfigurationError(f"categorical feature {self.name!r} has no categories")
            if len(set(self.categories)) != len(self.categories):
                raise ConfigurationError(f"duplicate categories in feature {self.name!r}")

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL

    def encode(self, value: str) -> float:
        if self.kind == NUMERIC:
            try:
                return float(value)
            except ValueError:
                raise EncodingError(f"{self.name}: {value!r} is not numeric") from None
        try:
            return float(self.categories.index(value))
        except ValueError:
            raise EncodingError(f"{self.name}: unknown category {value!r}") from None

    def decode(self, code: float) -> str:
        if self.kind == NUMERIC:
            return repr(float(code))
        return self.categories[int(code)]

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "index": self.index}
        if self.is_categorical:
            d["categories"] = list(self.categories)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureMeta":
        return cls(d["name"], d["kind"], tuple(d.get("categories", ())), d.get("index", 0))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Encoded samples.

    ``X`` has one column per entry of ``schema``; ``y`` holds class ids into
    ``label_meta.categories`` (-1 for a missing label).  ``row_ids`` track the
    original row position through filtering and splitting.
    """

    schema: tuple[FeatureMeta, ...]
    label_meta: FeatureMeta
    X: np.ndarray
    y: np.ndarray
    row_ids: np.ndarray = field(default=None)

    def __post_init__(self):
        schema = tuple(self.schema)
        object.__setattr__(self, "schema", schema)
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            X = X.reshape(len(self.y), -1)
        y = np.asarray(self.y, dtype=np.int64)
        if X.shape[0] != y.shape[0]:
            raise SchemaError(f"{X.shape[0]} rows but {y.shape[0]} labels")
        if X.shape[1] != len(schema):
            raise SchemaError(f"{X.shape[1]} columns but {len(schema)} features in schema")
        if [f.index for f in schema] != list(range(len(schema))):
            raise SchemaError("feature indices must be contiguous and ordered")
        for f in schema:
            if f.is_categorical:
                col = X[:, f.index]
                col = col[~np.isnan(col)]
                if col.size and (
                    np.any(col < 0) or np.any(col >= len(f.categories)) or np.any(col != np.floor(col))
                ):
                    raise EncodingError(f"{f.name}: code outside its categories")
        if y.size and (y.max() >= len(self.label_meta.categories) or y.min() < -1):
            raise EncodingError("label code outside label categories")
        row_ids = np.arange(len(y)) if self.row_ids is None else np.asarray(self.row_ids, dtype=np.int64)
        object.__setattr__(self, "X", _readonly(X))
        object.__setattr__(self, "y", _readonly(y))
        object.__setattr__(self, "row_ids", _readonly(row_ids))

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    def __len__(self):
        return self.n

    @property
    def n_features(self) -> int:
        return len(self.schema)

    @property
    def n_classes(self) -> int:
        return len(self.label_meta.categories)

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.schema]

    def feature(self, name: str) -> FeatureMeta:
        for f in self.schema:
            if f.name == name:
                return f
        raise ConfigurationError(f"unknown feature {name!r}")

    def feature_index(self, name: str) -> int:
        return self.feature(name).index

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return replace(self, X=self.X[idx], y=self.y[idx], row_ids=self.row_ids[idx])

    def has_missing(self) -> bool:
        return bool(np.isnan(self.X).any() or (self.y < 0).any())

    @classmethod
    def from_arrays(cls, X, y, feature_names=None, n_categories=None, class_names=None) -> "Dataset":
        """Build a dataset from integer-coded arrays (used heavily in tests)."""
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        d = X.shape[1]
        names = feature_names or [f"f{i}" for i in range(d)]
        schema = []
        for i, name in enumerate(names):
            k = n_categories[i] if n_categories is not None else int(np.nanmax(X[:, i])) + 1 if X.size else 1
            schema.append(FeatureMeta(name, CATEGORICAL, tuple(str(c) for c in range(max(k, 1))), i))
        k = len(class_names) if class_names else (int(y.max()) + 1 if y.size else 1)
        label = FeatureMeta("label", CATEGORICAL, tuple(class_names or (str(c) for c in range(k))), 0)
        return cls(tuple(schema), label, X, y)

    def to_rows(self) -> list[list[str]]:
        """Decode back to strings (missing cells become empty strings)."""
        out = []
        for r in range(self.n):
            row = ["" if math.isnan(v) else f.decode(v) for f, v in zip(self.schema, self.X[r])]
            row.append("" if self.y[r] < 0 else self.label_meta.categories[self.y[r]])
            out.append(row)
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(self.feature_names + [self.label_meta.name])
            w.writerows(self.to_rows())


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigurationError("train_fraction must lie strictly between 0 and 1")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")


# ---------------------------------------------------------------------------
# schema files
# ---------------------------------------------------------------------------

def parse_schema(text: str) -> tuple[list[FeatureMeta], str | None]:
    """Parse the schema-hint format.

    One declaration per line, ``#`` starts a comment::

        label: class
        parents: categorical = usual | pretentious | great_pret
        age: numeric

    Column order in the file does not matter; positions come from the CSV
    header.  Returns the feature list (label included, if declared) and the
    label column name.
    """
    metas, label = [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ParseError("expected 'name: kind'", lineno)
        name, rest = (s.strip() for s in line.split(":", 1))
        kind, _, cats = rest.partition("=")
        # "label: <column>" names the label; a column called "label" still declares a kind
        if name == "label" and kind.strip() not in (CATEGORICAL, NUMERIC):
            label = rest
            continue
        kind = kind.strip()
        categories = tuple(c.strip() for c in cats.split("|")) if cats.strip() else ()
        try:
            metas.append(FeatureMeta(name, kind, categories, len(metas)))
        except ConfigurationError as e:
            raise ParseError(str(e), lineno) from None
    return metas, label


def load_schema(path) -> tuple[list[FeatureMeta], str | None]:
    return parse_schema(Path(path).read_text(encoding="utf-8"))


def format_schema(ds: Dataset) -> str:
    lines = [f"label: {ds.label_meta.name}"]
    for f in list(ds.schema) + [ds.label_meta]:
        if f.is_categorical:
            lines.append(f"{f.name}: categorical = " + " | ".join(f.categories))
        else:
            lines.append(f"{f.name}: numeric")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CSV loading
# ---------------------------------------------------------------------------

def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_csv(
    path,
    schema_hint: Sequence[FeatureMeta] | None = None,
    label: str | None = None,
    allow_missing: Iterable[str] = (),
) -> Dataset:
    """Read an RFC-4180 CSV with a header row into an encoded :class:`Dataset`.

    Parameters
    ----------
    path : path-like
        UTF-8 CSV file; the first row is the header.
    schema_hint : list of FeatureMeta, optional
        Fixed vocabularies by column name.  Columns without a hint get their
        kind inferred (numeric when every value parses as a float) and
        lexicographically sorted categories.
    label : str, optional
        Label column name; defaults to the last column.
    allow_missing : iterable of str
        Feature columns that may contain missing cells (kept as NaN so a
        later :func:`booleanize_feature` can drop them).  Missing cells
        anywhere else raise :class:`ParseError`.  Missing labels are always
        allowed and encoded as -1.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        records = list(csv.reader(fh))
    if not records:
        raise ParseError("empty file", 1)
    header = [h.strip() for h in records[0]]
    width = len(header)
    body = []
    for lineno, rec in enumerate(records[1:], 2):
        if not rec:
            continue
        if len(rec) != width:
            raise ParseError(f"expected {width} columns, found {len(rec)}", lineno)
        body.append((lineno, [v.strip() for v in rec]))
    return _encode_table(header, body, schema_hint, label, allow_missing)


def _encode_table(header, body, schema_hint, label, allow_missing) -> Dataset:
    if len(set(header)) != len(header):
        raise ParseError("duplicate column names in header", 1)
    label = label or header[-1]
    if label not in header:
        raise ConfigurationError(f"label column {label!r} not in header")
    hints = {m.name: m for m in (schema_hint or ())}
    unknown = set(hints) - set(header)
    if unknown:
        raise SchemaError(f"schema hint names columns absent from the file: {sorted(unknown)}")
    allow_missing = set(allow_missing)

    metas = {}
    for j, name in enumerate(header):
        values = [row[j] for _, row in body if row[j] not in MISSING_TOKENS]
        if name in hints:
            h = hints[name]
            metas[name] = FeatureMeta(h.name, h.kind, h.categories, 0)
        elif name != label and values and all(_is_number(v) for v in values):
            metas[name] = FeatureMeta(name, NUMERIC)
        else:
            cats = tuple(sorted(set(values))) or ("",)
            metas[name] = FeatureMeta(name, CATEGORICAL, cats)
    if metas[label].kind != CATEGORICAL:
        raise SchemaError(f"label column {label!r} must be categorical")

    feat_names = [h for h in header if h != label]
    schema = tuple(replace(metas[name], index=i) for i, name in enumerate(feat_names))
    cols = [header.index(name) for name in feat_names]
    lab_col = header.index(label)
    X = np.empty((len(body), len(schema)))
    y = np.empty(len(body), dtype=np.int64)
    for r, (lineno, row) in enumerate(body):
        for i, (meta, j) in enumerate(zip(schema, cols)):
            v = row[j]
            if v in MISSING_TOKENS:
                if meta.name not in allow_missing:
                    raise ParseError(f"missing value in column {meta.name!r}", lineno)
                X[r, i] = np.nan
                continue
            try:
                X[r, i] = meta.encode(v)
            except EncodingError as e:
                raise EncodingError(f"line {lineno}: {e}") from None
        v = row[lab_col]
        if v in MISSING_TOKENS:
            y[r] = -1
        else:
            try:
                y[r] = int(metas[label].encode(v))
            except EncodingError as e:
                raise EncodingError(f"line {lineno}: {e}") from None
    return Dataset(schema, metas[label], X, y)


# ---------------------------------------------------------------------------
# preprocessing
# ---------------------------------------------------------------------------

def filter_label(ds: Dataset, min_class_fraction: float = 0.0) -> Dataset:
    """Drop unlabeled rows and rows whose class is rarer than the threshold.

    Class ids are re-encoded densely, keeping the original category order.
    """
    if not 0.0 <= min_class_fraction < 1.0:
        raise ConfigurationError("min_class_fraction must be in [0, 1)")
    labeled = ds.subset(np.flatnonzero(ds.y >= 0))
    if labeled.n == 0:
        raise EmptyDatasetError("no labeled rows")
    counts = np.bincount(labeled.y, minlength=labeled.n_classes)
    keep = counts / labeled.n >= min_class_fraction
    keep &= counts > 0
    out = labeled.subset(np.flatnonzero(keep[labeled.y]))
    if out.n == 0:
        raise EmptyDatasetError("every class fell below min_class_fraction")
    remap = np.cumsum(keep) - 1
    cats = tuple(c for c, k in zip(ds.label_meta.categories, keep) if k)
    return replace(out, label_meta=replace(ds.label_meta, categories=cats), y=remap[out.y])


def booleanize_feature(ds: Dataset, feature: str, positive_categories) -> Dataset:
    """Map a categorical feature to {0, 1}; rows missing the feature are dropped."""
    meta = ds.feature(feature)
    if not meta.is_categorical:
        raise ConfigurationError(f"feature {feature!r} is not categorical")
    positive = set(positive_categories)
    bad = positive - set(meta.categories)
    if bad:
        raise ConfigurationError(f"{feature!r} has no categories {sorted(bad)}")
    out = ds.subset(np.flatnonzero(~np.isnan(ds.X[:, meta.index])))
    if out.n == 0:
        raise EmptyDatasetError(f"every row is missing {feature!r}")
    pos_codes = np.array([c in positive for c in meta.categories])
    X = np.array(out.X)
    X[:, meta.index] = pos_codes[X[:, meta.index].astype(np.int64)].astype(np.float64)
    schema = list(out.schema)
    schema[meta.index] = FeatureMeta(meta.name, CATEGORICAL, ("0", "1"), meta.index)
    return replace(out, schema=tuple(schema), X=X)


def train_test_split(ds: Dataset, spec: SplitSpec = SplitSpec()) -> tuple[Dataset, Dataset]:
    """Seeded shuffle followed by a head/tail partition."""
    if ds.n == 0:
        raise EmptyDatasetError("cannot split an empty dataset")
    n_train = int(round(ds.n * spec.train_fraction))
    if n_train == 0 or n_train == ds.n:
        raise SplitError(f"a partition of {ds.n} rows at fraction {spec.train_fraction} would be empty")
    perm = np.random.default_rng(spec.seed).permutation(ds.n)
    return ds.subset(np.sort(perm[:n_train])), ds.subset(np.sort(perm[n_train:]))


def prior(ds: Dataset, feature: str) -> np.ndarray:
    """Empirical distribution of a feature's values.

    Categorical features get one entry per category (in code order); numeric
    features one entry per distinct observed value, ascending.
    """
    meta = ds.feature(feature)
    col = ds.X[:, meta.index]
    col = col[~np.isnan(col)]
    if col.size == 0:
        raise EmptyDatasetError(f"no observed values for {feature!r}")
    if meta.is_categorical:
        counts = np.bincount(col.astype(np.int64), minlength=len(meta.categories))
    else:
        _, counts = np.unique(col, return_counts=True)
    return counts / counts.sum()
