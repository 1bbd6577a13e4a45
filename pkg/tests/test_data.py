import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from privtree.data import (
    Dataset,
    FeatureMeta,
    SplitSpec,
    booleanize_feature,
    filter_label,
    format_schema,
    load_csv,
    parse_schema,
    prior,
    train_test_split,
)
from privtree.errors import (
    ConfigurationError,
    EmptyDatasetError,
    EncodingError,
    ParseError,
    SchemaError,
    SplitError,
)


def test_load_small_csv(tiny_csv):
    ds = load_csv(tiny_csv)
    assert ds.n == 3
    assert ds.feature_names == ["color", "size"]
    # lexicographic category order
    assert ds.feature("color").categories == ("blue", "red")
    assert ds.X[:, 0].tolist() == [1, 0, 1]
    assert ds.label_meta.categories == ("no", "yes")
    assert ds.y.tolist() == [1, 0, 1]


def test_wrong_column_count_names_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b,c,label\n1,2,3,x\n1,2,3,4,x\n")
    with pytest.raises(ParseError) as exc:
        load_csv(p)
    assert exc.value.line == 3
    assert "line 3" in str(exc.value)


def test_unknown_category_under_hint(tiny_csv):
    hint = [FeatureMeta("color", "categorical", ("red", "green"))]
    with pytest.raises(EncodingError, match="blue"):
        load_csv(tiny_csv, hint)


def test_hint_for_absent_column(tiny_csv):
    with pytest.raises(SchemaError):
        load_csv(tiny_csv, [FeatureMeta("weight", "numeric")])


def test_numeric_inference_and_missing(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("age,mood,label\n31,?,a\n40,happy,b\n22,sad,?\n")
    with pytest.raises(ParseError, match="mood"):
        load_csv(p)
    ds = load_csv(p, allow_missing=["mood"])
    assert ds.feature("age").kind == "numeric"
    assert np.isnan(ds.X[0, 1])
    assert ds.y.tolist() == [0, 1, -1]
    assert ds.has_missing()


def test_schema_round_trip(tiny_csv):
    ds = load_csv(tiny_csv)
    metas, label = parse_schema(format_schema(ds))
    assert label == "label"
    assert [m.categories for m in metas[:2]] == [f.categories for f in ds.schema]


def test_schema_parse_errors():
    with pytest.raises(ParseError) as exc:
        parse_schema("label: y\n# comment\nbroken line\n")
    assert exc.value.line == 3
    with pytest.raises(ParseError):
        parse_schema("x: banana\n")


def test_encoding_round_trip():
    meta = FeatureMeta("f", "categorical", ("a", "b", "c"))
    for c in meta.categories:
        assert meta.decode(meta.encode(c)) == c


def test_dataset_is_immutable(tiny_csv):
    ds = load_csv(tiny_csv)
    with pytest.raises(ValueError):
        ds.X[0, 0] = 5


def test_filter_label_noop():
    ds = Dataset.from_arrays(np.zeros((4, 1)), [0, 1, 0, 1])
    out = filter_label(ds, 0.0)
    assert np.array_equal(out.X, ds.X) and np.array_equal(out.y, ds.y)
    assert out.label_meta == ds.label_meta


def test_filter_label_drops_rare_class():
    y = np.array([0] * 60 + [1] * 39 + [2])
    ds = Dataset.from_arrays(np.zeros((100, 1)), y)
    out = filter_label(ds, 0.05)
    assert out.n == 99
    assert out.label_meta.categories == ("0", "1")
    assert set(out.y.tolist()) == {0, 1}


def test_filter_label_reencodes_densely():
    y = np.array([0, 0, 2, 2, 1])
    out = filter_label(Dataset.from_arrays(np.zeros((5, 1)), y), 0.3)
    assert out.label_meta.categories == ("0", "2")
    assert out.y.tolist() == [0, 0, 1, 1]


def test_filter_label_drops_missing_and_is_idempotent(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("x,label\na,1\nb,\nc,2\nd,NA\n")
    once = filter_label(load_csv(p), 0.0)
    assert once.n == 2 and (once.y >= 0).all()
    twice = filter_label(once, 0.0)
    assert np.array_equal(once.X, twice.X) and np.array_equal(once.y, twice.y)


def test_filter_label_empty():
    ds = Dataset.from_arrays(np.zeros((2, 1)), [-1, -1], class_names=["a"])
    with pytest.raises(EmptyDatasetError):
        filter_label(ds)


def test_booleanize():
    ds = Dataset.from_arrays([[0], [1], [2], [2]], [0, 1, 0, 1], ["s"], [3])
    out = booleanize_feature(ds, "s", {"2"})
    assert out.X[:, 0].tolist() == [0, 0, 1, 1]
    assert out.feature("s").categories == ("0", "1")
    assert prior(out, "s").tolist() == [0.5, 0.5]


def test_booleanize_all_positive_gives_constant_ones():
    ds = Dataset.from_arrays([[0], [1], [2]], [0, 1, 0], ["s"], [3])
    out = booleanize_feature(ds, "s", {"0", "1", "2"})
    assert out.X[:, 0].tolist() == [1, 1, 1]
    assert prior(out, "s")[1] == 1.0


def test_booleanize_drops_missing(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("happy,other,label\nyes,a,x\n,b,y\nno,a,x\n")
    out = booleanize_feature(load_csv(p, allow_missing=["happy"]), "happy", {"yes"})
    assert out.n == 2
    assert out.row_ids.tolist() == [0, 2]


def test_booleanize_errors():
    ds = Dataset.from_arrays([[0], [1]], [0, 1], ["s"], [2])
    with pytest.raises(ConfigurationError):
        booleanize_feature(ds, "nope", {"1"})
    with pytest.raises(ConfigurationError):
        booleanize_feature(ds, "s", {"7"})


def test_split_sizes_and_determinism():
    ds = Dataset.from_arrays(np.arange(10)[:, None] % 3, np.arange(10) % 2)
    a_train, a_test = train_test_split(ds, SplitSpec(0.8, 3))
    b_train, b_test = train_test_split(ds, SplitSpec(0.8, 3))
    assert (a_train.n, a_test.n) == (8, 2)
    assert np.array_equal(a_train.row_ids, b_train.row_ids)
    assert sorted(a_train.row_ids.tolist() + a_test.row_ids.tolist()) == list(range(10))


def test_split_seeds_differ():
    ds = Dataset.from_arrays(np.zeros((200, 1)), np.arange(200) % 2)
    a, _ = train_test_split(ds, SplitSpec(0.8, 0))
    b, _ = train_test_split(ds, SplitSpec(0.8, 1))
    assert set(a.row_ids.tolist()) != set(b.row_ids.tolist())


def test_split_errors():
    with pytest.raises(ConfigurationError):
        SplitSpec(1.0)
    ds = Dataset.from_arrays(np.zeros((2, 1)), [0, 1])
    with pytest.raises(SplitError):
        train_test_split(ds, SplitSpec(0.1))


def test_prior_examples():
    ds = Dataset.from_arrays([[0], [0], [1], [1]], [0, 0, 0, 1], ["f"], [2])
    assert prior(ds, "f").tolist() == [0.5, 0.5]
    const = Dataset.from_arrays([[0], [0]], [0, 1], ["f"], [1])
    assert prior(const, "f").tolist() == [1.0]
    with pytest.raises(ConfigurationError):
        prior(ds, "g")


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=2, max_size=60), st.integers(0, 2**16),
       st.floats(0.1, 0.9))
def test_split_partition_property(codes, seed, frac):
    ds = Dataset.from_arrays(np.array(codes)[:, None], np.array(codes) % 2, n_categories=[4],
                             class_names=["a", "b"])
    try:
        tr, te = train_test_split(ds, SplitSpec(frac, seed))
    except SplitError:
        return
    ids = np.concatenate([tr.row_ids, te.row_ids])
    assert sorted(ids.tolist()) == list(range(ds.n))
    p = prior(ds, "f0")
    assert (p >= 0).all() and abs(p.sum() - 1) < 1e-9
