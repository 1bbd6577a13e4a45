import numpy as np

from privtree.data import prior
from privtree.recipes import (
    NURSERY_COLUMNS,
    gss,
    load_dataset,
    load_nursery_raw,
    nursery,
)
from privtree.synthetic import NURSERY_ATTRIBUTES, gss_like, nursery_like


def test_nursery_like_covers_attribute_space():
    raw = nursery_like()
    assert raw.n == int(np.prod([len(v) for v in NURSERY_ATTRIBUTES.values()])) == 12960
    assert len({tuple(r) for r in raw.X}) == raw.n


def test_nursery_recipe_on_headerless_file(tmp_path):
    raw = nursery_like()
    rows = raw.to_rows()
    p = tmp_path / "nursery.data"
    p.write_text("\n".join(",".join(r) for r in rows) + "\n")
    loaded = load_nursery_raw(p)
    assert np.array_equal(loaded.X, raw.X) and np.array_equal(loaded.y, raw.y)
    ds = nursery(p)
    assert ds.feature("social").categories == ("0", "1")
    assert "recommend" not in ds.label_meta.categories
    assert abs(prior(ds, "social")[1] - 1 / 3) < 0.01
    # the same file with a header row parses identically
    q = tmp_path / "nursery.csv"
    q.write_text(",".join(NURSERY_COLUMNS) + "\n" + p.read_text())
    assert np.array_equal(load_nursery_raw(q).X, raw.X)


def test_gss_recipe_from_csv_and_schema(tmp_path):
    raw = gss_like(300, seed=3)
    rows = raw.to_rows()
    rows[0][-2] = ""  # missing happiness: dropped
    rows[1][-1] = ""  # missing label: dropped
    names = raw.feature_names + [raw.label_meta.name]
    p = tmp_path / "gss.csv"
    p.write_text(",".join(names) + "\n" + "\n".join(",".join(r) for r in rows) + "\n")
    schema = tmp_path / "gss.schema"
    schema.write_text("label: marital_happiness\nhappiness: categorical = Not too happy | Pretty happy | Very happy\n")
    ds = gss(p, schema)
    assert ds.n == 298
    assert ds.feature("happiness").categories == ("0", "1")
    assert 0.5 < prior(ds, "happiness")[0] < 0.7


def test_synthetic_recipes():
    ds = load_dataset("gss-like", n=2000)
    assert ds.label_meta.name == "marital_happiness"
    p = prior(ds, "happiness")
    assert abs(p[0] - 0.6) < 0.03
    nl = load_dataset("nursery-like")
    assert abs(prior(nl, "social")[0] - 2 / 3) < 0.01
