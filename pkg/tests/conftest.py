import numpy as np
import pytest

from privtree.data import Dataset


def random_dataset(rng, n=None, d=None, k=None, max_cats=5):
    """Small categorical dataset with a label loosely tied to the features."""
    n = n or int(rng.integers(10, 80))
    d = d or int(rng.integers(1, 6))
    k = k or int(rng.integers(2, 4))
    cats = rng.integers(2, max_cats + 1, size=d)
    X = np.column_stack([rng.integers(0, c, size=n) for c in cats])
    signal = X @ rng.integers(-2, 3, size=d) + rng.integers(0, 3, size=n)
    y = np.mod(signal, k)
    y[:k] = np.arange(k)  # every class present
    return Dataset.from_arrays(X, y, n_categories=list(cats), class_names=[f"c{i}" for i in range(k)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tiny_csv(tmp_path):
    p = tmp_path / "tiny.csv"
    p.write_text("color,size,label\nred,small,yes\nblue,large,no\nred,large,yes\n")
    return p
