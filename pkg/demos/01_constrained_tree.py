"""
Privacy-guided training on a single tree
========================================

Train one unconstrained tree on the Nursery-shaped surrogate, then retrain
it under each of the three constraints on ``social`` and compare the
feature's importance and the test accuracy.
"""

import numpy as np

from privtree import SensitivitySpec, SplitSpec, TreeConfig, audit, load_dataset, train, train_test_split

data = load_dataset("nursery-like")
train_split, test_split = train_test_split(data, SplitSpec(0.8, seed=0))
print(f"{data.n} rows, classes {data.label_meta.categories}")


def describe(label, tree):
    acc = np.mean(tree.predict(test_split.X) == test_split.y)
    n_social = tree.split_counts()[data.feature_index("social")]
    print(f"{label:<28} acc {acc:.4f}  social imp {tree.importance()['social']:.4f}  "
          f"social splits {n_social:3d}  nodes {len(tree.nodes)}")


# the unconstrained tree; audit() returns an empty list when every split is valid
base = train(train_split)
assert audit(base) == []
describe("unconstrained", base)

# On this data social only matters jointly with health, so pushing its splits
# deeper (weights, levels) can hand it more credit rather than less; the
# split budget is the constraint that reliably lowers its importance.

# weight penalty: splits on social look worse by a factor (1 + w) on the children's entropy
for w in (0.2, 1.0):
    describe(f"weight {w}", train(train_split, SensitivitySpec.weights({"social": w})))

# level threshold: social may only be used at depth >= threshold
for level in (4, 8):
    describe(f"level threshold {level}", train(train_split, SensitivitySpec.levels(["social"], level)))

# split budget: a tree-wide cap on the number of social splits (needs breadth-first growth)
bfs = TreeConfig(growth="breadth_first")
for budget in (5, 1, 0):
    describe(f"split budget {budget}", train(train_split, SensitivitySpec.splits(["social"], budget), bfs))

# the top of the budget-1 tree
tree = train(train_split, SensitivitySpec.splits(["social"], 1), bfs)
print(tree.render(max_depth=2))
