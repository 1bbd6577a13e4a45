"""
Importance versus accuracy across a constraint grid
====================================================

A sweep trains one model per grid point and seed and records the test
accuracy together with every feature's importance.  The first row per seed
is the unconstrained baseline.
"""

import sys
import tempfile

from privtree import preset, run_sweep
from privtree.harness import summarize

out_dir = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="privtree-")

# decision tree, split budgets on social
cfg = preset("nursery-like-splits-sweep", seeds=[0, 1, 2], output_dir=out_dir)
rows = run_sweep(cfg)
print("budget   social imp   accuracy")
for r in summarize(rows, ["param", "constrained"]):
    print(f"{r['param']:>6}   {r['imp:social']:.4f}       {r['model_accuracy']:.4f}")

# random forest, same constraint applied to every member tree
cfg = preset("nursery-like-forest-splits", forest={"n_trees": 25}, output_dir=out_dir)
rows = run_sweep(cfg)
print("\nforest budget   social imp   accuracy")
for r in summarize(rows, ["param", "constrained"]):
    print(f"{r['param']:>13}   {r['imp:social']:.4f}       {r['model_accuracy']:.4f}")

# several sensitive features at once; the accumulated loss sums their importance drops
cfg = preset("nursery-like-splits-sweep", name="multi", method="levels", grid=[3, 6],
             sensitive_features=["social", "finance", "housing"], seeds=[0], output_dir=out_dir)
for r in run_sweep(cfg):
    print(f"levels {r['param']:>4}: accumulated importance loss {r['accumulated_importance_loss']:.4f}, "
          f"accuracy {r['model_accuracy']:.4f}")

print(f"\nCSV files in {out_dir}")
