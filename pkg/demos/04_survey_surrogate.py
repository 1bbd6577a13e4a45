"""
Boosting with weights, and raising a feature's importance
==========================================================

Uses the survey-style generator.  First, AdaBoost under growing weights on
``happiness``.  Then the reverse experiment: forbid splits (budget 0) on a
growing set of the other, least important features so that ``happiness``
carries more and more of the tree, and watch the white-box attack improve.
"""

from privtree import preset, run_attack_experiment, run_sweep
from privtree.harness import summarize

rows = run_sweep(preset("gss-like-adaboost-weights", seeds=[0]))
print("weight   happiness imp   accuracy")
for r in summarize(rows, ["param", "constrained"]):
    print(f"{r['param']:>6}   {r['imp:happiness']:.4f}          {r['model_accuracy']:.4f}")

rows = run_attack_experiment(preset("gss-like-increase-attack", seeds=[0], attack_kinds=["white_box"]))
print("\n#constrained   happiness imp   white-box acc")
for r in summarize(rows, ["param", "constrained", "attack_kind"]):
    k = len(r["constrained"].split(";")) if r["constrained"] else 0
    print(f"{k:>12}   {r['importance']:.4f}          {r['attack_accuracy']:.4f}")
