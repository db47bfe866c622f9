"""Iris classification plus the two regression benchmarks on one page.

Three quick runs, one seed each: the [4, 4, 3] network on the bundled
iris data, then 2-layer networks fitting f(x) = 2x0 - 3x1 + 1 and
f(x) = ln(x0 / x1). Regression quality is reported as the per-point
|prediction - target| statistics and the Pearson correlation.

Run from the repository root:  python3 demos/iris_and_regression.py
"""

from qukan.residual import pretrain_hybrid_base
from qukan.workflows import run_training

base = pretrain_hybrid_base(seed=0)

# --- iris ------------------------------------------------------------------
summary = run_training("iris", "qukan", seeds=(0,), out_dir="demos_out/iris", base=base)
outcome = summary.outcomes[0]
print("iris [4, 4, 3]")
print(f"  train accuracy: {outcome.train_accuracy:.4f}")
print(f"  test accuracy:  {outcome.test_accuracy:.4f} (45 held-out flowers)")

# --- linear regression -----------------------------------------------------
summary = run_training("linear", "qukan", seeds=(0,), out_dir="demos_out/linear", base=base)
outcome = summary.outcomes[0]
avg, median, lo, hi = outcome.distance_stats
print("\nlinear f(x) = 2*x0 - 3*x1 + 1, 100 train / 250 test")
print(f"  |pred - target|: avg {avg:.4f}, median {median:.4f}, range [{lo:.4f}, {hi:.4f}]")
print(f"  pearson r: {outcome.pearson:.4f}")

# --- log-ratio regression --------------------------------------------------
# Ten training points only; the benchmark checks how far a small model
# generalizes from a tiny sample.
summary = run_training("log_ratio", "qukan", seeds=(0,), out_dir="demos_out/log_ratio", base=base)
outcome = summary.outcomes[0]
avg, median, lo, hi = outcome.distance_stats
print("\nlog_ratio f(x) = ln(x0 / x1), 10 train / 50 test")
print(f"  |pred - target|: avg {avg:.4f}, median {median:.4f}, range [{lo:.4f}, {hi:.4f}]")
print(f"  pearson r: {outcome.pearson:.4f}")
