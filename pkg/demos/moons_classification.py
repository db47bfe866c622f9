"""Train the hybrid network on the two-moons benchmark and export its boundary.

One seed of the full benchmark protocol: 1000 train / 1000 test points at
noise 0.1, a [2, 3, 2] network, 20 epochs. Takes a minute or two. The
decision-boundary lattice lands in demos_out/moons/ as (x, y, class) rows
ready for any plotting tool.

Run from the repository root:  python3 demos/moons_classification.py
"""

from qukan.residual import pretrain_hybrid_base
from qukan.workflows import boundary_grid, run_training

OUT = "demos_out/moons"

# The pretrained base is shared by every residual unit in the network.
base = pretrain_hybrid_base(seed=0)
print(f"pretrained base TVD: {base.tvd:.4f}")

summary = run_training("moons", "qukan", seeds=(0,), out_dir=OUT, base=base)
outcome = summary.outcomes[0]

print(f"train accuracy: {outcome.train_accuracy:.4f}")
print(f"test accuracy:  {outcome.test_accuracy:.4f}")
print(f"metrics file:   {summary.metrics_path}")

# Per-epoch training accuracy, as recorded in the metrics report.
print("\nepoch  train accuracy")
for epoch, acc in enumerate(outcome.report.train_accuracy_trace, start=1):
    print(f"{epoch:5d}  {acc:.4f}")

# Export the decision boundary over the training data's feature box.
from qukan.workflows import experiment_data  # noqa: E402

_, _, scaler = experiment_data("moons", 0)
xs, ys, classes = boundary_grid(outcome.model, scaler, out_path=f"{OUT}/boundary.csv")
frac = classes.mean()
print(f"\nboundary lattice: {classes.shape[0]}x{classes.shape[1]} points")
print(f"fraction predicted class 1: {frac:.3f}")
print(f"grid file: {OUT}/boundary.csv")
