"""Pretrain the spline-superposition base and inspect what the circuit learned.

The Born machine is trained so that measuring its state yields each
(label j, grid point k) with probability proportional to the j-th
normalized B-spline evaluated at x_k. Runs in roughly ten seconds and
writes its artifacts to demos_out/pretrain/.

Run from the repository root:  python3 demos/pretrain_base.py
"""

import numpy as np

from qukan.workflows import run_pretraining

OUT = "demos_out/pretrain"

summary = run_pretraining(OUT, seed=0)
result = summary.result

print(f"iterations: {result.n_iters}")
print(f"final squared MMD: {result.final_loss:.3e}")
print(f"total variation distance to target: {result.tvd:.4f}")

# The TVD trace drops by roughly two orders of magnitude.
trace = result.tvd_trace
marks = [0, 10, 50, 100, len(trace) - 1]
print("\nTVD trace:")
for i in marks:
    print(f"  iter {i:4d}: {trace[i]:.4f}")

# Target vs learned probabilities for the first basis function. The
# learned column tracks the B-spline bump over the 16 grid points.
from qukan.born_machine import qcbm_distribution  # noqa: E402
from qukan.simulator import default_layout  # noqa: E402

layout = default_layout(2, 4)
learned = qcbm_distribution(result.model)
print("\nlabel 0 (first basis function), grid point -> learned probability:")
row = learned[: layout.n_positions]
for k in range(0, layout.n_positions, 2):
    bar = "#" * int(200 * row[k])
    print(f"  k={k:2d}  {row[k]:.4f}  {bar}")

print(f"\nbase checkpoint: {summary.checkpoint_path}")
print(f"trace table:     {summary.trace_path}")
print(f"distributions:   {summary.table_path}")
print(f"position marginal sums to {learned.reshape(4, -1).sum():.6f}")
print(f"marginal over labels: {np.round(learned.reshape(4, -1).sum(axis=0), 4)}")
