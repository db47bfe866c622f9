"""The fully quantum residual: SiLU lives inside the superposition.

In hybrid mode the SiLU branch is classical. The fully quantum variant
instead appends SiLU as a fifth labelled function next to the four
B-splines, shifted to be nonnegative and normalized like any other
probability row; the recorded (fq_scale, fq_shift) constants undo that
transformation at readout. This script shows the encode/decode round
trip on a single unit, then trains a fully quantum network end to end
on the log-ratio task.

Run from the repository root:  python3 demos/full_quantum_residual.py
"""

import numpy as np

from qukan.residual import (
    MODE_FULL_QUANTUM,
    make_full_quantum_unit,
    pretrain_full_quantum_base,
    silu,
)
from qukan.splines import DiscretizationGrid
from qukan.workflows import run_training

# --- single-unit round trip ---------------------------------------------------
grid = DiscretizationGrid(0.0, 1.0, 4)
base = pretrain_full_quantum_base(grid, seed=0)
print(f"fully quantum base: TVD {base.tvd:.4f}, "
      f"fq_scale {base.fq_scale:.4f}, fq_shift {base.fq_shift:.4f}")

unit = make_full_quantum_unit(base, grid, w_quantum=1.0)
points = grid.points
decoded = np.array([unit.forward(float(x)) for x in points])
target = silu(points)
print("\ngrid point   silu(x)   decoded   |error|")
for k in (0, 5, 10, 15):
    err = abs(decoded[k] - target[k])
    print(f"  x={points[k]:.3f}   {target[k]: .4f}   {decoded[k]: .4f}   {err:.2e}")
print(f"max |decoded - silu| on grid: {np.abs(decoded - target).max():.4f}")
print("(the gap is bounded by the pretraining TVD times fq_scale)")

# --- end-to-end fully quantum network ------------------------------------------
# Calibration pretrains one base per unique (layer, input node) grid, so
# this takes a few minutes.
summary = run_training("log_ratio", "fqukan", seeds=(0,), out_dir="demos_out/fq")
outcome = summary.outcomes[0]
avg, median, lo, hi = outcome.distance_stats
print("\nfully quantum network, log_ratio 10 train / 50 test")
print(f"  |pred - target|: avg {avg:.4f}, median {median:.4f}, range [{lo:.4f}, {hi:.4f}]")
print(f"  pearson r: {outcome.pearson:.4f}")
