"""Does pretraining the base help? Train the three ablation variants.

Shared-seed comparison on two-moons of the pretrained base against a
uniform (Hadamard-style) base with live weights and against the frozen
variant whose residual reduces to a scalable SiLU plus a bias. Prints
the per-epoch mean training accuracy of each variant; the full
per-seed table lands in demos_out/ablation/ablation_accuracy.csv.

Run from the repository root:  python3 demos/pretraining_ablation.py
(a few minutes: three variants, two seeds, 20 epochs each)
"""

from qukan.residual import pretrain_hybrid_base
from qukan.workflows import run_ablation

base = pretrain_hybrid_base(seed=0)

summary = run_ablation("demos_out/ablation", seeds=(0, 1), base=base)

print("epoch  " + "  ".join(f"{kind:>16s}" for kind in summary.traces))
for epoch in range(summary.epochs):
    cells = "  ".join(
        f"{summary.traces[kind][:, epoch].mean():16.4f}" for kind in summary.traces
    )
    print(f"{epoch + 1:5d}  {cells}")

print("\nfinal means over seeds:")
for kind, mean in summary.final_means.items():
    print(f"  {kind}: {mean:.4f}")
print(f"pretraining gap (pretrained - hadamard_init): {summary.pretraining_gap:+.4f}")
print(f"table: {summary.table_path}")
