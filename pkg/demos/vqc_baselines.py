"""Train the variational-classifier baselines on two-moons.

Four embeddings of the same 2-feature data: per-qubit angle rotations,
the ZZ feature map, amplitude encoding, and amplitude encoding padded
with four ancilla qubits. Each gets 4 strongly entangling layers and a
leading-qubit readout. One seed and reduced set sizes keep the runtime
to a couple of minutes; expect accuracies well below the hybrid
network's.

Run from the repository root:  python3 demos/vqc_baselines.py
"""

from qukan.workflows import run_training

EMBEDDINGS = ("vqc_angle", "vqc_zz", "vqc_amplitude", "vqc_amplitude_ancillas")

print(f"{'model':>24s}  {'test accuracy':>13s}")
for model_kind in EMBEDDINGS:
    summary = run_training(
        "moons",
        model_kind,
        seeds=(0,),
        out_dir=f"demos_out/vqc/{model_kind}",
        n_train=200,
        n_test=200,
    )
    outcome = summary.outcomes[0]
    print(f"{model_kind:>24s}  {outcome.test_accuracy:13.4f}")
