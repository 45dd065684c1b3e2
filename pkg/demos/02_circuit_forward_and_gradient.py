"""
The spiking variational classifier circuit
==========================================

One forward pass: angle-encode four features, run five trainable
Rot + CZ-ring layers, conditionally fire Pauli-X "spikes" where a
designated angle exceeds the threshold tau, then group the 16 outcome
probabilities into class probabilities.
"""

import numpy as np

from flqdsnn.circuit import (
    CircuitParams,
    SpikeConfig,
    compute_spike_mask,
    forward,
    gradient,
    loss,
)

rng = np.random.default_rng(42)
params = CircuitParams.random(rng)        # 5 layers x 4 qubits x 3 angles
x = np.array([0.2, 0.8, 0.5, 0.1])        # features must lie in [0, 1]

# --- forward pass, spiking disabled -----------------------------------
off = SpikeConfig(enabled=False)
result = forward(x, params, off, n_classes=3)
print("class probabilities (no spikes):", np.round(result.class_probs, 4))
print("sum:", result.class_probs.sum())

# --- the spike mask ----------------------------------------------------
# With final_layer mode only the last layer's third angles are compared
# against tau; a strict > decides which qubits get an X at the end.
on = SpikeConfig(enabled=True, threshold=0.5, mode="final_layer")
mask = compute_spike_mask(params, on)
print("\nfinal-layer third angles:", np.round(params.angles[-1, :, 2], 3))
print("fired qubits (tau=0.5):  ", mask.fired[0])

result_on = forward(x, params, on, n_classes=3)
print("class probabilities (spiking):  ", np.round(result_on.class_probs, 4))

# --- loss and its exact gradient ---------------------------------------
label = 1
print("\nloss at label 1:", round(loss(result_on.class_probs, label, 3), 6))

# The gradient uses the parameter-shift rule: each angle is evaluated at
# +pi/2 and -pi/2 with the spike pattern frozen, so the discontinuous
# firing condition never pollutes the derivative.
g = gradient(x, label, params, on, n_classes=3)
print("gradient shape:", g.shape)
print("largest |dL/dtheta|:", round(float(np.max(np.abs(g))), 6))

# Sanity check one coordinate against a central finite difference.
idx = (2, 1, 0)
h = 1e-6
shifted = params.angles.copy()
shifted[idx] += h
up = loss(forward(x, CircuitParams(shifted), on, 3).class_probs, label, 3)
shifted[idx] -= 2 * h
down = loss(forward(x, CircuitParams(shifted), on, 3).class_probs, label, 3)
fd = (up - down) / (2 * h)
print(f"\ncoordinate {idx}: parameter-shift {g[idx]:+.8f}  finite-diff {fd:+.8f}")
