"""
Statevector simulation from scratch
===================================

Build small circuits gate by gate and inspect the state.  Qubit 0 is the
least significant bit of the basis index, so |q1 q0> = |01> means qubit 0
is excited and sits at index 1.
"""

import numpy as np

from flqdsnn import qsim

# A single qubit starts in |0>
state = qsim.init_zero(1)
print("initial amplitudes:", state.amplitudes)

# RY(pi/2) rotates |0> to the equal superposition (|0> + |1>)/sqrt(2)
state = qsim.apply_gate(state, qsim.Gate.ry(0, np.pi / 2))
print("after RY(pi/2):    ", np.round(state.amplitudes, 6))
print("probabilities:     ", np.round(qsim.probabilities(state), 6))

# Z expectation of a superposition is 0; of |0> it is +1
print("<Z> on qubit 0:    ", round(qsim.expectation_z(state, 0), 6))

# Two qubits: entangle with CZ.  CZ only flips the sign of the |11>
# component, so it does nothing visible until both qubits have weight
# on |1>.
state = qsim.init_zero(2)
state = qsim.apply_gate(state, qsim.Gate.ry(0, np.pi / 2))
state = qsim.apply_gate(state, qsim.Gate.ry(1, np.pi / 2))
print("\nproduct state:  ", np.round(state.amplitudes, 4))
state = qsim.apply_gate(state, qsim.Gate.cz(0, 1))
print("after CZ:       ", np.round(state.amplitudes, 4))

# The Rot gate is the general single-qubit rotation used by the trainable
# layers: RZ(a1) then RY(a2) then RZ(a3).
state = qsim.init_zero(1)
state = qsim.apply_gate(state, qsim.Gate.rot(0, 0.3, 1.1, -0.4))
print("\nRot(0.3, 1.1, -0.4) on |0>:", np.round(state.amplitudes, 6))

# Every gate is unitary, so norms survive arbitrarily long sequences.
rng = np.random.default_rng(0)
state = qsim.init_zero(3)
for _ in range(500):
    q = int(rng.integers(3))
    state = qsim.apply_gate(state, qsim.Gate.rot(q, *rng.uniform(0, 2 * np.pi, 3)))
    state = qsim.apply_gate(state, qsim.Gate.cz(q, (q + 1) % 3))
print("\nnorm after 1000 random gates:", np.linalg.norm(state.amplitudes))
