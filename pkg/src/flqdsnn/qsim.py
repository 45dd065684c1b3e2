"""Dense statevector simulator for small gate circuits.

Conventions, fixed across the package:
  * qubit 0 is the least-significant bit of the computational basis index,
    so |q3 q2 q1 q0> maps to index q3*8 + q2*4 + q1*2 + q0 on four qubits
  * RY(a) = [[cos(a/2), -sin(a/2)], [sin(a/2), cos(a/2)]]
  * RZ(a) = diag(exp(-i a/2), exp(+i a/2))
  * Rot(a1, a2, a3) = RZ(a3) @ RY(a2) @ RZ(a1), i.e. a1 is applied first
  * CZ flips the sign of amplitudes where both control and target bits are 1

States are dense complex128 vectors; n_qubits is capped at 12 to keep the
memory of a 2^n amplitude vector desk-sized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, UsageError

MAX_QUBITS = 12
NORM_ATOL = 1e-10

# kind -> number of angles it carries
_GATE_KINDS = {"ry": 1, "rz": 1, "rot": 3, "cz": 0, "x": 0}


@dataclass(frozen=True)
class Gate:
    """One gate of a circuit: a kind, a target qubit, optional control, angles."""

    kind: str
    target: int
    control: int | None = None
    angles: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _GATE_KINDS:
            raise UsageError(f"unknown gate kind {self.kind!r}")
        expected = _GATE_KINDS[self.kind]
        if len(self.angles) != expected:
            raise UsageError(
                f"gate {self.kind!r} takes {expected} angle(s), got {len(self.angles)}"
            )
        if self.kind == "cz":
            if self.control is None:
                raise UsageError("cz gate needs a control qubit")
            if self.control == self.target:
                raise UsageError("cz control and target must differ")
        elif self.control is not None:
            raise UsageError(f"gate {self.kind!r} does not take a control qubit")

    @classmethod
    def ry(cls, target: int, angle: float) -> "Gate":
        return cls("ry", target, angles=(float(angle),))

    @classmethod
    def rz(cls, target: int, angle: float) -> "Gate":
        return cls("rz", target, angles=(float(angle),))

    @classmethod
    def rot(cls, target: int, a1: float, a2: float, a3: float) -> "Gate":
        return cls("rot", target, angles=(float(a1), float(a2), float(a3)))

    @classmethod
    def cz(cls, control: int, target: int) -> "Gate":
        return cls("cz", target, control=control)

    @classmethod
    def x(cls, target: int) -> "Gate":
        return cls("x", target)


@dataclass
class Statevector:
    """Normalized amplitude vector over 2^n_qubits basis states."""

    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise UsageError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {self.amplitudes.shape}"
            )
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > NORM_ATOL:
            raise UsageError(f"statevector norm {norm!r} is not 1 within {NORM_ATOL}")


def init_zero(n_qubits: int) -> Statevector:
    """Return |0...0> on n_qubits qubits (1 <= n_qubits <= 12)."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigurationError(
            f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}"
        )
    amps = np.zeros(2**n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(n_qubits, amps)


def ry_matrix(angle: float) -> np.ndarray:
    half = 0.5 * angle
    c, s = np.cos(half), np.sin(half)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz_matrix(angle: float) -> np.ndarray:
    half = 0.5 * angle
    return np.array(
        [[np.exp(-1j * half), 0.0], [0.0, np.exp(1j * half)]], dtype=np.complex128
    )


def rot_matrix(a1: float, a2: float, a3: float) -> np.ndarray:
    """Composite rotation RZ(a3) @ RY(a2) @ RZ(a1); a1 acts on the state first."""
    return rz_matrix(a3) @ ry_matrix(a2) @ rz_matrix(a1)


def _apply_single(amps: np.ndarray, n: int, target: int, m: np.ndarray) -> np.ndarray:
    # basis index = high * 2^(target+1) + bit * 2^target + low
    view = amps.reshape(2 ** (n - target - 1), 2, 2**target)
    a0, a1 = view[:, 0, :], view[:, 1, :]
    out = np.empty_like(view)
    out[:, 0, :] = m[0, 0] * a0 + m[0, 1] * a1
    out[:, 1, :] = m[1, 0] * a0 + m[1, 1] * a1
    return out.reshape(amps.shape)


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Apply one gate and return the new state; the input is left untouched."""
    n = state.n_qubits
    if not 0 <= gate.target < n:
        raise UsageError(f"target {gate.target} out of range for {n} qubits")
    if gate.control is not None and not 0 <= gate.control < n:
        raise UsageError(f"control {gate.control} out of range for {n} qubits")

    amps = state.amplitudes
    if gate.kind == "ry":
        new = _apply_single(amps, n, gate.target, ry_matrix(gate.angles[0]))
    elif gate.kind == "rz":
        new = _apply_single(amps, n, gate.target, rz_matrix(gate.angles[0]))
    elif gate.kind == "rot":
        new = _apply_single(amps, n, gate.target, rot_matrix(*gate.angles))
    elif gate.kind == "x":
        view = amps.reshape(2 ** (n - gate.target - 1), 2, 2**gate.target)
        new = view[:, ::-1, :].reshape(amps.shape).copy()
    else:  # cz
        idx = np.arange(2**n)
        both = ((idx >> gate.target) & 1) & ((idx >> gate.control) & 1)
        new = np.where(both.astype(bool), -amps, amps)
    return Statevector(n, new)


def probabilities(state: Statevector) -> np.ndarray:
    """Measurement probabilities per basis state, in index order."""
    return np.abs(state.amplitudes) ** 2


def expectation_z(state: Statevector, qubit: int) -> float:
    """<Z> on one qubit: +1 weight where its bit is 0, -1 where it is 1."""
    n = state.n_qubits
    if not 0 <= qubit < n:
        raise UsageError(f"qubit {qubit} out of range for {n} qubits")
    probs = probabilities(state)
    bits = (np.arange(2**n) >> qubit) & 1
    return float(np.sum(probs * (1.0 - 2.0 * bits)))
