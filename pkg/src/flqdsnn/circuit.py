"""Variational spiking circuit: ansatz, readout, loss, and gradients.

Circuit semantics on n qubits (default 4) with L layers (default 5):
  1. angle encoding: RY(scale * x[q]) on each qubit, scale = pi by default
  2. per layer l, per qubit q: Rot(angles[l][q][0..2]) on q, then CZ(q, (q+1) mod n)
  3. spiking: a conditional PauliX on qubit q wherever angles[l][q][2] > threshold
     (strict inequality); in "final_layer" mode only the last layer's third
     angles are compared and the X gates run once after all layers, in
     "per_layer" mode the comparison and the X gates run after every layer
  4. readout: basis outcome o contributes to class o mod n_classes

The loss is (1/n_classes) * sum_c (onehot(label)[c] - class_probs[c])^2.
Gradients use the two-point parameter-shift rule per Rot sub-angle with the
spike mask frozen at the unshifted parameters; the shift rule is exact for
these rotations, so a faster backward sweep that computes the identical
derivative analytically is used on the batched training path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, UsageError, ValidationError
from .qsim import Gate, apply_gate, init_zero, probabilities, rot_matrix, ry_matrix, rz_matrix

DEFAULT_LAYERS = 5
DEFAULT_QUBITS = 4

_ENCODING_SCALES = {"pi": np.pi, "one": 1.0}
_SPIKE_MODES = ("final_layer", "per_layer")


@dataclass
class CircuitParams:
    """Trainable rotation angles, shape [n_layers][n_qubits][3]."""

    angles: np.ndarray

    def __post_init__(self) -> None:
        self.angles = np.asarray(self.angles, dtype=np.float64)
        if self.angles.ndim != 3 or self.angles.shape[2] != 3:
            raise UsageError(f"angles must be [layers][qubits][3], got {self.angles.shape}")
        if self.angles.shape[0] < 1 or self.angles.shape[1] < 2:
            raise UsageError("need at least 1 layer and 2 qubits (ring entangler)")
        if not np.all(np.isfinite(self.angles)):
            raise UsageError("angles must be finite")

    @property
    def n_layers(self) -> int:
        return self.angles.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.angles.shape[1]

    @classmethod
    def random(
        cls,
        rng: np.random.Generator,
        n_layers: int = DEFAULT_LAYERS,
        n_qubits: int = DEFAULT_QUBITS,
    ) -> "CircuitParams":
        """Uniform angles in [0, 2*pi), the initialization used for training."""
        return cls(rng.uniform(0.0, 2.0 * np.pi, size=(n_layers, n_qubits, 3)))


@dataclass(frozen=True)
class SpikeConfig:
    """Spiking behaviour: on/off, firing threshold in [0, 1], comparison mode."""

    enabled: bool = True
    threshold: float = 0.0
    mode: str = "final_layer"

    def __post_init__(self) -> None:
        if self.mode not in _SPIKE_MODES:
            raise ConfigurationError(f"spike mode must be one of {_SPIKE_MODES}, got {self.mode!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigurationError(f"threshold must lie in [0, 1], got {self.threshold}")


@dataclass
class SpikeMask:
    """Which qubits fire: one row for final_layer mode, one row per layer otherwise."""

    fired: np.ndarray
    mode: str


@dataclass
class ForwardResult:
    class_probs: np.ndarray
    raw_probs: np.ndarray
    mask: SpikeMask


def _check_features(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise UsageError(f"expected a 1-D feature vector, got shape {x.shape}")
    bad = np.where(~((x >= 0.0) & (x <= 1.0)))[0]
    if bad.size:
        raise ValidationError(
            f"features must lie in [0, 1]; offending indices {bad.tolist()} "
            f"with values {x[bad].tolist()}"
        )
    return x


def _scale_factor(encoding_scale: str) -> float:
    try:
        return _ENCODING_SCALES[encoding_scale]
    except KeyError:
        raise ConfigurationError(
            f"encoding_scale must be one of {sorted(_ENCODING_SCALES)}, got {encoding_scale!r}"
        ) from None


def encode(x: np.ndarray, *, encoding_scale: str = "pi") -> list[Gate]:
    """Angle-encoding gates RY(scale * x[q]), one per feature."""
    factor = _scale_factor(encoding_scale)
    x = _check_features(x)
    return [Gate.ry(q, factor * float(v)) for q, v in enumerate(x)]


def compute_spike_mask(params: CircuitParams, cfg: SpikeConfig) -> SpikeMask:
    """Fire where the third Rot angle strictly exceeds the threshold."""
    third = params.angles[:, :, 2]
    if cfg.mode == "final_layer":
        third = third[-1:, :]
    if cfg.enabled:
        fired = third > cfg.threshold
    else:
        fired = np.zeros(third.shape, dtype=bool)
    return SpikeMask(fired=fired, mode=cfg.mode)


def build_gate_sequence(
    x: np.ndarray,
    params: CircuitParams,
    mask: SpikeMask,
    *,
    encoding_scale: str = "pi",
) -> list[Gate]:
    """Full gate list: encoding, layered Rot+CZ ring, conditional X from the mask."""
    n = params.n_qubits
    if len(x) != n:
        raise UsageError(f"expected {n} features, got {len(x)}")
    gates = encode(x, encoding_scale=encoding_scale)
    for layer in range(params.n_layers):
        for q in range(n):
            a1, a2, a3 = params.angles[layer, q]
            gates.append(Gate.rot(q, a1, a2, a3))
            gates.append(Gate.cz(q, (q + 1) % n))
        if mask.mode == "per_layer":
            for q in range(n):
                if mask.fired[layer, q]:
                    gates.append(Gate.x(q))
    if mask.mode == "final_layer":
        for q in range(n):
            if mask.fired[0, q]:
                gates.append(Gate.x(q))
    return gates


@lru_cache(maxsize=None)
def _group_matrix(n_outcomes: int, n_classes: int) -> np.ndarray:
    g = np.zeros((n_outcomes, n_classes))
    g[np.arange(n_outcomes), np.arange(n_outcomes) % n_classes] = 1.0
    return g


def _check_n_classes(n_classes: int, n_qubits: int) -> None:
    if not 2 <= n_classes <= 2**n_qubits:
        raise ConfigurationError(
            f"n_classes must lie in [2, {2**n_qubits}] for {n_qubits} qubits, got {n_classes}"
        )


def forward_with_mask(
    x: np.ndarray,
    params: CircuitParams,
    mask: SpikeMask,
    n_classes: int,
    *,
    encoding_scale: str = "pi",
) -> ForwardResult:
    """Run the circuit with an explicitly supplied (frozen) spike mask."""
    _check_n_classes(n_classes, params.n_qubits)
    state = init_zero(params.n_qubits)
    for gate in build_gate_sequence(x, params, mask, encoding_scale=encoding_scale):
        state = apply_gate(state, gate)
    raw = probabilities(state)
    class_probs = raw @ _group_matrix(raw.size, n_classes)
    return ForwardResult(class_probs=class_probs, raw_probs=raw, mask=mask)


def forward(
    x: np.ndarray,
    params: CircuitParams,
    cfg: SpikeConfig,
    n_classes: int,
    *,
    encoding_scale: str = "pi",
) -> ForwardResult:
    """Run the circuit end to end, deriving the spike mask from params and cfg."""
    mask = compute_spike_mask(params, cfg)
    return forward_with_mask(x, params, mask, n_classes, encoding_scale=encoding_scale)


def _check_label(label: int, n_classes: int) -> int:
    label = int(label)
    if not 0 <= label < n_classes:
        raise ValidationError(f"label {label} outside [0, {n_classes})")
    return label


def loss(class_probs: np.ndarray, label: int, n_classes: int) -> float:
    """Mean squared error between the one-hot label and the class probabilities."""
    label = _check_label(label, n_classes)
    target = np.zeros(n_classes)
    target[label] = 1.0
    diff = target - np.asarray(class_probs, dtype=np.float64)
    return float(np.mean(diff**2))


# ---------------------------------------------------------------------------
# Batched engine: the same circuit vectorized over samples.  Kept in sync
# with the gate path above by equality tests; the federated training loop
# calls these to stay desk-fast.
# ---------------------------------------------------------------------------


def _vec_const(amps: np.ndarray, n: int, target: int, m: np.ndarray) -> np.ndarray:
    """One 2x2 gate, same matrix for every sample. amps: [batch, 2^n]."""
    view = amps.reshape(-1, 2 ** (n - target - 1), 2, 2**target)
    a0, a1 = view[:, :, 0, :], view[:, :, 1, :]
    out = np.empty_like(view)
    out[:, :, 0, :] = m[0, 0] * a0 + m[0, 1] * a1
    out[:, :, 1, :] = m[1, 0] * a0 + m[1, 1] * a1
    return out.reshape(amps.shape)


def _vec_ry_angles(amps: np.ndarray, n: int, target: int, angles: np.ndarray) -> np.ndarray:
    """RY with a per-sample angle (used by the encoding stage)."""
    view = amps.reshape(-1, 2 ** (n - target - 1), 2, 2**target)
    c = np.cos(0.5 * angles)[:, None, None]
    s = np.sin(0.5 * angles)[:, None, None]
    a0, a1 = view[:, :, 0, :], view[:, :, 1, :]
    out = np.empty_like(view)
    out[:, :, 0, :] = c * a0 - s * a1
    out[:, :, 1, :] = s * a0 + c * a1
    return out.reshape(amps.shape)


def _vec_x(amps: np.ndarray, n: int, target: int) -> np.ndarray:
    view = amps.reshape(-1, 2 ** (n - target - 1), 2, 2**target)
    return view[:, :, ::-1, :].reshape(amps.shape).copy()


@lru_cache(maxsize=None)
def _cz_sign(n: int, a: int, b: int) -> np.ndarray:
    idx = np.arange(2**n)
    sign = np.where((((idx >> a) & 1) & ((idx >> b) & 1)).astype(bool), -1.0, 1.0)
    sign.setflags(write=False)
    return sign


@lru_cache(maxsize=None)
def _z_sign(n: int, target: int) -> np.ndarray:
    idx = np.arange(2**n)
    sign = np.where(((idx >> target) & 1).astype(bool), -1.0, 1.0)
    sign.setflags(write=False)
    return sign


def _check_feature_matrix(features: np.ndarray, n_qubits: int) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != n_qubits:
        raise UsageError(f"expected features [batch][{n_qubits}], got shape {features.shape}")
    bad_rows, bad_cols = np.where(~((features >= 0.0) & (features <= 1.0)))
    if bad_rows.size:
        raise ValidationError(
            f"features must lie in [0, 1]; first offence at row {int(bad_rows[0])}, "
            f"column {int(bad_cols[0])} with value {features[bad_rows[0], bad_cols[0]]}"
        )
    return features


def _encode_batch(features: np.ndarray, n_qubits: int, encoding_scale: str) -> np.ndarray:
    factor = _scale_factor(encoding_scale)
    batch = features.shape[0]
    amps = np.zeros((batch, 2**n_qubits), dtype=np.complex128)
    amps[:, 0] = 1.0
    for q in range(n_qubits):
        amps = _vec_ry_angles(amps, n_qubits, q, factor * features[:, q])
    return amps


def _apply_layers(amps: np.ndarray, angles: np.ndarray, mask: SpikeMask) -> np.ndarray:
    n_layers, n_qubits, _ = angles.shape
    for layer in range(n_layers):
        for q in range(n_qubits):
            amps = _vec_const(amps, n_qubits, q, rot_matrix(*angles[layer, q]))
            amps = amps * _cz_sign(n_qubits, q, (q + 1) % n_qubits)
        if mask.mode == "per_layer":
            for q in range(n_qubits):
                if mask.fired[layer, q]:
                    amps = _vec_x(amps, n_qubits, q)
    if mask.mode == "final_layer":
        for q in range(n_qubits):
            if mask.fired[0, q]:
                amps = _vec_x(amps, n_qubits, q)
    return amps


def forward_probs_batch(
    features: np.ndarray,
    params: CircuitParams,
    mask: SpikeMask,
    n_classes: int,
    *,
    encoding_scale: str = "pi",
) -> tuple[np.ndarray, np.ndarray]:
    """Class and raw outcome probabilities for a batch of samples.

    Returns (class_probs [batch][n_classes], raw_probs [batch][2^n]).
    """
    _check_n_classes(n_classes, params.n_qubits)
    features = _check_feature_matrix(features, params.n_qubits)
    amps = _encode_batch(features, params.n_qubits, encoding_scale)
    amps = _apply_layers(amps, params.angles, mask)
    raw = np.abs(amps) ** 2
    return raw @ _group_matrix(raw.shape[1], n_classes), raw


def _one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValidationError(f"labels must lie in [0, {n_classes})")
    out = np.zeros((labels.size, n_classes))
    out[np.arange(labels.size), labels] = 1.0
    return out


def _im_inner_z(lam: np.ndarray, ket: np.ndarray, n: int, target: int) -> float:
    return float(np.imag(np.sum(np.conj(lam) * ket * _z_sign(n, target))))


def _im_inner_y(lam: np.ndarray, ket: np.ndarray, n: int, target: int) -> float:
    # Im(<lam|Y|ket>) reduces to Re(<lam_1|ket_0> - <lam_0|ket_1>) on the target axis.
    lview = lam.reshape(-1, 2 ** (n - target - 1), 2, 2**target)
    kview = ket.reshape(-1, 2 ** (n - target - 1), 2, 2**target)
    term = np.sum(np.conj(lview[:, :, 1, :]) * kview[:, :, 0, :])
    term -= np.sum(np.conj(lview[:, :, 0, :]) * kview[:, :, 1, :])
    return float(np.real(term))


def mean_loss_and_gradient(
    features: np.ndarray,
    labels: np.ndarray,
    params: CircuitParams,
    cfg: SpikeConfig,
    n_classes: int,
    *,
    encoding_scale: str = "pi",
) -> tuple[float, np.ndarray]:
    """Mean loss over the batch and its gradient w.r.t. every Rot angle.

    The spike mask is computed once from the unshifted params and frozen, so
    the result matches averaging `gradient` over the batch (the backward
    sweep here evaluates the same derivative the shift rule would).
    """
    _check_n_classes(n_classes, params.n_qubits)
    features = _check_feature_matrix(features, params.n_qubits)
    mask = compute_spike_mask(params, cfg)
    amps = _encode_batch(features, params.n_qubits, encoding_scale)
    final = _apply_layers(amps, params.angles, mask)
    raw = np.abs(final) ** 2
    group = _group_matrix(raw.shape[1], n_classes)
    class_probs = raw @ group

    targets = _one_hot(labels, n_classes)
    batch = features.shape[0]
    mean_loss = float(np.mean((targets - class_probs) ** 2))

    w = ((class_probs - targets) @ group.T) * (2.0 / n_classes)
    lam = w * final
    grads = _adjoint_sweep(final, lam, params.angles, mask) / batch
    return mean_loss, grads


def _adjoint_sweep(
    ket: np.ndarray, lam: np.ndarray, angles: np.ndarray, mask: SpikeMask
) -> np.ndarray:
    """Walk the circuit backwards accumulating d(loss)/d(angle) sums."""
    n_layers, n_qubits, _ = angles.shape
    grads = np.zeros((n_layers, n_qubits, 3))

    def undo_x(row: int) -> None:
        nonlocal ket, lam
        for q in range(n_qubits):
            if mask.fired[row, q]:
                ket = _vec_x(ket, n_qubits, q)
                lam = _vec_x(lam, n_qubits, q)

    if mask.mode == "final_layer":
        undo_x(0)
    for layer in reversed(range(n_layers)):
        if mask.mode == "per_layer":
            undo_x(layer)
        for q in reversed(range(n_qubits)):
            sign = _cz_sign(n_qubits, q, (q + 1) % n_qubits)
            ket = ket * sign
            lam = lam * sign
            a1, a2, a3 = angles[layer, q]
            grads[layer, q, 2] = _im_inner_z(lam, ket, n_qubits, q)
            m = rz_matrix(-a3)
            ket = _vec_const(ket, n_qubits, q, m)
            lam = _vec_const(lam, n_qubits, q, m)
            grads[layer, q, 1] = _im_inner_y(lam, ket, n_qubits, q)
            m = ry_matrix(-a2)
            ket = _vec_const(ket, n_qubits, q, m)
            lam = _vec_const(lam, n_qubits, q, m)
            grads[layer, q, 0] = _im_inner_z(lam, ket, n_qubits, q)
            m = rz_matrix(-a1)
            ket = _vec_const(ket, n_qubits, q, m)
            lam = _vec_const(lam, n_qubits, q, m)
    return grads


def gradient(
    x: np.ndarray,
    label: int,
    params: CircuitParams,
    cfg: SpikeConfig,
    n_classes: int,
    *,
    encoding_scale: str = "pi",
) -> np.ndarray:
    """Loss gradient for one sample via the two-point parameter-shift rule.

    The spike mask is frozen at the unshifted params: shifting an angle
    across the threshold never toggles a spike inside the difference.
    """
    _check_n_classes(n_classes, params.n_qubits)
    label = _check_label(label, n_classes)
    mask = compute_spike_mask(params, cfg)
    x_row = np.asarray(x, dtype=np.float64)[None, :]

    base, _ = forward_probs_batch(x_row, params, mask, n_classes, encoding_scale=encoding_scale)
    target = np.zeros(n_classes)
    target[label] = 1.0
    coeff = (2.0 / n_classes) * (base[0] - target)

    grads = np.zeros_like(params.angles)
    shifted = params.angles.copy()
    for layer in range(params.n_layers):
        for q in range(params.n_qubits):
            for k in range(3):
                original = shifted[layer, q, k]
                shifted[layer, q, k] = original + 0.5 * np.pi
                plus, _ = forward_probs_batch(
                    x_row, CircuitParams(shifted.copy()), mask, n_classes,
                    encoding_scale=encoding_scale,
                )
                shifted[layer, q, k] = original - 0.5 * np.pi
                minus, _ = forward_probs_batch(
                    x_row, CircuitParams(shifted.copy()), mask, n_classes,
                    encoding_scale=encoding_scale,
                )
                shifted[layer, q, k] = original
                grads[layer, q, k] = coeff @ (0.5 * (plus[0] - minus[0]))
    return grads
