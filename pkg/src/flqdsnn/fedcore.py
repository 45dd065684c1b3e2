"""Simulated federation: non-IID partitioning, local Adam training, averaging.

One global round = broadcast the global angles, run every client's local
update on its own shard, average the returned angle tensors elementwise,
then score the aggregate on the held-out test split.  The spike threshold
follows the linear schedule tau = min(tau_initial + tau_increment * round,
tau_max) unless tau_fixed pins it.

Clients are independent within a round (private params copy, private shard,
fresh Adam state) so serial and parallel execution agree; the loop below is
serial.  Randomness is consumed only when partitioning shards and when
drawing the initial angles, both from generators derived from cfg.seed, so
identical configs give bit-identical logs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    CircuitParams,
    SpikeConfig,
    compute_spike_mask,
    forward_probs_batch,
    mean_loss_and_gradient,
)
from .errors import ConfigurationError, TrainingError, UsageError
from .metrics import evaluate

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

_TAU_TICKS = ("global", "local")
_LOCAL_MODES = ("full_batch", "per_sample")


@dataclass
class ClientShard:
    """One client's private slice of the training data."""

    features: np.ndarray
    labels: np.ndarray
    client_id: int

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise UsageError(
                f"features {self.features.shape} and labels {self.labels.shape} disagree"
            )
        if self.features.shape[0] < 1:
            raise UsageError("shard must hold at least one sample")


@dataclass(frozen=True)
class FederationConfig:
    """Everything the federated trainer needs besides the data itself."""

    n_clients: int = 20
    local_iters: int = 100
    global_rounds: int = 100
    learning_rate: float = 0.05
    dirichlet_alpha: float = 0.5
    seed: int = 0
    tau_initial: float = 0.0
    tau_increment: float = 0.05
    tau_max: float = 1.0
    tau_fixed: float | None = None
    spiking_enabled: bool = True
    spiking_mode: str = "final_layer"
    # "global": tau advances once per round; "local": once per local iteration
    tau_tick: str = "global"
    # "full_batch": one mean-gradient Adam step per local iteration;
    # "per_sample": one Adam step per sample per iteration, in shard order
    local_mode: str = "full_batch"

    def __post_init__(self) -> None:
        if self.n_clients < 1:
            raise ConfigurationError(f"n_clients must be >= 1, got {self.n_clients}")
        if self.local_iters < 1:
            raise ConfigurationError(f"local_iters must be >= 1, got {self.local_iters}")
        if self.global_rounds < 0:
            raise ConfigurationError(f"global_rounds must be >= 0, got {self.global_rounds}")
        if self.learning_rate <= 0:
            raise ConfigurationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.dirichlet_alpha <= 0:
            raise ConfigurationError(f"dirichlet_alpha must be > 0, got {self.dirichlet_alpha}")
        for name in ("tau_initial", "tau_increment", "tau_max"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ConfigurationError(f"{name} must be >= 0, got {value}")
        if not self.tau_initial <= self.tau_max <= 1.0:
            raise ConfigurationError(
                f"need tau_initial <= tau_max <= 1, got {self.tau_initial}, {self.tau_max}"
            )
        if self.tau_fixed is not None and not 0.0 <= self.tau_fixed <= 1.0:
            raise ConfigurationError(f"tau_fixed must lie in [0, 1], got {self.tau_fixed}")
        if self.spiking_mode not in ("final_layer", "per_layer"):
            raise ConfigurationError(f"unknown spiking_mode {self.spiking_mode!r}")
        if self.tau_tick not in _TAU_TICKS:
            raise ConfigurationError(f"tau_tick must be one of {_TAU_TICKS}")
        if self.local_mode not in _LOCAL_MODES:
            raise ConfigurationError(f"local_mode must be one of {_LOCAL_MODES}")


@dataclass
class AdamState:
    """First/second moment estimates plus the step counter."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, shape: tuple[int, ...]) -> "AdamState":
        return cls(m=np.zeros(shape), v=np.zeros(shape), t=0)


@dataclass
class RoundLog:
    round: int
    global_accuracy: float
    global_loss: float
    tau: float
    per_client_loss: list[float] = field(default_factory=list)


def partition_non_iid(
    features: np.ndarray,
    labels: np.ndarray,
    n_clients: int,
    dirichlet_alpha: float,
    seed: int,
) -> list[ClientShard]:
    """Split samples across clients with per-class Dirichlet(alpha) proportions.

    Every sample is assigned exactly once and every shard ends up non-empty:
    when the draw leaves a client empty, one sample is moved from the largest
    shard, deterministically under the seed.  Shard rows keep ascending
    original order.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n_samples = features.shape[0]
    if labels.shape[0] != n_samples:
        raise UsageError("features and labels lengths differ")
    if n_clients < 1:
        raise ConfigurationError(f"n_clients must be >= 1, got {n_clients}")
    if n_clients > n_samples:
        raise ConfigurationError(
            f"cannot give {n_clients} clients at least one of {n_samples} samples"
        )
    if dirichlet_alpha <= 0:
        raise ConfigurationError(f"dirichlet_alpha must be > 0, got {dirichlet_alpha}")

    rng = np.random.default_rng(seed)
    assigned: list[list[int]] = [[] for _ in range(n_clients)]
    for cls_value in np.unique(labels):
        idx = np.where(labels == cls_value)[0]
        idx = rng.permutation(idx)
        proportions = rng.dirichlet([dirichlet_alpha] * n_clients)
        counts = np.floor(proportions * idx.size).astype(int)
        # hand the rounding remainder to the largest fractional parts
        remainder = idx.size - counts.sum()
        order = np.argsort(-(proportions * idx.size - counts), kind="stable")
        counts[order[:remainder]] += 1
        stops = np.cumsum(counts)
        start = 0
        for client, stop in enumerate(stops):
            assigned[client].extend(idx[start:stop].tolist())
            start = stop

    # deterministic repair: feed empty shards from the currently largest one
    for client in range(n_clients):
        while not assigned[client]:
            donor = max(range(n_clients), key=lambda c: (len(assigned[c]), -c))
            if len(assigned[donor]) <= 1:
                raise ConfigurationError("cannot repair partition; too few samples")
            assigned[client].append(assigned[donor].pop())

    shards = []
    for client in range(n_clients):
        rows = np.sort(np.asarray(assigned[client], dtype=np.int64))
        shards.append(ClientShard(features[rows], labels[rows], client_id=client))
    return shards


def partition_fingerprint(shards: list[ClientShard]) -> str:
    """Stable hash of a partition, for pairing runs that share shards."""
    digest = hashlib.sha256()
    for shard in shards:
        digest.update(np.int64(shard.client_id).tobytes())
        digest.update(np.int64(shard.labels.size).tobytes())
        digest.update(shard.labels.tobytes())
        digest.update(shard.features.tobytes())
    return digest.hexdigest()


def adam_step(
    params: np.ndarray,
    grads: np.ndarray,
    state: AdamState,
    lr: float,
) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update on a raw angle tensor."""
    grads = np.asarray(grads, dtype=np.float64)
    if grads.shape != params.shape:
        raise UsageError(f"grads shape {grads.shape} != params shape {params.shape}")
    if not np.all(np.isfinite(grads)):
        raise TrainingError("non-finite gradient; aborting the round")
    t = state.t + 1
    m = ADAM_BETA1 * state.m + (1.0 - ADAM_BETA1) * grads
    v = ADAM_BETA2 * state.v + (1.0 - ADAM_BETA2) * grads**2
    m_hat = m / (1.0 - ADAM_BETA1**t)
    v_hat = v / (1.0 - ADAM_BETA2**t)
    new_params = params - lr * m_hat / (np.sqrt(v_hat) + ADAM_EPSILON)
    return new_params, AdamState(m=m, v=v, t=t)


def local_update(
    shard: ClientShard,
    params: CircuitParams,
    cfg: SpikeConfig,
    local_iters: int,
    lr: float,
    *,
    n_classes: int,
    local_mode: str = "full_batch",
    thresholds: np.ndarray | None = None,
) -> tuple[CircuitParams, float]:
    """Train one client for local_iters iterations with a fresh Adam state.

    full_batch mode takes one Adam step per iteration on the shard's mean
    gradient; per_sample mode steps once per sample, in shard order.  The
    returned loss is the shard mean loss at the returned params.  When
    `thresholds` is given it supplies the spike threshold per iteration
    (the tau_tick="local" schedule); otherwise cfg.threshold holds.
    """
    if local_iters < 0:
        raise UsageError(f"local_iters must be >= 0, got {local_iters}")
    if thresholds is not None and len(thresholds) != local_iters:
        raise UsageError("per-iteration thresholds must match local_iters")
    angles = params.angles.copy()
    state = AdamState.zeros(angles.shape)
    for it in range(local_iters):
        spike = cfg if thresholds is None else SpikeConfig(
            enabled=cfg.enabled, threshold=float(thresholds[it]), mode=cfg.mode
        )
        if local_mode == "full_batch":
            _, grads = mean_loss_and_gradient(
                shard.features, shard.labels, CircuitParams(angles), spike, n_classes
            )
            angles, state = adam_step(angles, grads, state, lr)
        elif local_mode == "per_sample":
            for row in range(shard.features.shape[0]):
                _, grads = mean_loss_and_gradient(
                    shard.features[row : row + 1],
                    shard.labels[row : row + 1],
                    CircuitParams(angles),
                    spike,
                    n_classes,
                )
                angles, state = adam_step(angles, grads, state, lr)
        else:
            raise ConfigurationError(f"unknown local_mode {local_mode!r}")

    final_params = CircuitParams(angles)
    final_spike = cfg if thresholds is None or local_iters == 0 else SpikeConfig(
        enabled=cfg.enabled, threshold=float(thresholds[-1]), mode=cfg.mode
    )
    mask = compute_spike_mask(final_params, final_spike)
    class_probs, _ = forward_probs_batch(shard.features, final_params, mask, n_classes)
    targets = np.zeros_like(class_probs)
    targets[np.arange(shard.labels.size), shard.labels] = 1.0
    final_loss = float(np.mean((targets - class_probs) ** 2))
    return final_params, final_loss


def aggregate(client_params: list[CircuitParams]) -> CircuitParams:
    """Elementwise mean of the clients' angle tensors."""
    if not client_params:
        raise UsageError("cannot aggregate an empty client list")
    shapes = {p.angles.shape for p in client_params}
    if len(shapes) != 1:
        raise UsageError(f"client params shapes differ: {sorted(shapes)}")
    stacked = np.stack([p.angles for p in client_params])
    return CircuitParams(np.mean(stacked, axis=0))


def _tau_at_tick(tick: int, cfg: FederationConfig) -> float:
    if cfg.tau_fixed is not None:
        return cfg.tau_fixed
    return min(cfg.tau_initial + cfg.tau_increment * tick, cfg.tau_max)


def schedule_tau(round_index: int, cfg: FederationConfig) -> float:
    """Threshold for a global round: fixed override or the clamped linear ramp."""
    if round_index < 0:
        raise UsageError(f"round must be >= 0, got {round_index}")
    return _tau_at_tick(round_index, cfg)


def make_shards(
    features: np.ndarray, labels: np.ndarray, cfg: FederationConfig
) -> list[ClientShard]:
    """The partition train_federated uses, exposed so runs can be paired."""
    return partition_non_iid(features, labels, cfg.n_clients, cfg.dirichlet_alpha, cfg.seed)


def train_federated(dataset, cfg: FederationConfig) -> tuple[CircuitParams, list[RoundLog]]:
    """Full federated training; `dataset` is a (train, test) Dataset pair.

    Each round: schedule tau, broadcast the global angles, run every client's
    local update, average, then log accuracy and one-hot MSE on the test
    split under the round's tau.  Returns the final global params and the
    per-round log.
    """
    train, test = dataset
    n_classes = train.n_classes
    shards = make_shards(train.features, train.labels, cfg)

    init_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    params = CircuitParams.random(init_rng)
    logs: list[RoundLog] = []

    for round_index in range(cfg.global_rounds):
        if cfg.tau_tick == "global":
            tau = schedule_tau(round_index, cfg)
        else:
            # local ticks: log/evaluate with the round's first iteration tau
            tau = _tau_at_tick(round_index * cfg.local_iters, cfg)
        spike = SpikeConfig(enabled=cfg.spiking_enabled, threshold=tau, mode=cfg.spiking_mode)
        thresholds = None
        if cfg.tau_tick == "local":
            base = round_index * cfg.local_iters
            thresholds = np.array(
                [_tau_at_tick(base + it, cfg) for it in range(cfg.local_iters)]
            )

        client_params: list[CircuitParams] = []
        client_losses: list[float] = []
        for shard in shards:
            updated, last_loss = local_update(
                shard,
                params,
                spike,
                cfg.local_iters,
                cfg.learning_rate,
                n_classes=n_classes,
                local_mode=cfg.local_mode,
                thresholds=thresholds,
            )
            client_params.append(updated)
            client_losses.append(last_loss)

        params = aggregate(client_params)
        mask = compute_spike_mask(params, spike)
        probs, _ = forward_probs_batch(test.features, params, mask, n_classes)
        report = evaluate(probs, test.labels)
        logs.append(
            RoundLog(
                round=round_index,
                global_accuracy=report.accuracy,
                global_loss=report.mse,
                tau=tau,
                per_client_loss=client_losses,
            )
        )
    return params, logs
