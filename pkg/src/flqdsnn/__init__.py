"""Federated training of quantum spiking circuit classifiers.

A desk-scale statevector simulator drives a 4-qubit, 5-layer variational
circuit with a threshold-gated spiking mechanism; clients train locally
with Adam on an MSE loss and a server averages their angles each round.
"""

from .circuit import (
    CircuitParams,
    ForwardResult,
    SpikeConfig,
    SpikeMask,
    build_gate_sequence,
    compute_spike_mask,
    encode,
    forward,
    forward_probs_batch,
    forward_with_mask,
    gradient,
    loss,
    mean_loss_and_gradient,
)
from .datasets import (
    Dataset,
    PcaReducer,
    Scaler,
    apply_scale,
    fit_pca_reduce,
    fit_scale,
    fixture_path,
    load_builtin,
    load_builtin_iris,
    load_csv,
    preprocess_split,
    train_test_split,
)
from .errors import (
    ConfigurationError,
    FlqdsnnError,
    IngestionError,
    ReductionError,
    SplitError,
    TrainingError,
    UsageError,
    ValidationError,
)
from .experiments import (
    ExperimentConfig,
    ResultBundle,
    RunRecord,
    run_ablation,
    run_experiment,
    run_sweep_clients,
    run_sweep_threshold,
    run_train,
)
from .fedcore import (
    AdamState,
    ClientShard,
    FederationConfig,
    RoundLog,
    adam_step,
    aggregate,
    local_update,
    make_shards,
    partition_fingerprint,
    partition_non_iid,
    schedule_tau,
    train_federated,
)
from .metrics import ClassificationReport, evaluate
from .qsim import Gate, Statevector, apply_gate, expectation_z, init_zero, probabilities

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "CircuitParams",
    "ClassificationReport",
    "ClientShard",
    "ConfigurationError",
    "Dataset",
    "ExperimentConfig",
    "FederationConfig",
    "FlqdsnnError",
    "ForwardResult",
    "Gate",
    "IngestionError",
    "PcaReducer",
    "ReductionError",
    "ResultBundle",
    "RoundLog",
    "RunRecord",
    "Scaler",
    "SpikeConfig",
    "SpikeMask",
    "SplitError",
    "Statevector",
    "TrainingError",
    "UsageError",
    "ValidationError",
    "adam_step",
    "aggregate",
    "apply_gate",
    "apply_scale",
    "build_gate_sequence",
    "compute_spike_mask",
    "encode",
    "evaluate",
    "expectation_z",
    "fit_pca_reduce",
    "fit_scale",
    "fixture_path",
    "forward",
    "forward_probs_batch",
    "forward_with_mask",
    "gradient",
    "init_zero",
    "load_builtin",
    "load_builtin_iris",
    "load_csv",
    "local_update",
    "loss",
    "make_shards",
    "mean_loss_and_gradient",
    "metrics",
    "partition_fingerprint",
    "partition_non_iid",
    "preprocess_split",
    "probabilities",
    "run_ablation",
    "run_experiment",
    "run_sweep_clients",
    "run_sweep_threshold",
    "run_train",
    "schedule_tau",
    "train_federated",
    "train_test_split",
]
