"""Experiment runners: single training runs, sweeps, and the spiking ablation.

Each runner resolves one ExperimentConfig into a set of federated training
runs, writes plot-ready tidy CSVs plus one JSON summary, and returns the
collected results.  All output is a pure function of the config: reruns
with the same config reproduce every file byte for byte.

Seeding: the train/test split always uses the base seed; run i of `repeat`
uses base seed + i for partitioning and initialization.  The ablation runs
both arms under the same per-seed federation config (only spiking_enabled
differs), so the arms share shards by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .circuit import compute_spike_mask, forward_probs_batch, SpikeConfig
from .datasets import (
    BUILTIN_DATASETS,
    Dataset,
    load_builtin,
    load_csv,
    preprocess_split,
)
from .errors import ConfigurationError
from .fedcore import (
    FederationConfig,
    RoundLog,
    make_shards,
    partition_fingerprint,
    schedule_tau,
    train_federated,
)
from .metrics import ClassificationReport, evaluate

_KINDS = ("train", "sweep_clients", "sweep_threshold", "ablation")

DESK_FEDERATION = FederationConfig(n_clients=5, local_iters=20, global_rounds=30)
PAPER_PRESET = {"n_clients": 20, "local_iters": 100, "global_rounds": 100}


@dataclass(frozen=True)
class ExperimentConfig:
    """A FederationConfig plus experiment-level knobs (desk-scale defaults)."""

    federation: FederationConfig = DESK_FEDERATION
    dataset: str = "iris"
    kind: str = "train"
    client_list: tuple[int, ...] = (5, 10, 15, 20, 25)
    threshold_list: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    repeat: int = 5
    out_dir: str = "results"
    label_column: str = "label"
    csv_classes: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ConfigurationError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.repeat < 1:
            raise ConfigurationError(f"repeat must be >= 1, got {self.repeat}")
        if not (self.dataset in BUILTIN_DATASETS or self.dataset.startswith("csv:")):
            raise ConfigurationError(
                f"dataset must be one of {sorted(BUILTIN_DATASETS)} or csv:<path>, "
                f"got {self.dataset!r}"
            )
        if self.kind == "sweep_clients" and not self.client_list:
            raise ConfigurationError("sweep_clients needs a non-empty client list")
        if self.kind == "sweep_threshold":
            if not self.threshold_list:
                raise ConfigurationError("sweep_threshold needs a non-empty threshold list")
            bad = [t for t in self.threshold_list if not 0.0 <= t <= 1.0]
            if bad:
                raise ConfigurationError(f"thresholds outside [0, 1]: {bad}")

    def snapshot(self) -> dict:
        """Flat resolved-config view with every default spelled out."""
        out: dict = {}
        for f in fields(self.federation):
            out[f.name] = getattr(self.federation, f.name)
        out.update(
            dataset=self.dataset,
            kind=self.kind,
            client_list=list(self.client_list),
            threshold_list=list(self.threshold_list),
            repeat=self.repeat,
            out_dir=self.out_dir,
            label_column=self.label_column,
            csv_classes=self.csv_classes,
        )
        return out


@dataclass
class RunRecord:
    """One completed federated run inside an experiment."""

    seed: int
    variant: dict
    logs: list[RoundLog]
    report: ClassificationReport
    partition_hash: str = ""


@dataclass
class ResultBundle:
    """Everything an experiment produced, plus where it was written."""

    config: dict
    runs: list[RunRecord]
    medians: dict[str, float]
    files: list[str] = field(default_factory=list)


def _dataset_slug(selector: str) -> str:
    if selector.startswith("csv:"):
        return Path(selector[4:]).stem or "csv"
    return selector


def _load_selected(cfg: ExperimentConfig) -> Dataset:
    if cfg.dataset in BUILTIN_DATASETS:
        return load_builtin(cfg.dataset)
    path = cfg.dataset[4:]
    if cfg.csv_classes is None:
        raise ConfigurationError(
            "csv:<path> datasets need csv_classes (the number of label classes)"
        )
    return load_csv(path, label_column=cfg.label_column, n_classes=cfg.csv_classes)


def _final_report(
    test: Dataset, params, fed: FederationConfig, logs: list[RoundLog]
) -> ClassificationReport:
    tau = logs[-1].tau if logs else schedule_tau(0, fed)
    spike = SpikeConfig(enabled=fed.spiking_enabled, threshold=tau, mode=fed.spiking_mode)
    probs, _ = forward_probs_batch(test.features, params, compute_spike_mask(params, spike),
                                   test.n_classes)
    return evaluate(probs, test.labels)


def _run_one(
    raw: Dataset, fed: FederationConfig, seed: int, variant: dict
) -> RunRecord:
    """One fully independent replicate: the seed drives the train/test split
    as well as the partition, init, and schedule, so repeat medians measure
    the whole pipeline.  Runs sharing a seed (ablation arms, sweep points)
    share the split and the shards."""
    fed = replace(fed, seed=seed)
    train, test = preprocess_split(raw, seed=seed)
    params, logs = train_federated((train, test), fed)
    report = _final_report(test, params, fed, logs)
    shards = make_shards(train.features, train.labels, fed)
    return RunRecord(
        seed=seed,
        variant=variant,
        logs=logs,
        report=report,
        partition_hash=partition_fingerprint(shards),
    )


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_cell(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _summary_payload(cfg: ExperimentConfig, runs: list[RunRecord], medians: dict) -> dict:
    return {
        "config": cfg.snapshot(),
        "runs": [
            {
                "seed": run.seed,
                "variant": run.variant,
                "rounds": len(run.logs),
                "final_accuracy": run.report.accuracy,
                "final_loss": run.report.mse,
                "partition_hash": run.partition_hash,
                "report": run.report.to_flat_dict(),
            }
            for run in runs
        ],
        "medians": medians,
    }


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seeds(cfg: ExperimentConfig) -> list[int]:
    return [cfg.federation.seed + i for i in range(cfg.repeat)]


def run_train(cfg: ExperimentConfig) -> ResultBundle:
    """Train `repeat` times; emit one round-series CSV per seed + a summary."""
    raw = _load_selected(cfg)
    out = _out_dir(cfg)
    slug = _dataset_slug(cfg.dataset)
    runs, files = [], []
    for seed in _seeds(cfg):
        run = _run_one(raw, cfg.federation, seed, variant={})
        runs.append(run)
        series = out / f"train_{slug}_seed{seed}.csv"
        _write_csv(
            series,
            ["round", "accuracy", "loss", "tau"],
            [(log.round, log.global_accuracy, log.global_loss, log.tau) for log in run.logs],
        )
        files.append(str(series))
    medians = {
        "final_accuracy": float(np.median([r.report.accuracy for r in runs])),
        "final_loss": float(np.median([r.report.mse for r in runs])),
    }
    summary = out / f"train_{slug}_summary.json"
    _write_json(summary, _summary_payload(cfg, runs, medians))
    files.append(str(summary))
    return ResultBundle(cfg.snapshot(), runs, medians, files)


def run_sweep_clients(cfg: ExperimentConfig) -> ResultBundle:
    """One run per (client count x seed); tidy CSV (clients, seed, final_accuracy)."""
    raw = _load_selected(cfg)
    out = _out_dir(cfg)
    slug = _dataset_slug(cfg.dataset)
    runs, rows = [], []
    for count in cfg.client_list:
        fed = replace(cfg.federation, n_clients=count)
        for seed in _seeds(cfg):
            run = _run_one(raw, fed, seed, variant={"clients": count})
            runs.append(run)
            rows.append((count, seed, run.report.accuracy))
    medians = {
        f"final_accuracy_clients_{count}": float(
            np.median([r.report.accuracy for r in runs if r.variant["clients"] == count])
        )
        for count in cfg.client_list
    }
    table = out / f"sweep_clients_{slug}.csv"
    _write_csv(table, ["clients", "seed", "final_accuracy"], rows)
    summary = out / f"sweep_clients_{slug}_summary.json"
    _write_json(summary, _summary_payload(cfg, runs, medians))
    return ResultBundle(cfg.snapshot(), runs, medians, [str(table), str(summary)])


def run_sweep_threshold(cfg: ExperimentConfig) -> ResultBundle:
    """One run per (fixed tau x seed); tidy CSV (tau, seed, final_accuracy)."""
    bad = [t for t in cfg.threshold_list if not 0.0 <= t <= 1.0]
    if bad:
        raise ConfigurationError(f"thresholds outside [0, 1]: {bad}")
    raw = _load_selected(cfg)
    out = _out_dir(cfg)
    slug = _dataset_slug(cfg.dataset)
    runs, rows = [], []
    for tau in cfg.threshold_list:
        fed = replace(cfg.federation, tau_fixed=float(tau), spiking_enabled=True)
        for seed in _seeds(cfg):
            run = _run_one(raw, fed, seed, variant={"tau": float(tau)})
            runs.append(run)
            rows.append((float(tau), seed, run.report.accuracy))
    medians = {
        f"final_accuracy_tau_{tau!r}": float(
            np.median([r.report.accuracy for r in runs if r.variant["tau"] == float(tau)])
        )
        for tau in cfg.threshold_list
    }
    table = out / f"sweep_threshold_{slug}.csv"
    _write_csv(table, ["tau", "seed", "final_accuracy"], rows)
    summary = out / f"sweep_threshold_{slug}_summary.json"
    _write_json(summary, _summary_payload(cfg, runs, medians))
    return ResultBundle(cfg.snapshot(), runs, medians, [str(table), str(summary)])


def run_ablation(cfg: ExperimentConfig) -> ResultBundle:
    """Paired spiking on/off runs per seed, sharing shards; reports the gap."""
    raw = _load_selected(cfg)
    out = _out_dir(cfg)
    slug = _dataset_slug(cfg.dataset)
    runs, rows, pairs = [], [], []
    for seed in _seeds(cfg):
        arm_runs = {}
        for arm, enabled in (("on", True), ("off", False)):
            fed = replace(cfg.federation, spiking_enabled=enabled)
            run = _run_one(raw, fed, seed, variant={"spiking": arm})
            arm_runs[arm] = run
            runs.append(run)
            rows.append((seed, arm, run.report.accuracy, run.partition_hash))
        gap = arm_runs["on"].report.accuracy - arm_runs["off"].report.accuracy
        pairs.append(
            {
                "seed": seed,
                "on_accuracy": arm_runs["on"].report.accuracy,
                "off_accuracy": arm_runs["off"].report.accuracy,
                "gap": gap,
                "partition_hash": arm_runs["on"].partition_hash,
            }
        )
    on_median = float(np.median([p["on_accuracy"] for p in pairs]))
    off_median = float(np.median([p["off_accuracy"] for p in pairs]))
    medians = {
        "final_accuracy_on": on_median,
        "final_accuracy_off": off_median,
        "accuracy_gap": on_median - off_median,
    }
    table = out / f"ablation_{slug}.csv"
    _write_csv(table, ["seed", "arm", "final_accuracy", "partition_hash"], rows)
    payload = _summary_payload(cfg, runs, medians)
    payload["pairs"] = pairs
    summary = out / f"ablation_{slug}_summary.json"
    _write_json(summary, payload)
    return ResultBundle(cfg.snapshot(), runs, medians, [str(table), str(summary)])


RUNNERS = {
    "train": run_train,
    "sweep_clients": run_sweep_clients,
    "sweep_threshold": run_sweep_threshold,
    "ablation": run_ablation,
}


def run_experiment(cfg: ExperimentConfig) -> ResultBundle:
    """Dispatch on cfg.kind."""
    return RUNNERS[cfg.kind](cfg)
