"""Command-line experiment runner.

Subcommands: train, sweep-clients, sweep-threshold, ablation.  Settings
resolve as defaults < config file < command-line flags, and the
FLQDSNN_SEED environment variable overrides the base seed last.  A config
file is flat `key = value` text using the same keys as the long flags
(dashes become underscores), plus `seed`.  Exit status 0 means every
requested run completed and was written.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import ConfigurationError, FlqdsnnError
from .experiments import (
    ExperimentConfig,
    PAPER_PRESET,
    run_experiment,
)
from .fedcore import FederationConfig

_COMMAND_KINDS = {
    "train": "train",
    "sweep-clients": "sweep_clients",
    "sweep-threshold": "sweep_threshold",
    "ablation": "ablation",
}

_DESK_PRESET = {"n_clients": 5, "local_iters": 20, "global_rounds": 30}

_DEFAULTS: dict = {
    "n_clients": 5,
    "local_iters": 20,
    "global_rounds": 30,
    "learning_rate": 0.05,
    "dirichlet_alpha": 0.5,
    "seed": 0,
    "tau_initial": 0.0,
    "tau_increment": 0.05,
    "tau_max": 1.0,
    "tau_fixed": None,
    "spiking_enabled": True,
    "spiking_mode": "final_layer",
    "tau_tick": "global",
    "local_mode": "full_batch",
    "dataset": "iris",
    "client_list": (5, 10, 15, 20, 25),
    "threshold_list": (0.0, 0.25, 0.5, 0.75, 1.0),
    "repeat": 5,
    "out_dir": "results",
    "label_column": "label",
    "csv_classes": None,
}

# config-file value parsers, keyed by the file/flag vocabulary
_FILE_PARSERS = {
    "dataset": str,
    "clients": str,
    "rounds": int,
    "local_iters": int,
    "lr": float,
    "alpha": float,
    "tau_init": float,
    "tau_inc": float,
    "tau_fixed": float,
    "spiking": str,
    "spike_mode": str,
    "seeds": int,
    "preset": str,
    "out": str,
    "seed": int,
    "taus": str,
    "label_column": str,
    "csv_classes": int,
    "tau_tick": str,
    "local_mode": str,
}


def _parse_int_list(raw: str, key: str) -> tuple[int, ...]:
    try:
        return tuple(int(part.strip()) for part in str(raw).split(",") if part.strip())
    except ValueError:
        raise ConfigurationError(f"{key} must be comma-separated integers, got {raw!r}") from None


def _parse_float_list(raw: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(part.strip()) for part in str(raw).split(",") if part.strip())
    except ValueError:
        raise ConfigurationError(f"{key} must be comma-separated numbers, got {raw!r}") from None


def _apply_settings(values: dict, items: dict, kind: str) -> None:
    """Fold one precedence layer in; a preset expands before its siblings."""
    items = dict(items)
    preset = items.pop("preset", None)
    if preset is not None:
        if preset == "paper":
            values.update(PAPER_PRESET)
        elif preset == "desk":
            values.update(_DESK_PRESET)
        else:
            raise ConfigurationError(f"preset must be 'paper' or 'desk', got {preset!r}")
    for key, raw in items.items():
        if key == "clients":
            counts = _parse_int_list(raw, "clients")
            if kind == "sweep_clients":
                values["client_list"] = counts
            elif len(counts) == 1:
                values["n_clients"] = counts[0]
            else:
                raise ConfigurationError(
                    f"--clients takes one integer for {kind}, got {raw!r}"
                )
        elif key == "taus":
            values["threshold_list"] = _parse_float_list(raw, "taus")
        elif key == "spiking":
            if raw not in ("on", "off"):
                raise ConfigurationError(f"spiking must be 'on' or 'off', got {raw!r}")
            values["spiking_enabled"] = raw == "on"
        elif key == "spike_mode":
            mapped = {"final": "final_layer", "final_layer": "final_layer",
                      "per-layer": "per_layer", "per_layer": "per_layer"}.get(str(raw))
            if mapped is None:
                raise ConfigurationError(f"spike_mode must be 'final' or 'per-layer', got {raw!r}")
            values["spiking_mode"] = mapped
        elif key == "local_mode":
            mapped = {"full-batch": "full_batch", "full_batch": "full_batch",
                      "per-sample": "per_sample", "per_sample": "per_sample"}.get(str(raw))
            if mapped is None:
                raise ConfigurationError(
                    f"local_mode must be 'full-batch' or 'per-sample', got {raw!r}"
                )
            values["local_mode"] = mapped
        elif key == "rounds":
            values["global_rounds"] = raw
        elif key == "lr":
            values["learning_rate"] = raw
        elif key == "alpha":
            values["dirichlet_alpha"] = raw
        elif key == "tau_init":
            values["tau_initial"] = raw
        elif key == "tau_inc":
            values["tau_increment"] = raw
        elif key == "seeds":
            values["repeat"] = raw
        elif key == "out":
            values["out_dir"] = raw
        elif key in ("local_iters", "tau_fixed", "dataset", "seed",
                     "label_column", "csv_classes", "tau_tick"):
            values[key] = raw
        else:
            raise ConfigurationError(f"unknown setting {key!r}")


def parse_config_file(path: str | Path) -> dict:
    """Read flat `key = value` text; '#' starts a comment, blank lines skipped."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"no such config file: {path}")
    items: dict = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigurationError(f"{path} line {lineno}: expected 'key = value'")
        key, _, raw = text.partition("=")
        key = key.strip().replace("-", "_")
        raw = raw.strip()
        parser = _FILE_PARSERS.get(key)
        if parser is None:
            raise ConfigurationError(f"{path} line {lineno}: unknown key {key!r}")
        try:
            items[key] = parser(raw)
        except ValueError:
            raise ConfigurationError(
                f"{path} line {lineno}: bad value {raw!r} for {key!r}"
            ) from None
    return items


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flqdsnn",
        description="Federated quantum spiking circuit experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in _COMMAND_KINDS:
        p = sub.add_parser(command, help=f"run the {command} experiment")
        p.add_argument("--dataset", help="iris | digits | breast_cancer | csv:<path>")
        p.add_argument("--clients", help="client count (comma list for sweep-clients)")
        p.add_argument("--rounds", type=int, help="global rounds")
        p.add_argument("--local-iters", type=int, dest="local_iters", help="local iterations")
        p.add_argument("--lr", type=float, help="Adam learning rate")
        p.add_argument("--alpha", type=float, help="Dirichlet concentration")
        p.add_argument("--tau-init", type=float, dest="tau_init", help="initial threshold")
        p.add_argument("--tau-inc", type=float, dest="tau_inc", help="threshold increment per round")
        p.add_argument("--tau-fixed", type=float, dest="tau_fixed",
                       help="pin the threshold (disables the schedule)")
        p.add_argument("--spiking", choices=("on", "off"), help="spiking mechanism switch")
        p.add_argument("--spike-mode", choices=("final", "per-layer"), dest="spike_mode",
                       help="where spikes are checked and applied")
        p.add_argument("--seeds", type=int, help="number of repeat seeds")
        p.add_argument("--preset", choices=("desk", "paper"), help="scale preset")
        p.add_argument("--config", help="flat key = value settings file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--taus", help="comma list of fixed thresholds (sweep-threshold)")
        p.add_argument("--label-column", dest="label_column", help="label column for csv datasets")
        p.add_argument("--csv-classes", type=int, dest="csv_classes",
                       help="class count for csv datasets")
        p.add_argument("--tau-tick", choices=("global", "local"), dest="tau_tick",
                       help="advance tau per round or per local iteration")
        p.add_argument("--local-mode", choices=("full-batch", "per-sample"), dest="local_mode",
                       help="local gradient granularity")
    return parser


_FLAG_KEYS = (
    "dataset", "clients", "rounds", "local_iters", "lr", "alpha", "tau_init",
    "tau_inc", "tau_fixed", "spiking", "spike_mode", "seeds", "preset", "out",
    "taus", "label_column", "csv_classes", "tau_tick", "local_mode",
)


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Fold defaults, config file, flags, and the seed env var into a config."""
    kind = _COMMAND_KINDS[args.command]
    values = dict(_DEFAULTS)
    if args.config:
        _apply_settings(values, parse_config_file(args.config), kind)
    flag_items = {
        key: getattr(args, key) for key in _FLAG_KEYS if getattr(args, key) is not None
    }
    _apply_settings(values, flag_items, kind)
    env_seed = os.environ.get("FLQDSNN_SEED")
    if env_seed is not None:
        try:
            values["seed"] = int(env_seed)
        except ValueError:
            raise ConfigurationError(
                f"FLQDSNN_SEED must be an integer, got {env_seed!r}"
            ) from None

    federation = FederationConfig(
        n_clients=values["n_clients"],
        local_iters=values["local_iters"],
        global_rounds=values["global_rounds"],
        learning_rate=values["learning_rate"],
        dirichlet_alpha=values["dirichlet_alpha"],
        seed=values["seed"],
        tau_initial=values["tau_initial"],
        tau_increment=values["tau_increment"],
        tau_max=values["tau_max"],
        tau_fixed=values["tau_fixed"],
        spiking_enabled=values["spiking_enabled"],
        spiking_mode=values["spiking_mode"],
        tau_tick=values["tau_tick"],
        local_mode=values["local_mode"],
    )
    return ExperimentConfig(
        federation=federation,
        dataset=values["dataset"],
        kind=kind,
        client_list=tuple(values["client_list"]),
        threshold_list=tuple(values["threshold_list"]),
        repeat=values["repeat"],
        out_dir=values["out_dir"],
        label_column=values["label_column"],
        csv_classes=values["csv_classes"],
    )


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        bundle = run_experiment(cfg)
    except FlqdsnnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in bundle.files:
        print(path)
    for key in sorted(bundle.medians):
        print(f"{key} = {bundle.medians[key]!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
