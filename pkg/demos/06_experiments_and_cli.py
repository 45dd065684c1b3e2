"""
Experiments and the command line
================================

Everything the library does is also reachable through `flqdsnn <command>`.
This script drives the CLI entry point in-process with a scaled-down
setup so it finishes fast, then shows what landed on disk.

The equivalent shell commands:

    flqdsnn train --dataset iris --rounds 4 --local-iters 5 --seeds 2 --out demo_out
    flqdsnn sweep-threshold --taus 0.0,0.5,1.0 --seeds 1 --out demo_out
    flqdsnn ablation --seeds 2 --out demo_out

Scale presets: `--preset desk` (5 clients, 20 local iterations, 30
rounds, the default) or `--preset paper` (20 clients, 100 x 100; hours).
A flat `key = value` config file can hold any of the flags, and settings
resolve as defaults < config file < flags < FLQDSNN_SEED.
"""

import json
from pathlib import Path

from flqdsnn.cli import main

OUT = Path("demo_out")


def run(argv):
    print("$ flqdsnn " + " ".join(argv))
    code = main(argv)
    print(f"(exit {code})\n")


small = ["--rounds", "4", "--local-iters", "5", "--clients", "3"]

run(["train", "--dataset", "iris", *small, "--seeds", "2", "--out", str(OUT)])
run(["sweep-threshold", "--taus", "0.0,0.5,1.0", *small, "--seeds", "1",
     "--out", str(OUT)])
run(["ablation", *small, "--seeds", "2", "--out", str(OUT)])

# Every experiment writes tidy CSVs plus one JSON summary whose "config"
# block is the fully resolved settings snapshot.
print("files written:")
for path in sorted(OUT.iterdir()):
    print("  ", path)

summary = json.loads((OUT / "train_iris_summary.json").read_text())
print("\nresolved config snapshot (excerpt):")
for key in ("n_clients", "local_iters", "global_rounds", "learning_rate",
            "dirichlet_alpha", "tau_increment", "spiking_enabled"):
    print(f"  {key} = {summary['config'][key]}")
print("\nmedians:", summary["medians"])

# Errors come back as exit code 1 with a one-line message on stderr.
run(["train", "--dataset", "parity_bits"])
