#!/usr/bin/env python3
"""Boot a complete local deployment and run one experiment.

Starts the four reference recommenders and the evaluator on ephemeral
ports, registers a dataset (a real MovieLens 100K u.data file if given,
otherwise the bundled synthetic clone), submits an experiment, and prints
the per-recommender metric table.

Example:
    python scripts/run_local_experiment.py --seed 7 --k 10 --threshold 3
    python scripts/run_local_experiment.py --ml100k /data/ml-100k/u.data
"""

import argparse
import tempfile
import time
from pathlib import Path

import requests

from reclab.cli import _metrics_table
from reclab.config import EvaluatorConfig
from reclab.datasets import DatasetDescriptor
from reclab.domain import ExperimentConfig
from reclab.orchestrator import EvaluatorServer, Registry
from reclab.recommenders import KINDS, serve
from reclab.synthetic import synthetic_ratings, write_movielens_100k


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--ml100k", help="path to a real u.data file")
    parser.add_argument("--split", choices=("random", "timestamp"), default="random")
    parser.add_argument("--test", type=float, default=0.2)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--threshold", type=float, default=3.0)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    workdir = Path(tempfile.mkdtemp(prefix="reclab-demo-"))
    if args.ml100k:
        dataset = DatasetDescriptor(id="ml100k", format="movielens_100k", path=args.ml100k)
    else:
        path = write_movielens_100k(workdir / "u.data", synthetic_ratings())
        dataset = DatasetDescriptor(id="ml100k", format="movielens_100k", path=str(path))

    servers = {kind: serve(kind, seed=args.seed) for kind in KINDS}
    registry = Registry(
        datasets={"ml100k": dataset},
        recommenders={kind: server.base_uri for kind, server in servers.items()},
    )
    evaluator = EvaluatorServer(
        EvaluatorConfig(port=0, data_dir=str(workdir / "store"), poll_interval=0.1),
        registry=registry,
    ).start()
    print(f"evaluator: {evaluator.base_uri}")
    for kind, server in servers.items():
        print(f"  {kind}: {server.base_uri}")

    config = ExperimentConfig(
        dataset_id="ml100k",
        split_method=args.split,
        test_fraction=args.test,
        k=args.k,
        rating_threshold=args.threshold,
        recommender_ids=tuple(KINDS),
        seed=args.seed,
    )
    resp = requests.post(f"{evaluator.base_uri}/experiments", json=config.to_dict(), timeout=30)
    resp.raise_for_status()
    experiment_id = resp.json()["id"]
    print(f"experiment {experiment_id} submitted; waiting...")

    while True:
        record = requests.get(
            f"{evaluator.base_uri}/experiments/{experiment_id}", timeout=30
        ).json()
        if record["status"] in ("done", "failed"):
            break
        time.sleep(0.3)

    if record["status"] == "failed":
        print(f"experiment failed: {record['failure_detail']}")
    else:
        per_recommender = record["per_recommender"]
        rows = [
            (rid, per_recommender[rid]["metrics"], per_recommender[rid]["detail"])
            for rid in record["config"]["recommender_ids"]
        ]
        print(_metrics_table(rows))
        sizes = record["realized_split_sizes"]
        print(f"\ntrain={sizes['train']} test={sizes['test']} record={workdir}/store/{experiment_id}.json")

    for server in servers.values():
        server.stop()
    evaluator.stop()


if __name__ == "__main__":
    main()
