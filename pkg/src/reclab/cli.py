"""Headless operation of the full pipeline.

Subcommands::

    reclab serve --config reclab.toml          # run the evaluator API
    reclab recommender --kind most-popular --port 7002
    reclab run --dataset ml100k --split random --test 0.2 --k 10 \
               --threshold 3 --rec random,most-popular --seed 7
    reclab eval-offline --train t.csv --test e.csv --recs r.csv --k 10 --threshold 3
    reclab export --all out/

Every command is non-interactive and exits with a documented code:
0 success, 1 runtime failure, 2 usage or configuration error,
3 environment error (port taken, evaluator unreachable). ``--format
json-lines`` switches output to one JSON object per line. The ``RECLAB_API``
environment variable supplies the default evaluator address.
"""

from __future__ import annotations

import argparse
import csv
import errno
import json
import logging
import os
import sys
import time
from pathlib import Path

import requests

from .config import ConfigError, load_config
from .datasets import DatasetError
from .domain import METRIC_COLUMNS, ExperimentConfig, Rating, RatingSet, validate_config
from .metrics import build_context, evaluate_all
from .orchestrator import EvaluatorServer
from .protocol import RawRecommendation, RecommendRequest, RecommendResponse, sanitize_recommendations
from .recommenders import KINDS, RecommenderService

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_ENVIRONMENT = 3

DEFAULT_API = "http://127.0.0.1:7000"


def _api_default() -> str:
    return os.environ.get("RECLAB_API", DEFAULT_API)


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _emit(payload: dict, as_json: bool, text: str | None = None) -> None:
    if as_json:
        print(json.dumps(payload))
    elif text is not None:
        print(text)


def _metrics_table(rows: list[tuple[str, dict | None, str | None]]) -> str:
    """One row per recommender, seven metric columns in report order."""
    headers = ["recommender"] + [c.capitalize() if c != "ndcg" else "NDCG" for c in METRIC_COLUMNS]
    table = [headers]
    for rid, metrics, detail in rows:
        if metrics is None:
            table.append([rid, f"failed: {detail or 'unknown'}"] + [""] * (len(METRIC_COLUMNS) - 1))
            continue
        cells = [rid]
        for column in METRIC_COLUMNS:
            value = metrics.get(column)
            cells.append("-" if value is None else f"{value:.6f}")
        table.append(cells)
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in table]
    return "\n".join(lines)


# --- serve ------------------------------------------------------------------


def cmd_serve(args) -> int:
    try:
        config = load_config(args.config)
        server = EvaluatorServer(config)
    except (ConfigError, DatasetError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            return _fail(f"address already in use: {exc}", EXIT_ENVIRONMENT)
        return _fail(str(exc), EXIT_ENVIRONMENT)
    _emit(
        {"event": "serving", "base_uri": server.base_uri, "data_dir": str(config.data_dir)},
        args.format == "json-lines",
        f"evaluator listening on {server.base_uri} (data dir {config.data_dir})",
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return EXIT_OK


# --- recommender --------------------------------------------------------------


def cmd_recommender(args) -> int:
    from .httpd import AppServer

    kind = args.kind.replace("-", "_")
    service = RecommenderService(kind, seed=args.seed)
    try:
        server = AppServer(service.router, host=args.host, port=args.port)
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            return _fail(f"address already in use: {exc}", EXIT_ENVIRONMENT)
        return _fail(str(exc), EXIT_ENVIRONMENT)
    _emit(
        {"event": "serving", "kind": kind, "base_uri": server.base_uri},
        args.format == "json-lines",
        f"{kind} recommender listening on {server.base_uri}",
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return EXIT_OK


# --- run ----------------------------------------------------------------------


def cmd_run(args) -> int:
    as_json = args.format == "json-lines"
    config = ExperimentConfig(
        dataset_id=args.dataset,
        split_method=args.split,
        test_fraction=args.test,
        k=args.k,
        rating_threshold=args.threshold,
        recommender_ids=tuple(r.strip() for r in args.rec.split(",") if r.strip()),
        seed=args.seed,
    )
    violations = validate_config(config)
    if violations:
        for violation in violations:
            print(f"invalid configuration: {violation}", file=sys.stderr)
        return EXIT_USAGE

    api = args.api.rstrip("/")
    try:
        resp = requests.post(f"{api}/experiments", json=config.to_dict(), timeout=30)
    except requests.RequestException as exc:
        return _fail(f"evaluator unreachable at {api}: {exc}", EXIT_ENVIRONMENT)
    if resp.status_code == 400:
        for violation in resp.json().get("violations", ["rejected"]):
            print(f"rejected by evaluator: {violation}", file=sys.stderr)
        return EXIT_USAGE
    if resp.status_code != 201:
        return _fail(f"submission failed with HTTP {resp.status_code}", EXIT_RUNTIME)
    experiment_id = resp.json()["id"]
    _emit({"event": "submitted", "id": experiment_id}, as_json, f"experiment {experiment_id} submitted")

    last_statuses: dict[str, str] = {}
    while True:
        time.sleep(args.poll)
        try:
            record = requests.get(f"{api}/experiments/{experiment_id}", timeout=30).json()
        except requests.RequestException as exc:
            return _fail(f"evaluator unreachable while polling: {exc}", EXIT_ENVIRONMENT)
        for rid, entry in record.get("per_recommender", {}).items():
            if last_statuses.get(rid) != entry["status"]:
                last_statuses[rid] = entry["status"]
                _emit(
                    {"event": "progress", "recommender": rid, "status": entry["status"]},
                    as_json,
                    f"  {rid}: {entry['status']}",
                )
        if record["status"] in ("done", "failed"):
            break

    if args.output:
        Path(args.output).write_text(
            json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    if record["status"] == "failed":
        _emit(
            {"event": "failed", "id": experiment_id, "detail": record.get("failure_detail")},
            as_json,
            f"experiment failed: {record.get('failure_detail')}",
        )
        return EXIT_RUNTIME

    per_recommender = record["per_recommender"]
    rows = [
        (rid, per_recommender[rid].get("metrics"), per_recommender[rid].get("detail"))
        for rid in record["config"]["recommender_ids"]
    ]
    if as_json:
        for rid, metrics, detail in rows:
            print(json.dumps({"event": "result", "recommender": rid, "metrics": metrics, "detail": detail}))
        print(json.dumps({"event": "done", "id": experiment_id}))
    else:
        print(_metrics_table(rows))
    return EXIT_OK


# --- eval-offline ---------------------------------------------------------------


def _load_offline_ratings(path: Path, delimiter: str, has_header: bool) -> RatingSet:
    if not path.is_file():
        raise FileNotFoundError(path)
    kept: dict[tuple[str, str], Rating] = {}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        for rowno, row in enumerate(reader):
            if has_header and rowno == 0:
                continue
            if not row:
                continue
            if len(row) not in (3, 4):
                raise DatasetError(f"{path}: row {rowno + 1} must have 3 or 4 columns: {row!r}")
            ts = int(row[3]) if len(row) == 4 and row[3] != "" else None
            rating = Rating(user=row[0], item=row[1], value=float(row[2]), timestamp=ts)
            kept[(rating.user, rating.item)] = rating
    return RatingSet(tuple(kept.values()))


def _load_offline_recs(path: Path, delimiter: str, has_header: bool) -> list[RawRecommendation]:
    if not path.is_file():
        raise FileNotFoundError(path)
    ranked: dict[str, list[tuple[int, str]]] = {}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        for rowno, row in enumerate(reader):
            if has_header and rowno == 0:
                continue
            if not row:
                continue
            if len(row) != 3:
                raise DatasetError(f"{path}: row {rowno + 1} must be user,item,rank: {row!r}")
            ranked.setdefault(row[0], []).append((int(row[2]), row[1]))
    out = []
    for user, entries in ranked.items():
        entries.sort()
        out.append(RawRecommendation(user=user, items=tuple(item for _, item in entries)))
    return out


def cmd_eval_offline(args) -> int:
    as_json = args.format == "json-lines"
    try:
        train = _load_offline_ratings(Path(args.train), args.delimiter, args.has_header)
        test = _load_offline_ratings(Path(args.test), args.delimiter, args.has_header)
        raw_recs = _load_offline_recs(Path(args.recs), args.delimiter, args.has_header)
    except FileNotFoundError as exc:
        return _fail(f"file not found: {exc}", EXIT_USAGE)
    except (DatasetError, ValueError) as exc:
        return _fail(str(exc), EXIT_USAGE)

    try:
        ctx = build_context(train, test, args.threshold, args.k)
    except ValueError as exc:
        return _fail(str(exc), EXIT_USAGE)

    test_users = sorted(test.users)
    known = {raw.user for raw in raw_recs}
    skipped = sorted(known - set(test_users))
    missing = sorted(set(test_users) - known)
    if skipped:
        print(f"warning: ignoring lists for {len(skipped)} user(s) not in the test set", file=sys.stderr)
    if missing:
        print(f"warning: {len(missing)} test user(s) have no list; scored as empty", file=sys.stderr)

    seen = {user: frozenset(r.item for r in train.by_user[user]) for user in train.users}
    response = RecommendResponse(
        status="ready",
        recommendations=tuple(raw for raw in raw_recs if raw.user in set(test_users)),
    )
    req = RecommendRequest(users=tuple(test_users), k=args.k)
    recs, violations = sanitize_recommendations(response, req, seen)
    if violations.total():
        print(f"warning: sanitized recommendation lists: {violations.to_dict()}", file=sys.stderr)

    report = evaluate_all(ctx, recs)
    if as_json:
        print(json.dumps({"event": "report", "metrics": report.to_dict(), "violations": violations.to_dict()}))
    else:
        print(_metrics_table([("offline", report.to_dict(), None)]))
    return EXIT_OK


# --- export ---------------------------------------------------------------------


def cmd_export(args) -> int:
    as_json = args.format == "json-lines"
    api = args.api.rstrip("/")
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)

    try:
        if args.all:
            summaries: list[dict] = []
            page = 1
            while True:
                payload = requests.get(
                    f"{api}/experiments", params={"page": page}, timeout=30
                ).json()
                summaries.extend(payload["experiments"])
                if page * payload["page_size"] >= payload["total"]:
                    break
                page += 1
            ids = [s["id"] for s in summaries]
        else:
            ids = [args.id]
        records = []
        for experiment_id in ids:
            resp = requests.get(f"{api}/experiments/{experiment_id}", timeout=30)
            if resp.status_code == 404:
                return _fail(f"no such experiment: {experiment_id}", EXIT_RUNTIME)
            resp.raise_for_status()
            records.append(resp.json())
    except requests.RequestException as exc:
        return _fail(f"evaluator unreachable at {api}: {exc}", EXIT_ENVIRONMENT)

    for record in records:
        path = dest / f"{record['id']}.json"
        path.write_text(
            json.dumps(record, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
    index = {
        "experiments": [
            {
                "id": r["id"],
                "dataset_id": r["config"]["dataset_id"],
                "split_method": r["config"]["split_method"],
                "k": r["config"]["k"],
                "status": r["status"],
                "recommender_ids": r["config"]["recommender_ids"],
                "created_at": r["created_at"],
            }
            for r in sorted(records, key=lambda r: r["id"], reverse=True)
        ]
    }
    (dest / "index.json").write_text(
        json.dumps(index, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    _emit(
        {"event": "exported", "count": len(records), "dest": str(dest)},
        as_json,
        f"exported {len(records)} record(s) to {dest}",
    )
    return EXIT_OK


# --- argument parsing -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reclab", description="Distributed offline evaluation of top-k recommenders"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the evaluator service")
    p_serve.add_argument("--config", help="path to the evaluator TOML config file")
    p_serve.add_argument("--format", choices=("table", "json-lines"), default="table")
    p_serve.set_defaults(func=cmd_serve)

    p_rec = sub.add_parser("recommender", help="run a reference recommender service")
    kinds = tuple(k.replace("_", "-") for k in KINDS)
    p_rec.add_argument("--kind", required=True, choices=kinds)
    p_rec.add_argument("--port", type=int, required=True)
    p_rec.add_argument("--host", default="127.0.0.1")
    p_rec.add_argument("--seed", type=int, default=0)
    p_rec.add_argument("--format", choices=("table", "json-lines"), default="table")
    p_rec.set_defaults(func=cmd_recommender)

    p_run = sub.add_parser("run", help="submit an experiment and wait for results")
    p_run.add_argument("--dataset", required=True)
    p_run.add_argument("--split", required=True, choices=("random", "timestamp"))
    p_run.add_argument("--test", type=float, required=True, help="test set fraction")
    p_run.add_argument("--k", type=int, required=True)
    p_run.add_argument("--threshold", type=float, required=True)
    p_run.add_argument("--rec", required=True, help="comma-separated recommender ids")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--api", default=_api_default())
    p_run.add_argument("--output", help="write the full record JSON here")
    p_run.add_argument("--poll", type=float, default=2.0)
    p_run.add_argument("--format", choices=("table", "json-lines"), default="table")
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser("eval-offline", help="score precomputed lists from files")
    p_eval.add_argument("--train", required=True)
    p_eval.add_argument("--test", required=True)
    p_eval.add_argument("--recs", required=True, help="user,item,rank lines")
    p_eval.add_argument("--k", type=int, required=True)
    p_eval.add_argument("--threshold", type=float, required=True)
    p_eval.add_argument("--delimiter", default=",")
    p_eval.add_argument("--has-header", action="store_true")
    p_eval.add_argument("--format", choices=("table", "json-lines"), default="table")
    p_eval.set_defaults(func=cmd_eval_offline)

    p_export = sub.add_parser("export", help="archive experiment records")
    group = p_export.add_mutually_exclusive_group(required=True)
    group.add_argument("--all", action="store_true")
    group.add_argument("--id")
    p_export.add_argument("dest", help="destination directory")
    p_export.add_argument("--api", default=_api_default())
    p_export.add_argument("--format", choices=("table", "json-lines"), default="table")
    p_export.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("RECLAB_LOG_LEVEL", "WARNING"),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
