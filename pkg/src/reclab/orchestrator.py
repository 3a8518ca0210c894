"""Experiment lifecycle: validate, split once, drive recommenders, store forever.

The store keeps one JSON record file per experiment under a data directory,
plus a derived index file. Records are append-only: once an experiment
reaches a terminal state its file carries a content digest and is never
written again; the digest is re-verified on every read so tampering or
corruption surfaces immediately.

Within one experiment every recommender sees byte-identical training data
and an identical (users, k) recommendation request; the split is
materialized once and reused. A recommender failure marks only its own
entry failed and the experiment carries on with the rest.
"""

from __future__ import annotations

import hashlib
import json
import logging
import queue
import secrets
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Mapping

from .config import EvaluatorConfig, load_recommender_registry
from .datasets import (
    DatasetDescriptor,
    Split,
    load_dataset,
    read_dataset_registry,
    split_random,
    split_timestamp,
)
from .domain import ExperimentConfig, MetricsReport, validate_config
from .httpd import AppServer, BadRequest, HttpResponse, Router, json_response
from .metrics import build_context, evaluate_all
from .protocol import (
    ProtocolSettings,
    RecommendRequest,
    TrainRequest,
    delete_model,
    recommend_remote,
    sanitize_recommendations,
    serialize_training_set,
    train_remote,
)

logger = logging.getLogger(__name__)

EXPERIMENT_STATUSES = ("queued", "splitting", "running", "done", "failed")
RECOMMENDER_RUN_STATUSES = (
    "pending",
    "training",
    "recommending",
    "evaluating",
    "done",
    "failed",
)

PAGE_SIZE = 50


class StoreError(Exception):
    """Raised for unreadable, corrupt, or immutability-violating records."""


class ValidationError(Exception):
    """A submitted configuration was rejected; carries every violation."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


def new_experiment_id() -> str:
    """Time-ordered identifier: UTC timestamp plus a short random suffix."""
    now = datetime.now(timezone.utc)
    return now.strftime("%Y%m%dT%H%M%S%f") + "-" + secrets.token_hex(3)


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


@dataclass
class RecommenderResult:
    """Per-recommender outcome within one experiment."""

    status: str = "pending"
    metrics: MetricsReport | None = None
    violations: dict[str, int] = field(default_factory=dict)
    train_seconds: float | None = None
    recommend_seconds: float | None = None
    detail: str | None = None

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "metrics": self.metrics.to_dict() if self.metrics else None,
            "violations": self.violations,
            "train_seconds": self.train_seconds,
            "recommend_seconds": self.recommend_seconds,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "RecommenderResult":
        metrics = data.get("metrics")
        return cls(
            status=data["status"],
            metrics=MetricsReport.from_dict(metrics) if metrics else None,
            violations=dict(data.get("violations") or {}),
            train_seconds=data.get("train_seconds"),
            recommend_seconds=data.get("recommend_seconds"),
            detail=data.get("detail"),
        )


@dataclass
class ExperimentRecord:
    """The full, re-runnable account of one experiment."""

    id: str
    config: ExperimentConfig
    status: str = "queued"
    realized_split_sizes: tuple[int, int] | None = None
    per_recommender: dict[str, RecommenderResult] = field(default_factory=dict)
    created_at: str = ""
    finished_at: str | None = None
    failure_detail: str | None = None
    digest: str | None = None

    @property
    def terminal(self) -> bool:
        return self.status in ("done", "failed")

    def to_dict(self) -> dict:
        sizes = self.realized_split_sizes
        return {
            "id": self.id,
            "config": self.config.to_dict(),
            "status": self.status,
            "realized_split_sizes": (
                {"train": sizes[0], "test": sizes[1]} if sizes else None
            ),
            "per_recommender": {
                rid: result.to_dict() for rid, result in self.per_recommender.items()
            },
            "created_at": self.created_at,
            "finished_at": self.finished_at,
            "failure_detail": self.failure_detail,
            "digest": self.digest,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ExperimentRecord":
        sizes = data.get("realized_split_sizes")
        return cls(
            id=data["id"],
            config=ExperimentConfig.from_dict(data["config"]),
            status=data["status"],
            realized_split_sizes=(sizes["train"], sizes["test"]) if sizes else None,
            per_recommender={
                rid: RecommenderResult.from_dict(entry)
                for rid, entry in data.get("per_recommender", {}).items()
            },
            created_at=data.get("created_at", ""),
            finished_at=data.get("finished_at"),
            failure_detail=data.get("failure_detail"),
            digest=data.get("digest"),
        )

    def summary(self) -> dict:
        return {
            "id": self.id,
            "dataset_id": self.config.dataset_id,
            "split_method": self.config.split_method,
            "k": self.config.k,
            "status": self.status,
            "recommender_ids": list(self.config.recommender_ids),
            "created_at": self.created_at,
        }


def record_digest(record: ExperimentRecord) -> str:
    """Content digest over the canonical JSON form, digest field excluded."""
    payload = record.to_dict()
    payload.pop("digest", None)
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ExperimentStore:
    """One pretty-printed JSON file per experiment, plus a derived index file.

    Summaries are kept in memory (seeded from the index, rebuilt by scanning
    record files when the index is missing or stale), so listings never
    re-read every record.
    """

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._summaries: dict[str, dict] = {}
        self._load_summaries()

    def _record_path(self, experiment_id: str) -> Path:
        if "/" in experiment_id or "\\" in experiment_id or experiment_id.startswith("."):
            raise StoreError(f"invalid experiment id {experiment_id!r}")
        return self.data_dir / f"{experiment_id}.json"

    def _index_path(self) -> Path:
        return self.data_dir / "index.json"

    def _record_ids_on_disk(self) -> set[str]:
        return {
            p.stem
            for p in self.data_dir.glob("*.json")
            if p.name != "index.json"
        }

    def _load_summaries(self) -> None:
        on_disk = self._record_ids_on_disk()
        index_path = self._index_path()
        if index_path.is_file():
            try:
                entries = json.loads(index_path.read_text(encoding="utf-8"))["experiments"]
                summaries = {entry["id"]: entry for entry in entries}
                if set(summaries) == on_disk:
                    self._summaries = summaries
                    return
            except (ValueError, KeyError, TypeError):
                logger.warning("index file unreadable; rebuilding from record files")
        for experiment_id in on_disk:
            try:
                record = self._read(self._record_path(experiment_id))
            except StoreError as exc:
                logger.warning("skipping unreadable record: %s", exc)
                continue
            self._summaries[experiment_id] = record.summary()
        if on_disk:
            self._write_index()

    def save(self, record: ExperimentRecord) -> None:
        """Persist a record snapshot; refuses to touch terminal records."""
        with self._lock:
            path = self._record_path(record.id)
            if path.exists():
                existing = self._read(path)
                if existing.terminal:
                    raise StoreError(
                        f"experiment {record.id} is terminal; records are append-only"
                    )
            if record.terminal and record.digest is None:
                record.digest = record_digest(record)
            tmp = path.with_suffix(".json.tmp")
            tmp.write_text(
                json.dumps(record.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)
                + "\n",
                encoding="utf-8",
            )
            tmp.replace(path)
            self._summaries[record.id] = record.summary()
            self._write_index()

    def _read(self, path: Path) -> ExperimentRecord:
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            record = ExperimentRecord.from_dict(data)
        except (OSError, ValueError, KeyError) as exc:
            raise StoreError(f"cannot read record {path.name}: {exc}") from exc
        return record

    def load(self, experiment_id: str) -> ExperimentRecord:
        """Read one record, verifying the digest of terminal records."""
        with self._lock:
            path = self._record_path(experiment_id)
            if not path.is_file():
                raise KeyError(experiment_id)
            record = self._read(path)
        if record.terminal:
            expected = record_digest(record)
            if record.digest != expected:
                raise StoreError(
                    f"experiment {experiment_id}: stored digest {record.digest!r} "
                    f"does not match content ({expected!r}); record corrupted or tampered"
                )
        return record

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._summaries, reverse=True)

    def summaries(
        self, status: str | None = None, dataset: str | None = None
    ) -> list[dict]:
        """Newest-first summaries, optionally filtered."""
        with self._lock:
            out = [self._summaries[experiment_id] for experiment_id in self.ids()]
        if status:
            out = [s for s in out if s["status"] == status]
        if dataset:
            out = [s for s in out if s["dataset_id"] == dataset]
        return out

    def _write_index(self) -> None:
        index = {"experiments": [self._summaries[i] for i in self.ids()]}
        tmp = self._index_path().with_suffix(".json.tmp")
        tmp.write_text(
            json.dumps(index, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        tmp.replace(self._index_path())


@dataclass(frozen=True)
class Registry:
    """Registered datasets and recommenders, loaded from the two registry files."""

    datasets: Mapping[str, DatasetDescriptor]
    recommenders: Mapping[str, str]

    @classmethod
    def from_files(
        cls, datasets_file: str | Path | None, recommenders_file: str | Path | None
    ) -> "Registry":
        datasets = read_dataset_registry(datasets_file) if datasets_file else {}
        recommenders = (
            load_recommender_registry(recommenders_file) if recommenders_file else {}
        )
        return cls(datasets=datasets, recommenders=recommenders)


class Orchestrator:
    """Drives experiments end to end against the registered recommenders."""

    def __init__(
        self,
        registry: Registry,
        store: ExperimentStore,
        settings: ProtocolSettings = ProtocolSettings(),
        training_set_base: str | None = None,
    ):
        self.registry = registry
        self.store = store
        self.settings = settings
        # Externally reachable base URI of the evaluator API; the server sets
        # this once it knows its bound address.
        self.training_set_base = training_set_base
        self._splits: dict[str, Split] = {}
        self._splits_lock = threading.Lock()
        self._queue: queue.Queue[str] = queue.Queue()
        self._worker: threading.Thread | None = None

    # -- submission and execution --

    def submit(self, config: ExperimentConfig) -> str:
        """Validate and persist a queued experiment; returns its id.

        Execution happens later (worker thread or an explicit
        run_experiment call); submission never blocks on it.
        """
        violations = validate_config(config)
        if not violations:
            if config.dataset_id not in self.registry.datasets:
                violations.append(f"dataset_id: unknown dataset {config.dataset_id!r}")
            for rid in config.recommender_ids:
                if rid not in self.registry.recommenders:
                    violations.append(f"recommender_ids: unknown recommender {rid!r}")
        if violations:
            raise ValidationError(violations)
        record = ExperimentRecord(
            id=new_experiment_id(),
            config=config,
            created_at=_now_iso(),
            per_recommender={rid: RecommenderResult() for rid in config.recommender_ids},
        )
        self.store.save(record)
        if self._worker is not None:
            self._queue.put(record.id)
        return record.id

    def _split_for_config(self, config: ExperimentConfig) -> Split:
        descriptor = self.registry.datasets[config.dataset_id]
        ratings = load_dataset(descriptor)
        if config.split_method == "timestamp":
            return split_timestamp(ratings, config.test_fraction)
        return split_random(ratings, config.test_fraction, config.seed)

    def ensure_split(self, experiment_id: str) -> Split:
        """Materialize (or recall) the experiment's split.

        Splits are deterministic functions of (dataset, method, fraction,
        seed), so a record can be re-served after a restart.
        """
        with self._splits_lock:
            split = self._splits.get(experiment_id)
        if split is not None:
            return split
        record = self.store.load(experiment_id)
        split = self._split_for_config(record.config)
        with self._splits_lock:
            self._splits[experiment_id] = split
        return split

    def training_set_stream(self, experiment_id: str) -> Iterator[bytes]:
        split = self.ensure_split(experiment_id)
        return serialize_training_set(split.train)

    def run_experiment(self, experiment_id: str) -> ExperimentRecord:
        """Execute a queued experiment to its terminal state."""
        record = self.store.load(experiment_id)
        if record.status != "queued":
            raise StoreError(
                f"experiment {experiment_id} is {record.status}; only queued ones can run"
            )
        config = record.config
        try:
            record.status = "splitting"
            self.store.save(record)
            split = self.ensure_split(experiment_id)
            record.realized_split_sizes = (len(split.train), len(split.test))
            ctx = build_context(
                split.train, split.test, config.rating_threshold, config.k
            )
            record.status = "running"
            self.store.save(record)
        except Exception as exc:
            logger.warning("experiment %s failed before running: %s", experiment_id, exc)
            record.status = "failed"
            record.failure_detail = str(exc)
            record.finished_at = _now_iso()
            self.store.save(record)
            return record

        seen = {
            user: frozenset(r.item for r in split.train.by_user[user])
            for user in split.train.users
        }
        users = tuple(sorted(split.test.users))
        for rid in config.recommender_ids:
            self._run_recommender(record, rid, ctx, seen, users)

        record.status = "done"
        record.finished_at = _now_iso()
        self.store.save(record)
        with self._splits_lock:
            self._splits.pop(experiment_id, None)
        return record

    def _run_recommender(self, record, rid, ctx, seen, users) -> None:
        config = record.config
        base_uri = self.registry.recommenders[rid]
        entry = record.per_recommender[rid]
        entry.status = "training"
        self.store.save(record)

        train_req = TrainRequest(
            training_set_uri=(
                f"{self.training_set_base}/experiments/{record.id}/training-set"
            ),
            rating_threshold=config.rating_threshold,
        )
        started = time.monotonic()
        status = train_remote(base_uri, train_req, self.settings)
        entry.train_seconds = time.monotonic() - started
        if status.status != "ready":
            entry.status = "failed"
            entry.detail = status.detail or f"training ended with status {status.status}"
            delete_model(base_uri, self.settings)
            self.store.save(record)
            return

        entry.status = "recommending"
        self.store.save(record)
        req = RecommendRequest(users=users, k=config.k)
        started = time.monotonic()
        response = recommend_remote(base_uri, req, self.settings)
        entry.recommend_seconds = time.monotonic() - started
        if response.status != "ready":
            entry.status = "failed"
            entry.detail = response.detail or "recommendation phase failed"
            delete_model(base_uri, self.settings)
            self.store.save(record)
            return

        recs, violations = sanitize_recommendations(response, req, seen)
        entry.violations = violations.to_dict()
        entry.status = "evaluating"
        self.store.save(record)
        delete_model(base_uri, self.settings)
        try:
            entry.metrics = evaluate_all(ctx, recs)
        except Exception as exc:
            entry.status = "failed"
            entry.detail = f"metric computation failed: {exc}"
            self.store.save(record)
            return
        entry.status = "done"
        self.store.save(record)

    # -- reading --

    def get(self, experiment_id: str) -> ExperimentRecord:
        return self.store.load(experiment_id)

    def list(self, status: str | None = None, dataset: str | None = None) -> list[dict]:
        return self.store.summaries(status=status, dataset=dataset)

    # -- background execution --

    def start_worker(self) -> None:
        """Start the single-consumer execution queue; re-enqueues stale queued records."""
        if self._worker is not None:
            return
        self._worker = threading.Thread(target=self._worker_loop, daemon=True)
        self._worker.start()
        for experiment_id in self.store.ids():
            try:
                if self.store.load(experiment_id).status == "queued":
                    self._queue.put(experiment_id)
            except StoreError:
                continue

    def _worker_loop(self) -> None:
        while True:
            experiment_id = self._queue.get()
            try:
                self.run_experiment(experiment_id)
            except Exception:
                logger.exception("experiment %s crashed", experiment_id)


# --- evaluator HTTP API ----------------------------------------------------


def _static_handler(web_root: Path):
    import mimetypes

    def handler(request) -> HttpResponse:
        if request.method != "GET":
            return json_response({"detail": "not found"}, status=404)
        rel = request.path.lstrip("/") or "index.html"
        target = (web_root / rel).resolve()
        if not str(target).startswith(str(web_root.resolve())) or not target.is_file():
            return json_response({"detail": "not found"}, status=404)
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        return HttpResponse(status=200, body=target.read_bytes(), content_type=ctype)

    return handler


def build_evaluator_router(
    orchestrator: Orchestrator, web_root: str | Path | None = None
) -> Router:
    """The public, machine-readable evaluator API."""
    router = Router()
    registry = orchestrator.registry

    def post_experiments(request) -> HttpResponse:
        body = request.json()
        try:
            config = ExperimentConfig.from_dict(body)
        except ValueError as exc:
            return json_response({"violations": [str(exc)]}, status=400)
        try:
            experiment_id = orchestrator.submit(config)
        except ValidationError as exc:
            return json_response({"violations": exc.violations}, status=400)
        return json_response({"id": experiment_id}, status=201)

    def get_experiments(request) -> HttpResponse:
        page_raw = request.query.get("page", "1")
        try:
            page = max(1, int(page_raw))
        except ValueError:
            raise BadRequest(f"page must be an integer, got {page_raw!r}")
        summaries = orchestrator.list(
            status=request.query.get("status"), dataset=request.query.get("dataset")
        )
        start = (page - 1) * PAGE_SIZE
        return json_response(
            {
                "experiments": summaries[start : start + PAGE_SIZE],
                "page": page,
                "page_size": PAGE_SIZE,
                "total": len(summaries),
            }
        )

    def get_experiment(request, id) -> HttpResponse:
        try:
            record = orchestrator.get(id)
        except KeyError:
            return json_response({"detail": f"no such experiment: {id}"}, status=404)
        except StoreError as exc:
            return json_response({"detail": str(exc)}, status=500)
        return json_response(record.to_dict())

    def get_training_set(request, id) -> HttpResponse:
        try:
            stream = orchestrator.training_set_stream(id)
        except KeyError:
            return json_response({"detail": f"no such experiment: {id}"}, status=404)
        return HttpResponse(status=200, body=stream, content_type="text/csv; charset=utf-8")

    def get_recommenders(request) -> HttpResponse:
        out = []
        for rid, base_uri in registry.recommenders.items():
            try:
                requests_ok = _probe(base_uri)
            except Exception:
                requests_ok = False
            out.append({"id": rid, "base_uri": base_uri, "reachable": requests_ok})
        return json_response({"recommenders": out})

    def get_datasets(request) -> HttpResponse:
        return json_response(
            {"datasets": [d.to_dict() for d in registry.datasets.values()]}
        )

    router.add("POST", "/experiments", post_experiments)
    router.add("GET", "/experiments", get_experiments)
    router.add("GET", "/experiments/{id}", get_experiment)
    router.add("GET", "/experiments/{id}/training-set", get_training_set)
    router.add("GET", "/recommenders", get_recommenders)
    router.add("GET", "/datasets", get_datasets)
    if web_root:
        router.fallback = _static_handler(Path(web_root))
    return router


def _probe(base_uri: str) -> bool:
    import requests

    try:
        requests.get(base_uri.rstrip("/") + "/model", timeout=2)
        return True
    except requests.RequestException:
        return False


class EvaluatorServer:
    """Store + registry + orchestrator + HTTP API wired together."""

    def __init__(self, config: EvaluatorConfig, registry: Registry | None = None):
        self.config = config
        self.registry = registry or Registry.from_files(
            config.datasets_file, config.recommenders_file
        )
        self.store = ExperimentStore(config.data_dir)
        self.orchestrator = Orchestrator(
            self.registry,
            self.store,
            settings=ProtocolSettings(
                poll_interval=config.poll_interval,
                train_timeout=config.train_timeout,
                recommend_timeout=config.recommend_timeout,
                retries=config.retries,
            ),
        )
        router = build_evaluator_router(self.orchestrator, web_root=config.web_root)
        self.server = AppServer(router, host=config.host, port=config.port)
        advertised = config.advertised_host or (
            "127.0.0.1" if config.host in ("0.0.0.0", "::") else config.host
        )
        self.orchestrator.training_set_base = f"http://{advertised}:{self.server.port}"

    @property
    def base_uri(self) -> str:
        return self.orchestrator.training_set_base

    def start(self) -> "EvaluatorServer":
        self.server.start()
        self.orchestrator.start_worker()
        return self

    def serve_forever(self) -> None:
        self.orchestrator.start_worker()
        self.server.serve_forever()

    def stop(self) -> None:
        self.server.stop()
