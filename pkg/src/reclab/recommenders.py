"""Reference recommenders that speak the evaluation protocol.

Four kinds are provided:

* ``random``: k items drawn uniformly, seeded, from the catalog minus the
  user's already-rated items.
* ``most_popular``: the personalized popularity ranking; items the user
  rated in training are skipped, ties broken lexicographically.
* ``item_knn``: score(item) = sum of cosine similarities between the item
  and each training item the user liked; similarities use binary
  liker vectors and each item keeps its 80 nearest neighbors.
* ``user_knn``: score(item) = sum of similarities of the 80 nearest users
  (cosine over liked-item vectors) who liked the item.

All kinds fill lists with zero-scored candidates (lexicographic order)
before returning short, so lists only shrink when candidates run out. A
user unseen in training gets the unpersonalized variant of each ranking.
Iteration over sets is always sorted first, so scores and therefore lists
are reproducible across processes.
"""

from __future__ import annotations

import io
import logging
import random
import threading
from dataclasses import dataclass, field
from math import sqrt
from typing import Mapping

import requests

from .domain import RatingSet, RecommendationList
from .httpd import BadRequest, HttpResponse, Router, json_response
from .protocol import parse_training_set

logger = logging.getLogger(__name__)

KINDS = ("random", "most_popular", "item_knn", "user_knn")

NEIGHBORHOOD_SIZE = 80


@dataclass(frozen=True)
class TrainedModel:
    """Everything one recommender kind needs to answer recommendation requests."""

    kind: str
    threshold: float
    seen: Mapping[str, frozenset[str]]
    catalog: frozenset[str]
    popularity: Mapping[str, int]
    liked: Mapping[str, frozenset[str]]
    # item_knn: item -> ((neighbor, similarity), ...) sorted best-first.
    # user_knn: item -> users who liked it (inverted index for fast user sims).
    neighbors: Mapping | None = None
    rng: random.Random | None = field(default=None, compare=False, repr=False)


def _cosine(overlap: int, size_a: int, size_b: int) -> float:
    if overlap == 0 or size_a == 0 or size_b == 0:
        return 0.0
    return overlap / sqrt(size_a * size_b)


def _item_neighbor_lists(
    liked: Mapping[str, frozenset[str]], cap: int = NEIGHBORHOOD_SIZE
) -> dict[str, tuple[tuple[str, float], ...]]:
    """Top-`cap` cosine neighbors per item from co-liking counts."""
    vector_size: dict[str, int] = {}
    co: dict[tuple[str, str], int] = {}
    for user in sorted(liked):
        items = sorted(liked[user])
        for idx, a in enumerate(items):
            vector_size[a] = vector_size.get(a, 0) + 1
            for b in items[idx + 1 :]:
                key = (a, b)
                co[key] = co.get(key, 0) + 1
    candidates: dict[str, list[tuple[float, str]]] = {}
    for (a, b), overlap in co.items():
        sim = _cosine(overlap, vector_size[a], vector_size[b])
        candidates.setdefault(a, []).append((sim, b))
        candidates.setdefault(b, []).append((sim, a))
    neighbors: dict[str, tuple[tuple[str, float], ...]] = {}
    for item, sims in candidates.items():
        sims.sort(key=lambda t: (-t[0], t[1]))
        neighbors[item] = tuple((other, sim) for sim, other in sims[:cap])
    return neighbors


def train(
    kind: str, training_set: RatingSet, threshold: float, seed: int = 0
) -> TrainedModel:
    """Build a model of the given kind from a parsed training set."""
    if kind not in KINDS:
        raise ValueError(f"unknown recommender kind {kind!r}; expected one of {KINDS}")
    if len(training_set) == 0:
        raise ValueError("training set is empty")

    seen: dict[str, set[str]] = {}
    popularity: dict[str, int] = {}
    liked: dict[str, set[str]] = {}
    for r in training_set:
        seen.setdefault(r.user, set()).add(r.item)
        popularity[r.item] = popularity.get(r.item, 0) + 1
        if r.value > threshold:
            liked.setdefault(r.user, set()).add(r.item)

    frozen_seen = {u: frozenset(items) for u, items in seen.items()}
    frozen_liked = {u: frozenset(items) for u, items in liked.items()}

    neighbors = None
    if kind == "item_knn":
        neighbors = _item_neighbor_lists(frozen_liked)
    elif kind == "user_knn":
        likers: dict[str, set[str]] = {}
        for user, items in frozen_liked.items():
            for item in items:
                likers.setdefault(item, set()).add(user)
        neighbors = {item: frozenset(users) for item, users in likers.items()}

    return TrainedModel(
        kind=kind,
        threshold=threshold,
        seen=frozen_seen,
        catalog=frozenset(popularity),
        popularity=popularity,
        liked=frozen_liked,
        neighbors=neighbors,
        rng=random.Random(seed) if kind == "random" else None,
    )


def _item_knn_scores(model: TrainedModel, user: str) -> dict[str, float]:
    scores: dict[str, float] = {}
    for liked_item in sorted(model.liked.get(user, ())):
        for other, sim in model.neighbors.get(liked_item, ()):
            scores[other] = scores.get(other, 0.0) + sim
    return scores


def _user_knn_scores(model: TrainedModel, user: str) -> dict[str, float]:
    liked_u = model.liked.get(user, frozenset())
    if not liked_u:
        return {}
    overlap: dict[str, int] = {}
    for item in sorted(liked_u):
        for other in sorted(model.neighbors.get(item, ())):
            if other != user:
                overlap[other] = overlap.get(other, 0) + 1
    sims = [
        (_cosine(count, len(liked_u), len(model.liked[other])), other)
        for other, count in overlap.items()
    ]
    sims.sort(key=lambda t: (-t[0], t[1]))
    scores: dict[str, float] = {}
    for sim, neighbor in sims[:NEIGHBORHOOD_SIZE]:
        for item in sorted(model.liked[neighbor]):
            scores[item] = scores.get(item, 0.0) + sim
    return scores


def recommend(model: TrainedModel, user: str, k: int) -> RecommendationList:
    """Produce the user's top-k list, never suggesting items they rated in training."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    seen = model.seen.get(user, frozenset())
    candidates = model.catalog - seen

    if model.kind == "random":
        pool = sorted(candidates)
        picks = model.rng.sample(pool, min(k, len(pool)))
        return RecommendationList(user=user, items=tuple(picks))

    if model.kind == "most_popular":
        ranked = sorted(candidates, key=lambda item: (-model.popularity[item], item))
        return RecommendationList(user=user, items=tuple(ranked[:k]))

    if model.kind == "item_knn":
        scores = _item_knn_scores(model, user)
    else:
        scores = _user_knn_scores(model, user)
    ranked = sorted(candidates, key=lambda item: (-scores.get(item, 0.0), item))
    return RecommendationList(user=user, items=tuple(ranked[:k]))


class RecommenderService:
    """One protocol-conformant recommender: five HTTP resources, one model slot.

    Training and recommendation run on worker threads so status polls answer
    immediately. A new model request replaces whatever model exists; a
    generation counter makes sure a superseded worker cannot publish a stale
    result.
    """

    def __init__(self, kind: str, seed: int = 0, request_timeout: float = 60.0):
        if kind not in KINDS:
            raise ValueError(f"unknown recommender kind {kind!r}; expected one of {KINDS}")
        self.kind = kind
        self.seed = seed
        self.request_timeout = request_timeout
        self._lock = threading.Lock()
        self._generation = 0
        self._model: TrainedModel | None = None
        self._model_status = "none"
        self._model_detail: str | None = None
        self._rec_status: str | None = None
        self._rec_detail: str | None = None
        self._recommendations: list[RecommendationList] | None = None

        self.router = Router()
        self.router.add("POST", "/model", self._post_model)
        self.router.add("GET", "/model", self._get_model)
        self.router.add("DELETE", "/model", self._delete_model)
        self.router.add("POST", "/recommendation", self._post_recommendation)
        self.router.add("GET", "/recommendation", self._get_recommendation)

    # -- model lifecycle --

    def _post_model(self, request) -> HttpResponse:
        body = request.json()
        uri = body.get("training_set_uri") if isinstance(body, dict) else None
        threshold = body.get("rating_threshold") if isinstance(body, dict) else None
        if not isinstance(uri, str) or not isinstance(threshold, (int, float)):
            raise BadRequest(
                "body must be {\"training_set_uri\": string, \"rating_threshold\": number}"
            )
        with self._lock:
            self._generation += 1
            generation = self._generation
            self._model = None
            self._model_status = "training"
            self._model_detail = None
            self._rec_status = None
            self._rec_detail = None
            self._recommendations = None
        threading.Thread(
            target=self._train_job, args=(generation, uri, float(threshold)), daemon=True
        ).start()
        return json_response({"status": "training"}, status=202)

    def _train_job(self, generation: int, uri: str, threshold: float) -> None:
        try:
            resp = requests.get(uri, stream=True, timeout=self.request_timeout)
            resp.raise_for_status()
            resp.raw.auto_close = False  # TextIOWrapper reads past EOF once
            text = io.TextIOWrapper(resp.raw, encoding="utf-8", newline="")
            ratings = parse_training_set(text)
            model = train(self.kind, ratings, threshold, self.seed)
        except Exception as exc:
            logger.warning("training failed (%s): %s", self.kind, exc)
            with self._lock:
                if self._generation == generation:
                    self._model_status = "failed"
                    self._model_detail = f"training failed: {exc}"
            return
        with self._lock:
            if self._generation == generation:
                self._model = model
                self._model_status = "ready"

    def _get_model(self, request) -> HttpResponse:
        with self._lock:
            payload = {"status": self._model_status}
            if self._model_detail:
                payload["detail"] = self._model_detail
        return json_response(payload)

    def _delete_model(self, request) -> HttpResponse:
        with self._lock:
            self._generation += 1
            self._model = None
            self._model_status = "none"
            self._model_detail = None
            self._rec_status = None
            self._rec_detail = None
            self._recommendations = None
        return HttpResponse(status=204)

    # -- recommendation lifecycle --

    def _post_recommendation(self, request) -> HttpResponse:
        body = request.json()
        users = body.get("users") if isinstance(body, dict) else None
        k = body.get("k") if isinstance(body, dict) else None
        if (
            not isinstance(users, list)
            or not users
            or any(not isinstance(u, str) for u in users)
            or not isinstance(k, int)
            or isinstance(k, bool)
            or k < 1
        ):
            raise BadRequest(
                "body must be {\"users\": [string, ...], \"k\": positive integer}"
            )
        with self._lock:
            if self._model_status != "ready" or self._model is None:
                return json_response(
                    {"status": "failed", "detail": "no trained model; POST /model first"},
                    status=409,
                )
            generation = self._generation
            model = self._model
            self._rec_status = "computing"
            self._rec_detail = None
            self._recommendations = None
        threading.Thread(
            target=self._recommend_job, args=(generation, model, users, k), daemon=True
        ).start()
        return json_response({"status": "computing"}, status=202)

    def _recommend_job(
        self, generation: int, model: TrainedModel, users: list[str], k: int
    ) -> None:
        try:
            lists = [recommend(model, user, k) for user in users]
        except Exception as exc:
            logger.warning("recommendation failed (%s): %s", self.kind, exc)
            with self._lock:
                if self._generation == generation:
                    self._rec_status = "failed"
                    self._rec_detail = f"recommendation failed: {exc}"
            return
        with self._lock:
            if self._generation == generation:
                self._rec_status = "ready"
                self._recommendations = lists

    def _get_recommendation(self, request) -> HttpResponse:
        with self._lock:
            status = self._rec_status
            detail = self._rec_detail
            lists = self._recommendations
        if status is None:
            return json_response(
                {"status": "failed", "detail": "no recommendation job; POST /recommendation first"}
            )
        payload: dict = {"status": status}
        if detail:
            payload["detail"] = detail
        if status == "ready":
            payload["recommendations"] = [
                {"user": rec.user, "items": list(rec.items)} for rec in lists
            ]
        return json_response(payload)


def serve(kind: str, host: str = "127.0.0.1", port: int = 0, seed: int = 0):
    """Start a reference recommender service; returns the running AppServer."""
    from .httpd import AppServer

    service = RecommenderService(kind, seed=seed)
    server = AppServer(service.router, host=host, port=port)
    server.start()
    return server
