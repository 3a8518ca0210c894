"""The evaluator-to-recommender wire contract and the evaluator-side client.

Lifecycle driven against every recommender, strictly in this order:

1. ``POST /model`` with ``{"training_set_uri": ..., "rating_threshold": ...}``
   (202, body ``{"status": "training"}``),
2. ``GET /model`` polled until ``{"status": "ready"}`` or ``"failed"``,
3. ``POST /recommendation`` with ``{"users": [...], "k": ...}`` (202,
   body ``{"status": "computing"}``),
4. ``GET /recommendation`` polled until ready, then
5. ``DELETE /model`` (204, best effort).

The training set travels as UTF-8 CSV with header ``user,item,value,timestamp``
(timestamp field empty when absent), streamed so million-rating sets never
need to fit in memory. Responses are schema-checked on the evaluator side;
lists that break protocol rules (items the user already rated in training,
duplicates, more than k entries) are sanitized and the drops are counted
per recommender instead of failing the experiment.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass
from typing import AbstractSet, Iterator, Mapping, TextIO

import requests

from .domain import Rating, RatingSet, RecommendationList

logger = logging.getLogger(__name__)

TRAINING_SET_HEADER = ("user", "item", "value", "timestamp")

MODEL_STATUSES = ("none", "training", "ready", "failed")
RECOMMEND_STATUSES = ("computing", "ready", "failed")


class ProtocolError(Exception):
    """A request could not be completed or a payload broke the wire schema."""


@dataclass(frozen=True)
class TrainRequest:
    training_set_uri: str
    rating_threshold: float


@dataclass(frozen=True)
class ModelStatus:
    status: str
    detail: str | None = None


@dataclass(frozen=True)
class RecommendRequest:
    users: tuple[str, ...]
    k: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "users", tuple(self.users))
        if not self.users:
            raise ValueError("recommendation request must name at least one user")
        if len(set(self.users)) != len(self.users):
            raise ValueError("recommendation request users must be duplicate-free")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class RawRecommendation:
    """One user's list exactly as it came off the wire, before sanitization."""

    user: str
    items: tuple[str, ...]


@dataclass(frozen=True)
class RecommendResponse:
    status: str
    recommendations: tuple[RawRecommendation, ...] | None = None
    detail: str | None = None


@dataclass
class ViolationCounts:
    """Tally of protocol violations dropped from one recommender's response."""

    already_rated: int = 0
    duplicate_item: int = 0
    overlong_list: int = 0
    unsolicited_user: int = 0
    duplicate_list: int = 0

    def total(self) -> int:
        return (
            self.already_rated
            + self.duplicate_item
            + self.overlong_list
            + self.unsolicited_user
            + self.duplicate_list
        )

    def to_dict(self) -> dict[str, int]:
        return {
            "already_rated": self.already_rated,
            "duplicate_item": self.duplicate_item,
            "overlong_list": self.overlong_list,
            "unsolicited_user": self.unsolicited_user,
            "duplicate_list": self.duplicate_list,
        }


@dataclass(frozen=True)
class ProtocolSettings:
    """Client-side knobs; every value is configurable, these are the defaults."""

    poll_interval: float = 2.0
    train_timeout: float = 3600.0
    recommend_timeout: float = 3600.0
    retries: int = 3
    backoff: float = 0.5
    request_timeout: float = 30.0


# --- training-set wire format -------------------------------------------


def serialize_training_set(
    ratings: RatingSet, chunk_bytes: int = 64 * 1024
) -> Iterator[bytes]:
    """Stream the training set as UTF-8 CSV chunks.

    Yields roughly ``chunk_bytes``-sized pieces; the full serialization is
    never held in memory. Float values use their shortest round-trip
    representation so parsing the stream reproduces the set exactly.
    """
    buf = io.StringIO()
    writer = csv.writer(buf)  # RFC 4180 defaults: CRLF records, minimal quoting
    writer.writerow(TRAINING_SET_HEADER)
    for r in ratings:
        writer.writerow(
            [
                r.user,
                r.item,
                repr(float(r.value)),
                "" if r.timestamp is None else str(r.timestamp),
            ]
        )
        if buf.tell() >= chunk_bytes:
            yield buf.getvalue().encode("utf-8")
            buf.seek(0)
            buf.truncate()
    if buf.tell():
        yield buf.getvalue().encode("utf-8")


def parse_training_set(stream: TextIO) -> RatingSet:
    """Parse the training-set CSV stream back into a RatingSet."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if header != list(TRAINING_SET_HEADER):
        raise ProtocolError(f"bad training-set header: {header!r}")
    ratings = []
    for row in reader:
        if len(row) != 4:
            raise ProtocolError(f"bad training-set row: {row!r}")
        user, item, value, ts = row
        try:
            ratings.append(
                Rating(
                    user=user,
                    item=item,
                    value=float(value),
                    timestamp=int(ts) if ts else None,
                )
            )
        except ValueError as exc:
            raise ProtocolError(f"bad training-set row {row!r}: {exc}") from exc
    return RatingSet(tuple(ratings))


# --- HTTP client ----------------------------------------------------------


def _request(
    method: str, url: str, settings: ProtocolSettings, json_body=None
) -> requests.Response:
    """Issue one request, retrying network failures with exponential backoff."""
    last_error: Exception | None = None
    for attempt in range(settings.retries + 1):
        try:
            return requests.request(
                method, url, json=json_body, timeout=settings.request_timeout
            )
        except requests.RequestException as exc:
            last_error = exc
            if attempt < settings.retries:
                time.sleep(settings.backoff * (2**attempt))
    raise ProtocolError(
        f"{method} {url} failed after {settings.retries + 1} attempts: {last_error}"
    )


def _parse_model_status(payload) -> ModelStatus:
    if not isinstance(payload, dict) or payload.get("status") not in MODEL_STATUSES:
        raise ProtocolError(f"invalid model status payload: {payload!r}")
    detail = payload.get("detail")
    if detail is not None and not isinstance(detail, str):
        raise ProtocolError(f"model status detail must be a string: {detail!r}")
    if payload["status"] == "failed" and not detail:
        detail = "recommender reported failure without detail"
    return ModelStatus(status=payload["status"], detail=detail)


def _parse_recommend_payload(payload) -> RecommendResponse:
    if not isinstance(payload, dict) or payload.get("status") not in RECOMMEND_STATUSES:
        raise ProtocolError(f"invalid recommendation status payload: {payload!r}")
    status = payload["status"]
    detail = payload.get("detail")
    if detail is not None and not isinstance(detail, str):
        raise ProtocolError(f"recommendation detail must be a string: {detail!r}")
    recommendations = None
    if status == "ready":
        raw = payload.get("recommendations")
        if not isinstance(raw, list):
            raise ProtocolError("ready response carries no recommendations array")
        parsed = []
        for entry in raw:
            if (
                not isinstance(entry, dict)
                or not isinstance(entry.get("user"), str)
                or not isinstance(entry.get("items"), list)
                or any(not isinstance(i, str) for i in entry["items"])
            ):
                raise ProtocolError(f"malformed recommendation entry: {entry!r}")
            parsed.append(RawRecommendation(user=entry["user"], items=tuple(entry["items"])))
        recommendations = tuple(parsed)
    return RecommendResponse(status=status, recommendations=recommendations, detail=detail)


def train_remote(
    base_uri: str, req: TrainRequest, settings: ProtocolSettings = ProtocolSettings()
) -> ModelStatus:
    """Ask a recommender to train a model and poll until a terminal status.

    Returns ready, or failed with a detail string; a timeout yields
    failed/"training timeout". Never raises for remote misbehavior.
    """
    base = base_uri.rstrip("/")
    body = {
        "training_set_uri": req.training_set_uri,
        "rating_threshold": req.rating_threshold,
    }
    try:
        resp = _request("POST", base + "/model", settings, json_body=body)
    except ProtocolError as exc:
        return ModelStatus("failed", str(exc))
    if resp.status_code != 202:
        return ModelStatus(
            "failed", f"model creation returned HTTP {resp.status_code}"
        )

    deadline = time.monotonic() + settings.train_timeout
    while time.monotonic() < deadline:
        time.sleep(settings.poll_interval)
        try:
            resp = _request("GET", base + "/model", settings)
            status = _parse_model_status(resp.json())
        except (ProtocolError, ValueError) as exc:
            return ModelStatus("failed", f"model status poll failed: {exc}")
        if status.status == "ready":
            return status
        if status.status == "failed":
            return status
        if status.status == "none":
            return ModelStatus("failed", "recommender reports no model after creation")
    return ModelStatus("failed", "training timeout")


def recommend_remote(
    base_uri: str, req: RecommendRequest, settings: ProtocolSettings = ProtocolSettings()
) -> RecommendResponse:
    """Request top-k lists for the given users and poll until terminal.

    On ready, the response is completeness-checked: a missing user turns the
    whole response into a failure naming that user. Item-level violations
    are left to :func:`sanitize_recommendations`.
    """
    base = base_uri.rstrip("/")
    body = {"users": list(req.users), "k": req.k}
    try:
        resp = _request("POST", base + "/recommendation", settings, json_body=body)
    except ProtocolError as exc:
        return RecommendResponse("failed", detail=str(exc))
    if resp.status_code != 202:
        return RecommendResponse(
            "failed", detail=f"recommendation request returned HTTP {resp.status_code}"
        )

    deadline = time.monotonic() + settings.recommend_timeout
    while time.monotonic() < deadline:
        time.sleep(settings.poll_interval)
        try:
            resp = _request("GET", base + "/recommendation", settings)
            parsed = _parse_recommend_payload(resp.json())
        except (ProtocolError, ValueError) as exc:
            return RecommendResponse("failed", detail=f"recommendation poll failed: {exc}")
        if parsed.status == "computing":
            continue
        if parsed.status == "failed":
            return parsed
        answered = {raw.user for raw in parsed.recommendations or ()}
        missing = [u for u in req.users if u not in answered]
        if missing:
            return RecommendResponse(
                "failed",
                detail=f"response omitted users: {', '.join(missing[:10])}",
            )
        return parsed
    return RecommendResponse("failed", detail="recommendation timeout")


def sanitize_recommendations(
    response: RecommendResponse,
    req: RecommendRequest,
    seen: Mapping[str, AbstractSet[str]],
) -> tuple[dict[str, RecommendationList], ViolationCounts]:
    """Drop protocol-violating entries and count what was dropped.

    ``seen`` maps each user to the items they rated in the training set.
    Per list, duplicate occurrences go first, then items the user already
    rated; whatever still exceeds k is truncated. Lists for users that were
    never requested are discarded whole. Users the response legitimately
    answered with nothing get an empty list so metric code always sees one
    list per test user.
    """
    if response.status != "ready" or response.recommendations is None:
        raise ValueError("only ready responses can be sanitized")
    requested = set(req.users)
    counts = ViolationCounts()
    out: dict[str, RecommendationList] = {}
    for raw in response.recommendations:
        if raw.user not in requested:
            counts.unsolicited_user += 1
            continue
        if raw.user in out:
            counts.duplicate_list += 1
            continue
        kept: list[str] = []
        encountered: set[str] = set()
        user_seen = seen.get(raw.user, frozenset())
        for item in raw.items:
            if item in encountered:
                counts.duplicate_item += 1
                continue
            encountered.add(item)
            if item in user_seen:
                counts.already_rated += 1
                continue
            kept.append(item)
        if len(kept) > req.k:
            counts.overlong_list += len(kept) - req.k
            kept = kept[: req.k]
        out[raw.user] = RecommendationList(user=raw.user, items=tuple(kept))
    for user in req.users:
        if user not in out:
            out[user] = RecommendationList(user=user, items=())
    if counts.total():
        logger.warning("sanitized recommendation response: %s", counts.to_dict())
    return out, counts


def delete_model(
    base_uri: str, settings: ProtocolSettings = ProtocolSettings()
) -> bool:
    """Best-effort model teardown; returns True when the recommender confirmed.

    Failures are logged, never raised: a recommender that cannot be cleaned
    up must not take the experiment's results down with it.
    """
    base = base_uri.rstrip("/")
    try:
        resp = _request("DELETE", base + "/model", settings)
    except ProtocolError as exc:
        logger.warning("model teardown failed for %s: %s", base_uri, exc)
        return False
    if resp.status_code not in (200, 204):
        logger.warning(
            "model teardown for %s returned HTTP %s", base_uri, resp.status_code
        )
        return False
    return True
