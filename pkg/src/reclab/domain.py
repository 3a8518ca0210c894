"""Core value types shared by every part of the evaluation framework.

Everything in this module is immutable after construction and safe to share
across threads. Types whose invariants must always hold enforce them in
``__post_init__``; experiment configurations are deliberately permissive at
construction time so that :func:`validate_config` can report every problem
at once instead of raising on the first one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping

SPLIT_METHODS = ("random", "timestamp")


@dataclass(frozen=True)
class Rating:
    """A single feedback event: a user assigned a numeric value to an item."""

    user: str
    item: str
    value: float
    timestamp: int | None = None

    def __post_init__(self) -> None:
        if not self.user or "\x00" in self.user:
            raise ValueError("rating user id must be non-empty and NUL-free")
        if not self.item or "\x00" in self.item:
            raise ValueError("rating item id must be non-empty and NUL-free")
        if not math.isfinite(self.value):
            raise ValueError(f"rating value must be finite, got {self.value!r}")
        if self.timestamp is not None and self.timestamp < 0:
            raise ValueError(f"rating timestamp must be >= 0, got {self.timestamp}")


@dataclass(frozen=True)
class RatingSet:
    """An ordered sequence of ratings with at most one entry per (user, item)."""

    ratings: tuple[Rating, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ratings", tuple(self.ratings))
        pairs: set[tuple[str, str]] = set()
        for r in self.ratings:
            key = (r.user, r.item)
            if key in pairs:
                raise ValueError(
                    f"duplicate rating for user {r.user!r}, item {r.item!r}"
                )
            pairs.add(key)

    def __len__(self) -> int:
        return len(self.ratings)

    def __iter__(self) -> Iterator[Rating]:
        return iter(self.ratings)

    @cached_property
    def users(self) -> frozenset[str]:
        return frozenset(r.user for r in self.ratings)

    @cached_property
    def items(self) -> frozenset[str]:
        return frozenset(r.item for r in self.ratings)

    @cached_property
    def by_user(self) -> Mapping[str, tuple[Rating, ...]]:
        grouped: dict[str, list[Rating]] = {}
        for r in self.ratings:
            grouped.setdefault(r.user, []).append(r)
        return {user: tuple(rs) for user, rs in grouped.items()}


@dataclass(frozen=True)
class ExperimentConfig:
    """The experimenter-chosen parameters of one evaluation run.

    Invalid values are accepted here and surfaced by :func:`validate_config`,
    so a request carrying several mistakes can be rejected with a full list
    of violations.
    """

    dataset_id: str
    split_method: str
    test_fraction: float
    k: int
    rating_threshold: float
    recommender_ids: tuple[str, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "recommender_ids", tuple(self.recommender_ids))

    def to_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "split_method": self.split_method,
            "test_fraction": self.test_fraction,
            "k": self.k,
            "rating_threshold": self.rating_threshold,
            "recommender_ids": list(self.recommender_ids),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ExperimentConfig":
        try:
            return cls(
                dataset_id=data["dataset_id"],
                split_method=data["split_method"],
                test_fraction=data["test_fraction"],
                k=data["k"],
                rating_threshold=data["rating_threshold"],
                recommender_ids=tuple(data["recommender_ids"]),
                seed=data.get("seed", 0),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed experiment config: {exc}") from exc


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def validate_config(config: ExperimentConfig) -> list[str]:
    """Check every config invariant, returning one message per violation.

    An empty list means the configuration is acceptable. Registry membership
    (does the dataset exist, are the recommenders registered) is checked at
    submission time, not here.
    """
    violations: list[str] = []
    if not config.dataset_id or not isinstance(config.dataset_id, str):
        violations.append("dataset_id: must be a non-empty identifier")
    if config.split_method not in SPLIT_METHODS:
        violations.append(
            f"split_method: must be one of {', '.join(SPLIT_METHODS)}; "
            f"got {config.split_method!r}"
        )
    if not _is_number(config.test_fraction) or not (0 < config.test_fraction < 1):
        violations.append(
            f"test_fraction: must lie strictly between 0 and 1; got {config.test_fraction!r}"
        )
    if not isinstance(config.k, int) or isinstance(config.k, bool) or config.k < 1:
        violations.append(f"k: must be a positive integer; got {config.k!r}")
    if not _is_number(config.rating_threshold) or not math.isfinite(config.rating_threshold):
        violations.append(
            f"rating_threshold: must be a finite number; got {config.rating_threshold!r}"
        )
    if not config.recommender_ids:
        violations.append("recommender_ids: at least one recommender must be selected")
    else:
        duplicates = sorted(
            {rid for rid in config.recommender_ids if config.recommender_ids.count(rid) > 1}
        )
        if duplicates:
            violations.append(f"recommender_ids: duplicate entries {duplicates}")
        if any(not rid or not isinstance(rid, str) for rid in config.recommender_ids):
            violations.append("recommender_ids: identifiers must be non-empty strings")
    if not isinstance(config.seed, int) or isinstance(config.seed, bool) or config.seed < 0:
        violations.append(f"seed: must be a non-negative integer; got {config.seed!r}")
    return violations


@dataclass(frozen=True)
class RecommendationList:
    """Ordered top-k suggestions for one user; position 0 is the top pick."""

    user: str
    items: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        if len(set(self.items)) != len(self.items):
            raise ValueError(
                f"recommendation list for user {self.user!r} contains duplicate items"
            )


_UNIT_INTERVAL_METRICS = ("coverage", "precision", "recall", "ndcg", "serendipity")


@dataclass(frozen=True)
class MetricsReport:
    """The seven ranking-quality measures for one recommender in one experiment.

    ``diversity`` is ``None`` when k == 1, where pairwise dissimilarity is
    undefined.
    """

    coverage: float
    precision: float
    recall: float
    ndcg: float
    novelty: float
    diversity: float | None
    serendipity: float

    def __post_init__(self) -> None:
        for name in _UNIT_INTERVAL_METRICS:
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.novelty < 0:
            raise ValueError(f"novelty must be >= 0, got {self.novelty}")
        if self.diversity is not None and not (0.0 <= self.diversity <= 1.0):
            raise ValueError(f"diversity must lie in [0, 1], got {self.diversity}")

    def to_dict(self) -> dict:
        return {
            "coverage": self.coverage,
            "precision": self.precision,
            "recall": self.recall,
            "ndcg": self.ndcg,
            "novelty": self.novelty,
            "diversity": self.diversity,
            "serendipity": self.serendipity,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "MetricsReport":
        return cls(
            coverage=data["coverage"],
            precision=data["precision"],
            recall=data["recall"],
            ndcg=data["ndcg"],
            novelty=data["novelty"],
            diversity=data["diversity"],
            serendipity=data["serendipity"],
        )


METRIC_COLUMNS = (
    "coverage",
    "precision",
    "recall",
    "ndcg",
    "novelty",
    "diversity",
    "serendipity",
)
