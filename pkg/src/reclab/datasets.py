"""Dataset parsing and train/test splitting.

Three concrete file formats are supported out of the box, plus a
configurable CSV format so new datasets only require a registry entry:

* ``movielens_100k``: ``user<TAB>item<TAB>rating<TAB>timestamp``, no header.
* ``movielens_1m``: ``user::item::rating::timestamp``, no header.
* ``hetrec_lastfm``: ``userID<TAB>artistID<TAB>weight``, one header line,
  no timestamps (the weight is a listening count).
* ``generic_csv``: configurable delimiter, columns
  ``user,item,value[,timestamp]``, optional header line.
"""

from __future__ import annotations

import csv
import logging
import math
import random
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .domain import Rating, RatingSet

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

DATASET_FORMATS = ("movielens_100k", "movielens_1m", "hetrec_lastfm", "generic_csv")

# A parse failure rate above this fraction signals a format mismatch rather
# than a few dirty lines.
MALFORMED_FRACTION_LIMIT = 0.01


class DatasetError(Exception):
    """Raised for unusable dataset files or descriptors."""


@dataclass(frozen=True)
class DatasetDescriptor:
    """Registry entry describing where and how to read one dataset."""

    id: str
    format: str
    path: str
    has_timestamps: bool | None = None
    delimiter: str = ","
    has_header: bool = False

    def __post_init__(self) -> None:
        if self.format not in DATASET_FORMATS:
            raise ValueError(
                f"dataset {self.id!r}: unknown format {self.format!r}; "
                f"expected one of {', '.join(DATASET_FORMATS)}"
            )
        if self.has_timestamps is None:
            default = self.format in ("movielens_100k", "movielens_1m")
            object.__setattr__(self, "has_timestamps", default)
        if self.format == "hetrec_lastfm" and self.has_timestamps:
            raise ValueError(
                f"dataset {self.id!r}: hetrec_lastfm carries no timestamps"
            )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "format": self.format,
            "path": str(self.path),
            "has_timestamps": self.has_timestamps,
        }


@dataclass(frozen=True)
class Split:
    """A partition of a rating set: every source rating lands in exactly one side."""

    train: RatingSet
    test: RatingSet


@dataclass
class LoadReport:
    """Warning tallies collected while reading a dataset file."""

    malformed_lines: int = 0
    duplicate_pairs: int = 0


def _parse_movielens_100k(line: str) -> Rating:
    user, item, value, ts = line.split("\t")
    return Rating(user=user, item=item, value=float(value), timestamp=int(ts))


def _parse_movielens_1m(line: str) -> Rating:
    user, item, value, ts = line.split("::")
    return Rating(user=user, item=item, value=float(value), timestamp=int(ts))


def _parse_hetrec_lastfm(line: str) -> Rating:
    user, item, value = line.split("\t")
    return Rating(user=user, item=item, value=float(value), timestamp=None)


_LINE_PARSERS: dict[str, Callable[[str], Rating]] = {
    "movielens_100k": _parse_movielens_100k,
    "movielens_1m": _parse_movielens_1m,
    "hetrec_lastfm": _parse_hetrec_lastfm,
}


def _iter_line_format(descriptor: DatasetDescriptor, path: Path, report: LoadReport):
    parse = _LINE_PARSERS[descriptor.format]
    skip_header = descriptor.format == "hetrec_lastfm"
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle):
            if skip_header and lineno == 0:
                continue
            line = raw.rstrip("\r\n")
            if not line:
                continue
            try:
                yield parse(line)
            except (ValueError, IndexError):
                report.malformed_lines += 1


def _iter_generic_csv(descriptor: DatasetDescriptor, path: Path, report: LoadReport):
    expected = 4 if descriptor.has_timestamps else 3
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle, delimiter=descriptor.delimiter)
        for rowno, row in enumerate(reader):
            if descriptor.has_header and rowno == 0:
                continue
            if not row:
                continue
            if len(row) != expected:
                report.malformed_lines += 1
                continue
            try:
                ts = None
                if descriptor.has_timestamps:
                    ts = int(row[3]) if row[3] != "" else None
                yield Rating(user=row[0], item=row[1], value=float(row[2]), timestamp=ts)
            except ValueError:
                report.malformed_lines += 1


def load_dataset_with_report(descriptor: DatasetDescriptor) -> tuple[RatingSet, LoadReport]:
    """Read a dataset file into a RatingSet, tallying skipped lines.

    Duplicate (user, item) pairs keep the value of the last occurrence; the
    pair stays at its first position in the sequence. A malformed-line
    fraction above ``MALFORMED_FRACTION_LIMIT`` aborts the load, since that
    almost always means the declared format is wrong.
    """
    path = Path(descriptor.path)
    if not path.is_file():
        raise DatasetError(f"dataset {descriptor.id!r}: file not found: {path}")

    report = LoadReport()
    if descriptor.format == "generic_csv":
        rows = _iter_generic_csv(descriptor, path, report)
    else:
        rows = _iter_line_format(descriptor, path, report)

    kept: dict[tuple[str, str], Rating] = {}
    parsed = 0
    for rating in rows:
        parsed += 1
        kept[(rating.user, rating.item)] = rating
    report.duplicate_pairs = parsed - len(kept)

    total = parsed + report.malformed_lines
    if total and report.malformed_lines / total > MALFORMED_FRACTION_LIMIT:
        raise DatasetError(
            f"dataset {descriptor.id!r}: {report.malformed_lines} of {total} lines "
            f"are malformed; the file does not match format {descriptor.format!r}"
        )
    if report.malformed_lines:
        logger.warning(
            "dataset %s: skipped %d malformed line(s)", descriptor.id, report.malformed_lines
        )
    if report.duplicate_pairs:
        logger.warning(
            "dataset %s: collapsed %d duplicate (user, item) pair(s), keeping the last value",
            descriptor.id,
            report.duplicate_pairs,
        )
    return RatingSet(tuple(kept.values())), report


def load_dataset(descriptor: DatasetDescriptor) -> RatingSet:
    """Read a dataset file into a RatingSet; see :func:`load_dataset_with_report`."""
    ratings, _ = load_dataset_with_report(descriptor)
    return ratings


def split_random(ratings: RatingSet, test_fraction: float, seed: int) -> Split:
    """Assign each rating independently to the test set with probability ``test_fraction``.

    The draw sequence is fully determined by ``seed``, so identical inputs
    produce identical splits. The realized test size fluctuates around the
    requested fraction; callers record the realized sizes.
    """
    if not (0 < test_fraction < 1):
        raise ValueError(f"test_fraction must lie strictly between 0 and 1, got {test_fraction}")
    rng = random.Random(seed)
    train: list[Rating] = []
    test: list[Rating] = []
    for r in ratings:
        (test if rng.random() < test_fraction else train).append(r)
    return Split(train=RatingSet(tuple(train)), test=RatingSet(tuple(test)))


def split_timestamp(ratings: RatingSet, test_fraction: float) -> Split:
    """Send the oldest ratings to train and the newest to test.

    Ratings are ordered by timestamp ascending, ties broken by their position
    in the source sequence, and the first ``ceil((1 - test_fraction) * n)``
    go to the training set. Both halves come out in that sorted order, which
    makes the split byte-identical under any shuffling of the input when all
    timestamps are distinct.
    """
    if not (0 < test_fraction < 1):
        raise ValueError(f"test_fraction must lie strictly between 0 and 1, got {test_fraction}")
    missing = sum(1 for r in ratings if r.timestamp is None)
    if missing:
        raise DatasetError(
            f"{missing} rating(s) lack timestamps; the timestamp split method "
            "needs every rating stamped (pick the random split for such datasets)"
        )
    order = sorted(range(len(ratings)), key=lambda i: (ratings.ratings[i].timestamp, i))
    n_train = math.ceil((1 - test_fraction) * len(ratings))
    train = tuple(ratings.ratings[i] for i in order[:n_train])
    test = tuple(ratings.ratings[i] for i in order[n_train:])
    return Split(train=RatingSet(train), test=RatingSet(test))


def positive_items(ratings: RatingSet, user: str, threshold: float) -> frozenset[str]:
    """Items the user rated strictly above the threshold; empty for unknown users."""
    return frozenset(
        r.item for r in ratings.by_user.get(user, ()) if r.value > threshold
    )


def read_dataset_registry(path: str | Path) -> dict[str, DatasetDescriptor]:
    """Parse the dataset registry file (TOML, one table per dataset id).

    Relative dataset paths are resolved against the registry file's
    directory, so a config tree can be moved as a unit.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset registry not found: {path}")
    with open(path, "rb") as handle:
        raw = tomllib.load(handle)
    registry: dict[str, DatasetDescriptor] = {}
    for dataset_id, entry in raw.items():
        if not isinstance(entry, dict):
            raise DatasetError(
                f"dataset registry {path}: entry {dataset_id!r} must be a table"
            )
        unknown = set(entry) - {"format", "path", "has_timestamps", "delimiter", "has_header"}
        if unknown:
            raise DatasetError(
                f"dataset registry {path}: entry {dataset_id!r} has unknown keys {sorted(unknown)}"
            )
        try:
            fmt = entry["format"]
            raw_path = Path(entry["path"])
        except KeyError as exc:
            raise DatasetError(
                f"dataset registry {path}: entry {dataset_id!r} is missing key {exc}"
            ) from exc
        if not raw_path.is_absolute():
            raw_path = path.parent / raw_path
        try:
            registry[dataset_id] = DatasetDescriptor(
                id=dataset_id,
                format=fmt,
                path=str(raw_path),
                has_timestamps=entry.get("has_timestamps"),
                delimiter=entry.get("delimiter", ","),
                has_header=entry.get("has_header", False),
            )
        except ValueError as exc:
            raise DatasetError(f"dataset registry {path}: {exc}") from exc
    return registry
