import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reclab.datasets import DatasetDescriptor
from reclab.domain import Rating, RatingSet
from reclab.synthetic import synthetic_ratings, write_movielens_100k


def make_ratings(rows):
    """rows: iterable of (user, item, value) or (user, item, value, ts)."""
    ratings = []
    for row in rows:
        user, item, value = row[0], row[1], row[2]
        ts = row[3] if len(row) > 3 else None
        ratings.append(Rating(user=user, item=item, value=float(value), timestamp=ts))
    return RatingSet(tuple(ratings))


@pytest.fixture
def tiny_train():
    return make_ratings(
        [
            ("u1", "a", 5),
            ("u1", "b", 4),
            ("u2", "a", 4),
            ("u2", "c", 2),
            ("u3", "b", 5),
            ("u3", "c", 5),
            ("u3", "d", 1),
        ]
    )


@pytest.fixture
def tiny_test():
    return make_ratings(
        [
            ("u1", "c", 5),
            ("u1", "d", 2),
            ("u2", "b", 4),
            ("u3", "a", 1),
        ]
    )


@pytest.fixture(scope="session")
def synthetic_dataset(tmp_path_factory):
    """The bundled 5000-rating MovieLens-style clone, written once per session."""
    path = tmp_path_factory.mktemp("data") / "u.data"
    write_movielens_100k(path, synthetic_ratings())
    return DatasetDescriptor(id="synthetic", format="movielens_100k", path=str(path))
