import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reclab.datasets import (
    DatasetDescriptor,
    DatasetError,
    load_dataset,
    load_dataset_with_report,
    positive_items,
    read_dataset_registry,
    split_random,
    split_timestamp,
)
from reclab.domain import Rating, RatingSet
from reclab.protocol import serialize_training_set

from conftest import make_ratings


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_movielens_100k_line(tmp_path):
    path = write(tmp_path, "u.data", "196\t242\t3\t881250949\n")
    rs = load_dataset(DatasetDescriptor(id="d", format="movielens_100k", path=path))
    assert rs.ratings == (Rating("196", "242", 3.0, 881250949),)


def test_movielens_1m_line(tmp_path):
    path = write(tmp_path, "ratings.dat", "1::1193::5::978300760\n")
    rs = load_dataset(DatasetDescriptor(id="d", format="movielens_1m", path=path))
    assert rs.ratings == (Rating("1", "1193", 5.0, 978300760),)


def test_hetrec_lastfm_line_and_header_skip(tmp_path):
    path = write(tmp_path, "user_artists.dat", "userID\tartistID\tweight\n2\t51\t13883\n")
    rs = load_dataset(DatasetDescriptor(id="d", format="hetrec_lastfm", path=path))
    assert rs.ratings == (Rating("2", "51", 13883.0, None),)


def test_generic_csv_with_header_and_empty_timestamp(tmp_path):
    path = write(tmp_path, "r.csv", "user,item,value,timestamp\nu,i,4.5,\nv,j,2,100\n")
    descriptor = DatasetDescriptor(
        id="d", format="generic_csv", path=path, has_timestamps=True, has_header=True
    )
    rs = load_dataset(descriptor)
    assert rs.ratings == (Rating("u", "i", 4.5, None), Rating("v", "j", 2.0, 100))


def test_missing_file_raises(tmp_path):
    with pytest.raises(DatasetError, match="not found"):
        load_dataset(DatasetDescriptor(id="d", format="movielens_100k", path=str(tmp_path / "nope")))


def test_malformed_lines_tallied_below_limit(tmp_path):
    good = "".join(f"{u}\t{u}\t3\t1000\n" for u in range(1, 200))
    path = write(tmp_path, "u.data", good + "garbage line\n")
    rs, report = load_dataset_with_report(
        DatasetDescriptor(id="d", format="movielens_100k", path=path)
    )
    assert report.malformed_lines == 1
    assert len(rs) == 199


def test_malformed_fraction_above_one_percent_errors(tmp_path):
    path = write(tmp_path, "u.data", "1::2::3::4\n" * 50)  # wrong separators throughout
    with pytest.raises(DatasetError, match="malformed"):
        load_dataset(DatasetDescriptor(id="d", format="movielens_100k", path=path))


def test_duplicate_pairs_keep_last_value(tmp_path):
    path = write(tmp_path, "u.data", "1\t9\t2\t100\n1\t9\t5\t200\n")
    rs, report = load_dataset_with_report(
        DatasetDescriptor(id="d", format="movielens_100k", path=path)
    )
    assert report.duplicate_pairs == 1
    assert rs.ratings == (Rating("1", "9", 5.0, 200),)


def test_hetrec_descriptor_rejects_timestamps():
    with pytest.raises(ValueError, match="timestamp"):
        DatasetDescriptor(id="d", format="hetrec_lastfm", path="x", has_timestamps=True)


def test_descriptor_timestamp_defaults():
    assert DatasetDescriptor(id="a", format="movielens_100k", path="x").has_timestamps
    assert not DatasetDescriptor(id="b", format="hetrec_lastfm", path="x").has_timestamps
    assert not DatasetDescriptor(id="c", format="generic_csv", path="x").has_timestamps


# --- splitting ---------------------------------------------------------------


def test_split_random_degenerate_fraction():
    rs = make_ratings([(f"u{n}", f"i{n}", 3) for n in range(100)])
    split = split_random(rs, 1e-12, seed=0)
    assert len(split.test) == 0
    assert len(split.train) == 100


def test_split_random_matches_bernoulli_oracle():
    rs = make_ratings([(f"u{n}", f"i{n}", 3) for n in range(10_000)])
    split = split_random(rs, 0.2, seed=42)
    rng = random.Random(42)
    expected_test = sum(1 for _ in range(10_000) if rng.random() < 0.2)
    assert len(split.test) == expected_test
    assert 0.18 <= len(split.test) / 10_000 <= 0.22


def test_split_random_deterministic():
    rs = make_ratings([(f"u{n}", f"i{n}", n % 5 + 1) for n in range(500)])
    first = split_random(rs, 0.3, seed=9)
    second = split_random(rs, 0.3, seed=9)
    assert first.train.ratings == second.train.ratings
    assert first.test.ratings == second.test.ratings
    different = split_random(rs, 0.3, seed=10)
    assert different.test.ratings != first.test.ratings


def test_split_random_rejects_bad_fraction():
    rs = make_ratings([("u", "i", 3)])
    with pytest.raises(ValueError):
        split_random(rs, 0.0, seed=0)
    with pytest.raises(ValueError):
        split_random(rs, 1.0, seed=0)


def test_split_timestamp_ordering():
    rs = make_ratings([(f"u{n}", f"i{n}", 3, n + 1) for n in range(10)])
    split = split_timestamp(rs, 0.2)
    assert [r.timestamp for r in split.train] == [1, 2, 3, 4, 5, 6, 7, 8]
    assert [r.timestamp for r in split.test] == [9, 10]


def test_split_timestamp_tie_break_is_file_order():
    rs = make_ratings([(f"u{n}", "i", 3, 7) for n in range(4)])
    split = split_timestamp(rs, 0.5)
    assert [r.user for r in split.train] == ["u0", "u1"]
    assert [r.user for r in split.test] == ["u2", "u3"]


def test_split_timestamp_requires_timestamps():
    rs = make_ratings([("u", "i", 3), ("v", "j", 2, 10)])
    with pytest.raises(DatasetError, match="timestamp"):
        split_timestamp(rs, 0.5)


def test_split_timestamp_shuffle_invariant():
    ratings = [Rating(f"u{n}", f"i{n}", 3.0, 1000 + 7 * n) for n in range(50)]
    shuffled = list(ratings)
    random.Random(3).shuffle(shuffled)
    a = split_timestamp(RatingSet(tuple(ratings)), 0.25)
    b = split_timestamp(RatingSet(tuple(shuffled)), 0.25)
    assert a.train.ratings == b.train.ratings
    assert a.test.ratings == b.test.ratings


rating_lists = st.lists(
    st.tuples(
        st.integers(0, 20),
        st.integers(0, 30),
        st.integers(1, 5),
        st.integers(0, 10_000),
    ),
    min_size=1,
    max_size=150,
    unique_by=lambda t: (t[0], t[1]),
)


@given(rating_lists, st.floats(0.05, 0.95), st.integers(0, 2**30))
@settings(max_examples=60, deadline=None)
def test_partition_property_both_methods(rows, fraction, seed):
    rs = RatingSet(
        tuple(Rating(f"u{u}", f"i{i}", float(v), ts) for (u, i, v, ts) in rows)
    )
    source = Counter((r.user, r.item, r.value, r.timestamp) for r in rs)
    for split in (split_random(rs, fraction, seed), split_timestamp(rs, fraction)):
        assert len(split.train) + len(split.test) == len(rs)
        combined = Counter(
            (r.user, r.item, r.value, r.timestamp)
            for r in list(split.train) + list(split.test)
        )
        assert combined == source


def test_positive_items_strict_threshold():
    rs = make_ratings([("u", "a", 2), ("u", "b", 3), ("u", "c", 4), ("u", "d", 5)])
    assert positive_items(rs, "u", 3) == {"c", "d"}


def test_positive_items_zero_threshold_counts():
    rs = make_ratings([("u", "x", 1), ("u", "y", 13883)])
    assert positive_items(rs, "u", 0) == {"x", "y"}


def test_positive_items_unknown_user():
    rs = make_ratings([("u", "a", 5)])
    assert positive_items(rs, "ghost", 3) == frozenset()


# --- registry and round-trip ---------------------------------------------------


def test_read_dataset_registry(tmp_path):
    (tmp_path / "u.data").write_text("1\t2\t3\t4\n")
    registry_file = tmp_path / "datasets.toml"
    registry_file.write_text(
        '[ml100k]\nformat = "movielens_100k"\npath = "u.data"\n'
        '\n[songs]\nformat = "generic_csv"\npath = "songs.csv"\ndelimiter = ";"\nhas_header = true\n'
    )
    registry = read_dataset_registry(registry_file)
    assert set(registry) == {"ml100k", "songs"}
    assert registry["ml100k"].path == str(tmp_path / "u.data")
    assert registry["songs"].delimiter == ";"


def test_registry_rejects_unknown_keys(tmp_path):
    registry_file = tmp_path / "datasets.toml"
    registry_file.write_text('[d]\nformat = "movielens_100k"\npath = "u"\nbogus = 1\n')
    with pytest.raises(DatasetError, match="unknown keys"):
        read_dataset_registry(registry_file)


def test_wire_format_roundtrips_through_generic_csv(tmp_path, tiny_train):
    payload = b"".join(serialize_training_set(tiny_train))
    path = tmp_path / "wire.csv"
    path.write_bytes(payload)
    descriptor = DatasetDescriptor(
        id="wire", format="generic_csv", path=str(path), has_timestamps=True, has_header=True
    )
    assert load_dataset(descriptor).ratings == tiny_train.ratings
