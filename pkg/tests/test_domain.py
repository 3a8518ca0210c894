import json
import math
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from reclab.domain import (
    ExperimentConfig,
    MetricsReport,
    Rating,
    RatingSet,
    RecommendationList,
    validate_config,
)

FIXTURES = Path(__file__).parent / "fixtures"


def default_config(**overrides):
    base = dict(
        dataset_id="ml100k",
        split_method="random",
        test_fraction=0.2,
        k=10,
        rating_threshold=3.0,
        recommender_ids=("random", "most_popular"),
        seed=7,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_default_config_is_valid():
    assert validate_config(default_config()) == []


def test_k_zero_violation_names_k():
    violations = validate_config(default_config(k=0))
    assert len(violations) == 1
    assert "k" in violations[0]


def test_empty_recommenders_violation():
    violations = validate_config(default_config(recommender_ids=()))
    assert len(violations) == 1
    assert "recommender_ids" in violations[0]


@pytest.mark.parametrize(
    "overrides",
    [
        {"test_fraction": 0.0},
        {"test_fraction": 1.0},
        {"test_fraction": -0.3},
        {"test_fraction": float("nan")},
        {"split_method": "leave-one-out"},
        {"recommender_ids": ("random", "random")},
        {"seed": -1},
        {"dataset_id": ""},
        {"rating_threshold": float("inf")},
        {"k": 2.5},
    ],
)
def test_invalid_configs_rejected(overrides):
    assert validate_config(default_config(**overrides))


def test_rating_invariants():
    with pytest.raises(ValueError):
        Rating(user="", item="a", value=1.0)
    with pytest.raises(ValueError):
        Rating(user="u", item="", value=1.0)
    with pytest.raises(ValueError):
        Rating(user="u", item="a", value=float("nan"))
    with pytest.raises(ValueError):
        Rating(user="u", item="a", value=1.0, timestamp=-5)
    assert Rating(user="u", item="a", value=1.0, timestamp=0).timestamp == 0


def test_rating_set_rejects_duplicate_pair():
    with pytest.raises(ValueError, match="duplicate"):
        RatingSet((Rating("u", "a", 1.0), Rating("u", "a", 2.0)))


def test_rating_set_indexes():
    rs = RatingSet((Rating("u", "a", 1.0), Rating("u", "b", 2.0), Rating("v", "a", 3.0)))
    assert rs.users == {"u", "v"}
    assert rs.items == {"a", "b"}
    assert [r.item for r in rs.by_user["u"]] == ["a", "b"]


def test_recommendation_list_rejects_duplicates():
    with pytest.raises(ValueError, match="duplicate"):
        RecommendationList(user="u", items=("a", "a"))


def test_metrics_report_bounds():
    with pytest.raises(ValueError):
        MetricsReport(1.5, 0, 0, 0, 0, None, 0)
    with pytest.raises(ValueError):
        MetricsReport(0, 0, 0, 0, -0.1, None, 0)
    with pytest.raises(ValueError):
        MetricsReport(0, 0, 0, 0, 0, 1.5, 0)
    report = MetricsReport(1.0, 0.5, 0.5, 0.5, 3.2, None, 0.25)
    assert MetricsReport.from_dict(report.to_dict()) == report


config_strategy = st.builds(
    ExperimentConfig,
    dataset_id=st.text(min_size=1, max_size=8),
    split_method=st.sampled_from(["random", "timestamp"]),
    test_fraction=st.floats(min_value=0.001, max_value=0.999, allow_nan=False),
    k=st.integers(min_value=1, max_value=100),
    rating_threshold=st.floats(allow_nan=False, allow_infinity=False, width=32),
    recommender_ids=st.lists(
        st.text(min_size=1, max_size=6), min_size=1, max_size=4, unique=True
    ).map(tuple),
    seed=st.integers(min_value=0, max_value=2**31),
)


@given(config_strategy)
def test_valid_config_roundtrips_through_json(config):
    # Persistence uses plain JSON; a config that validates must survive it.
    if validate_config(config):
        return
    restored = ExperimentConfig.from_dict(json.loads(json.dumps(config.to_dict())))
    assert restored == config


def test_shared_validation_fixture_cases():
    """The web console mirrors these exact cases; keep both sides honest."""
    cases = json.loads((FIXTURES / "config_cases.json").read_text())
    assert cases, "fixture list must not be empty"
    for case in cases:
        config = ExperimentConfig.from_dict(case["config"])
        violations = validate_config(config)
        assert (violations == []) == case["valid"], (case["name"], violations)
        for fieldname in case.get("fields", []):
            assert any(v.startswith(fieldname + ":") for v in violations), (
                case["name"],
                fieldname,
                violations,
            )


def test_config_float_fidelity():
    fraction = 0.1 + 0.2  # 0.30000000000000004; must survive persistence exactly
    config = default_config(test_fraction=fraction)
    restored = ExperimentConfig.from_dict(json.loads(json.dumps(config.to_dict())))
    assert restored.test_fraction == fraction
    assert math.isclose(restored.test_fraction, 0.3) and restored.test_fraction != 0.3
