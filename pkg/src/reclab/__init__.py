"""Distributed, accountable offline evaluation of top-k recommenders."""

__version__ = "0.1.0"

from .domain import (
    ExperimentConfig,
    MetricsReport,
    Rating,
    RatingSet,
    RecommendationList,
    validate_config,
)

__all__ = [
    "ExperimentConfig",
    "MetricsReport",
    "Rating",
    "RatingSet",
    "RecommendationList",
    "validate_config",
    "__version__",
]
