from .types import FeatureSource, FeatureKind, FeatureDef
from .extractors import (
    log_length,
    position_indicator,
    unique_token_ratio,
    flesch_reading_ease,
    count_syllables,
)
from .engine import feature_value, feature_gap, extract_features

__all__ = [
    "FeatureSource", "FeatureKind", "FeatureDef",
    "log_length", "position_indicator", "unique_token_ratio", "flesch_reading_ease", "count_syllables",
    "feature_value", "feature_gap", "extract_features",
]
