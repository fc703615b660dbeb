from .models import (
    MleResult,
    PartialRanking,
    PreferenceVector,
    RankingDataset,
    ThurstoneNoise,
    WeightedPair,
)
from .request_models import ExperimentConfig, MleOptions, StepRule
from .response_models import BoundReport, ExperimentRow, GraphStats

__all__ = [
    "BoundReport",
    "ExperimentConfig",
    "ExperimentRow",
    "GraphStats",
    "MleOptions",
    "MleResult",
    "PartialRanking",
    "PreferenceVector",
    "RankingDataset",
    "StepRule",
    "ThurstoneNoise",
    "WeightedPair",
]
