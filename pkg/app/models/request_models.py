from __future__ import annotations

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app._enums import BreakingSchemes, EstimatorVariants, MleMethods, PlSamplers
from app._exceptions import InvalidRankingError
from app.core.config import settings
from app.models.models import PartialRanking, RankingDataset

__all__ = [
    "BoundsRequest",
    "BreakRequest",
    "EstimateRequest",
    "ExperimentConfig",
    "GraphStatsRequest",
    "MleOptions",
    "PairRecord",
    "RankingRecord",
    "RankingsRequest",
    "StepRule",
]


class StepRule(BaseModel):
    initial_step: float = Field(default=1.0, gt=0, description="First trial step of a line search")
    shrink: float = Field(default=0.5, gt=0, lt=1, description="Backtracking contraction factor")
    sufficient_increase: float = Field(
        default=1e-4, gt=0, lt=1, description="Armijo sufficient-increase constant"
    )

    model_config = ConfigDict(frozen=True)


class MleOptions(BaseModel):
    max_iters: int = Field(default=10_000, ge=1)
    tol_rel_ll: float = Field(default=1e-10, gt=0, description="Relative log-likelihood change")
    tol_grad: float = Field(default=1e-8, gt=0, description="Projected-gradient norm")
    method: MleMethods = Field(default=MleMethods.MM_THEN_PROJECT)
    step_rule: StepRule = Field(default_factory=StepRule)

    model_config = ConfigDict(frozen=True)


class RankingRecord(BaseModel):
    """One line of a rankings JSONL file, position 0 being the most preferred item."""

    user: int = Field(default=0, ge=0)
    ranking: list[int] = Field(..., description="Items, most preferred first")

    def to_ranking(self) -> PartialRanking:
        return PartialRanking(user=self.user, items=tuple(self.ranking))


class PairRecord(BaseModel):
    winner: int
    loser: int
    weight: float


class ExperimentConfig(BaseModel):
    """
    The simulation grid: for every `(b, d, k)` cell and replicate, `d` full rankings over `n`
    items are cut into `d * n / k` partial rankings of size `k` and fed to each estimator.
    """

    n: int = Field(default=128, ge=2)
    d_values: list[int] = Field(default_factory=lambda: [16, 64, 128], min_length=1)
    k_values: list[int] = Field(default_factory=lambda: [128, 32, 8, 2], min_length=1)
    b_values: list[float] = Field(default_factory=lambda: [0.0, 2.0], min_length=1)
    replicates: int = Field(default=20, ge=1)
    seed: int = Field(default=0, ge=0)
    estimator_variants: list[EstimatorVariants] = Field(
        default_factory=lambda: [EstimatorVariants.ML], min_length=1
    )
    output_path: Path = Field(default=Path("results/experiment.csv"))
    estimator_b: float = Field(
        default_factory=lambda: settings.estimator_b,
        ge=0,
        description="Box bound used by the estimators",
    )
    sampler: PlSamplers = Field(default=PlSamplers.SEQUENTIAL)
    mle: MleOptions = Field(default_factory=MleOptions)

    @field_validator("d_values")
    @classmethod
    def check_d_values(cls, values: list[int]) -> list[int]:
        if any(value < 1 for value in values):
            raise ValueError("every d must be at least 1")
        return values

    @field_validator("b_values")
    @classmethod
    def check_b_values(cls, values: list[float]) -> list[float]:
        if any(value < 0 for value in values):
            raise ValueError("every b must be nonnegative")
        return values

    @model_validator(mode="after")
    def check_k_values(self) -> ExperimentConfig:
        for k in self.k_values:
            if k < 2:
                raise ValueError(f"k={k} is below 2")
            if self.n % k:
                raise ValueError(f"k={k} does not divide n={self.n}")
        return self


class RankingsRequest(BaseModel):
    n: int | None = Field(
        default=None, ge=1, description="Item count, defaults to the largest index plus one"
    )
    rankings: list[RankingRecord] = Field(..., min_length=1)

    def to_dataset(self) -> RankingDataset:
        """
        Build the validated dataset, turning validation failures into `InvalidRankingError`.
        """
        try:
            rankings = tuple(record.to_ranking() for record in self.rankings)
            n = self.n
            if n is None:
                n = 1 + max(max(record.ranking, default=0) for record in self.rankings)
            return RankingDataset(n=n, rankings=rankings)

        except ValidationError as exc:
            raise InvalidRankingError(details=exc) from exc


class EstimateRequest(RankingsRequest):
    b: float = Field(default=10.0, ge=0)
    method: EstimatorVariants = Field(default=EstimatorVariants.ML)
    seed: int = Field(default=0, ge=0)

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "rankings": [{"user": 0, "ranking": [0, 1, 2]}, {"user": 1, "ranking": [2, 0]}],
                "b": 5.0,
                "method": "ml",
                "seed": 0,
            }
        }
    )


class BoundsRequest(RankingsRequest):
    b: float = Field(default=2.0, ge=0)
    theta: list[float] | None = Field(
        default=None, description="Optional preference vector for the Fisher-based bound"
    )
    seed: int = Field(default=0, ge=0)


class GraphStatsRequest(RankingsRequest):
    pass


class BreakRequest(RankingsRequest):
    scheme: BreakingSchemes = Field(default=BreakingSchemes.FB)
    seed: int = Field(default=0, ge=0)
