from __future__ import annotations

import math
from collections.abc import Callable
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from app._enums import MleMethods

__all__ = [
    "MleResult",
    "PartialRanking",
    "PreferenceVector",
    "RankingDataset",
    "ThurstoneNoise",
    "WeightedPair",
]

SUM_TOLERANCE = 1e-9
BOX_TOLERANCE = 1e-12
MONOTONE_CHECK_LEVELS = 100


class PreferenceVector(BaseModel):
    """
    A sum-zero, box-bounded vector of item utilities.

    The vector represents the equivalence class of utilities under a common additive shift:
    it sums to zero (within `1e-9 * n`) and every coordinate lies in `[-b, b]`.
    """

    theta: tuple[float, ...] = Field(..., min_length=1, description="Item utilities")
    b: float = Field(..., ge=0, description="Dynamic-range bound of the box")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="before")
    @classmethod
    def check_declared_length(cls, values: Any) -> Any:
        """
        Accept the `{"n", "b", "theta"}` file layout, checking `n` against the vector length.
        """
        if isinstance(values, dict) and "n" in values:
            values = dict(values)
            declared = values.pop("n")
            theta = values.get("theta") or ()
            if declared != len(theta):
                raise ValueError(
                    f"declared n={declared} but theta has {len(theta)} entries"
                )
        return values

    @model_validator(mode="after")
    def check_invariants(self) -> PreferenceVector:
        n = len(self.theta)
        total = math.fsum(self.theta)
        if abs(total) > SUM_TOLERANCE * n:
            raise ValueError(f"theta must sum to zero, got {total!r}")
        worst = max(abs(value) for value in self.theta)
        if worst > self.b + BOX_TOLERANCE:
            raise ValueError(f"|theta_i| = {worst!r} exceeds the box bound b = {self.b!r}")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def n(self) -> int:
        return len(self.theta)

    @property
    def array(self) -> NDArray[np.float64]:
        return np.asarray(self.theta, dtype=np.float64)

    @classmethod
    def from_array(cls, values: NDArray[np.float64], b: float) -> PreferenceVector:
        return cls(theta=tuple(float(value) for value in values), b=b)


class PartialRanking(BaseModel):
    """
    An ordered list of distinct items, most preferred first.

    Samplers may return a single-item ranking for a single-item subset; datasets reject those
    at ingestion because they carry no information.
    """

    user: int = Field(default=0, ge=0, description="Identifier of the ranking user")
    items: tuple[int, ...] = Field(
        ..., min_length=1, description="Ranked items, position 0 is the most preferred"
    )

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_items(self) -> PartialRanking:
        if min(self.items) < 0:
            raise ValueError(f"negative item index in ranking {list(self.items)}")
        if len(set(self.items)) != len(self.items):
            raise ValueError(f"repeated item in ranking {list(self.items)}")
        return self

    @property
    def k(self) -> int:
        return len(self.items)


class RankingDataset(BaseModel):
    """
    The estimation input: `m >= 1` partial rankings of size at least two over `n` items.
    """

    n: int = Field(..., ge=1, description="Number of items")
    rankings: tuple[PartialRanking, ...] = Field(..., min_length=1)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_rankings(self) -> RankingDataset:
        for position, ranking in enumerate(self.rankings):
            if ranking.k < 2:
                raise ValueError(
                    f"ranking {position} has a single item; rankings need at least two items"
                )
            worst = max(ranking.items)
            if worst >= self.n:
                raise ValueError(
                    f"ranking {position} references item {worst} outside [0, {self.n})"
                )
        return self

    @property
    def m(self) -> int:
        return len(self.rankings)

    @property
    def sizes(self) -> list[int]:
        return [ranking.k for ranking in self.rankings]

    @property
    def total_size(self) -> int:
        """The sum of the ranking sizes, `m * k` with `k` the average size."""
        return sum(self.sizes)

    @property
    def k(self) -> float:
        return self.total_size / self.m

    @property
    def k_max(self) -> int:
        return max(self.sizes)

    @property
    def subsets(self) -> list[tuple[int, ...]]:
        return [ranking.items for ranking in self.rankings]


class ThurstoneNoise(BaseModel):
    """
    The noise law of a Thurstone model, given through its quantile function.

    Attributes:
        name (str): A label for logs and reports.
        inverse_cdf (Callable): Vectorized quantile function of the noise CDF `F`.
        fisher_info (float): The location Fisher information `I(mu)` of the noise density.
    """

    name: str = Field(default="custom")
    inverse_cdf: Callable[[NDArray[np.float64]], NDArray[np.float64]]
    fisher_info: float = Field(..., gt=0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_monotone(self) -> ThurstoneNoise:
        levels = np.linspace(0.0, 1.0, MONOTONE_CHECK_LEVELS + 2)[1:-1]
        values = np.asarray(self.inverse_cdf(levels), dtype=np.float64)
        if not np.all(np.isfinite(values)) or not np.all(np.diff(values) > 0):
            raise ValueError(
                f"inverse_cdf of noise '{self.name}' is not strictly increasing on (0, 1)"
            )
        return self


class WeightedPair(BaseModel):
    winner: int = Field(..., ge=0, description="Item ranked higher")
    loser: int = Field(..., ge=0, description="Item ranked lower")
    weight: float = Field(default=1.0, gt=0, description="Likelihood weight of the comparison")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_distinct(self) -> WeightedPair:
        if self.winner == self.loser:
            raise ValueError(f"a comparison needs two distinct items, got {self.winner} twice")
        return self


class MleResult(BaseModel):
    theta_hat: PreferenceVector = Field(..., description="Maximizer over the box")
    final_log_likelihood: float = Field(..., description="Objective value at theta_hat")
    iterations: int = Field(..., ge=0, description="Solver iterations performed")
    converged: bool = Field(..., description="Whether a stopping criterion was met")
    grad_norm: float = Field(..., ge=0, description="Projected-gradient norm at theta_hat")
    method: MleMethods = Field(..., description="Solver that produced theta_hat")
