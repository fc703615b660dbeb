from pydantic import BaseModel, ConfigDict, Field

from app._enums import BreakingSchemes, EstimatorVariants, ObjectTypes
from app.models.models import MleResult
from app.models.request_models import PairRecord

__all__ = [
    "BoundReport",
    "BoundsResponse",
    "EstimateResponse",
    "ExperimentRow",
    "GraphStats",
    "GraphStatsResponse",
    "InputsSummary",
    "PairsResponse",
]

CSV_COLUMNS = [
    "b",
    "d",
    "k",
    "replicate",
    "estimator",
    "normalized_mse",
    "cr_limit",
    "lambda2",
    "lambda_n",
    "iterations",
    "converged",
]


class InputsSummary(BaseModel):
    n: int
    m: int
    k: float = Field(..., description="Average ranking size")
    k_max: int
    b: float
    lambda2: float
    lambda_n: float
    degrees: list[float] = Field(..., description="Item degrees sorted ascending")


class BoundReport(BaseModel):
    """
    Lower and upper bounds on the squared estimation error for one assignment of items to users.

    Upper bounds whose assumptions fail are reported as `None`; infinite
    bounds serialize as the string "Infinity".
    """

    oracle_lb: float = Field(..., ge=0)
    oracle_lb_jensen: float = Field(..., ge=0)
    cramer_rao_lb: float = Field(..., ge=0)
    cramer_rao_lb_jensen: float = Field(..., ge=0)
    cr_limit_normalized: float
    thm3_ub: float | None = Field(default=None, ge=0)
    thm4_ub: float | None = Field(default=None, ge=0)
    cor1_ub: float | None = Field(default=None, ge=0)
    cor2_ub: float | None = Field(default=None, ge=0)
    thm4_random_ub: float | None = Field(default=None, ge=0)
    cramer_rao_lb_at_theta: float | None = Field(default=None, ge=0)
    fisher_method: str | None = Field(
        default=None, description="'exact' or 'monte-carlo' when a theta was supplied"
    )
    inputs_summary: InputsSummary

    model_config = ConfigDict(ser_json_inf_nan="strings")


class GraphStats(BaseModel):
    n: int
    m: int
    total_size: int = Field(..., description="Sum of the ranking sizes")
    min_degree: float
    max_degree: float
    lambda2: float
    lambda_n: float
    connected: bool


class ExperimentRow(BaseModel):
    b: float
    d: int
    k: int
    replicate: int
    estimator: EstimatorVariants
    normalized_mse: float | None = Field(
        default=None, ge=0, description="Omitted for disconnected cells"
    )
    cr_limit: float
    lambda2: float
    lambda_n: float
    iterations: int
    converged: bool


class EstimateResponse(BaseModel):
    object: ObjectTypes = Field(
        default=ObjectTypes.ESTIMATE,
        description="The object type, which is always 'estimate'",
    )
    method: EstimatorVariants = Field(..., description="Estimator used")
    data: MleResult


class BoundsResponse(BaseModel):
    object: ObjectTypes = Field(
        default=ObjectTypes.BOUNDS,
        description="The object type, which is always 'bounds'",
    )
    data: BoundReport

    model_config = ConfigDict(ser_json_inf_nan="strings")


class GraphStatsResponse(BaseModel):
    object: ObjectTypes = Field(
        default=ObjectTypes.GRAPH_STATS,
        description="The object type, which is always 'graph_stats'",
    )
    data: GraphStats


class PairsResponse(BaseModel):
    object: ObjectTypes = Field(
        default=ObjectTypes.PAIRS,
        description="The object type, which is always 'pairs'",
    )
    scheme: BreakingSchemes
    data: list[PairRecord]
