import asyncio

import numpy as np
from aiocache import cached
from fastapi import APIRouter

from app._exceptions import CoreError, InvalidInputError, NumericalFailureError
from app.core.bounds import bound_report
from app.core.breaking import break_dataset
from app.core.graph import graph_stats as compute_graph_stats
from app.core.registries import run_estimator
from app.models.request_models import (
    BoundsRequest,
    BreakRequest,
    EstimateRequest,
    GraphStatsRequest,
    PairRecord,
)
from app.models.response_models import (
    BoundsResponse,
    EstimateResponse,
    GraphStatsResponse,
    PairsResponse,
)

router = APIRouter(tags=["sync"])


@router.post(
    "/estimate",
    response_model=EstimateResponse,
    tags=["estimation", "plackett-luce", "maximum-likelihood"],
    description="Estimate the preference vector of a set of partial rankings with a registered estimator.",
)
@cached(ttl=60)
async def estimate(input_data: EstimateRequest) -> EstimateResponse:
    """
    Estimate the preference vector of the submitted rankings.

    `ml` maximizes the ranking likelihood over the box `[-b, b]^n`; `ib` and `fb` break the
    rankings into pairwise comparisons first. The seed only matters for `ib`.
    """
    dataset = input_data.to_dataset()
    try:
        data = await asyncio.to_thread(
            run_estimator, dataset, input_data.method, input_data.b, input_data.seed
        )

    except CoreError:
        raise

    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        raise NumericalFailureError(details=exc) from exc

    return EstimateResponse(method=input_data.method, data=data)


@router.post(
    "/bounds",
    response_model=BoundsResponse,
    tags=["bounds", "cramer-rao", "minimax"],
    description="Evaluate the error bounds of the assignment of items to users behind a set of rankings.",
)
@cached(ttl=60)
async def bounds(input_data: BoundsRequest) -> BoundsResponse:
    """
    Evaluate the lower and upper error bounds for the submitted assignment.

    When `theta` is given, the Cramer-Rao bound at `theta` is evaluated as well.
    """
    dataset = input_data.to_dataset()
    theta = None
    if input_data.theta is not None:
        if len(input_data.theta) != dataset.n:
            raise InvalidInputError(
                f"theta has {len(input_data.theta)} entries for n={dataset.n} items"
            )
        theta = np.asarray(input_data.theta, dtype=np.float64)

    try:
        data = await asyncio.to_thread(
            bound_report, dataset, input_data.b, theta, np.random.default_rng(input_data.seed)
        )

    except CoreError:
        raise

    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        raise NumericalFailureError(details=exc) from exc

    return BoundsResponse(data=data)


@router.post(
    "/graph-stats",
    response_model=GraphStatsResponse,
    tags=["graph", "laplacian", "connectivity"],
    description="Describe the comparison graph of a set of rankings.",
)
@cached(ttl=60)
async def graph_stats(input_data: GraphStatsRequest) -> GraphStatsResponse:
    dataset = input_data.to_dataset()
    data = await asyncio.to_thread(compute_graph_stats, dataset)
    return GraphStatsResponse(data=data)


@router.post(
    "/break",
    response_model=PairsResponse,
    tags=["rank-breaking", "pairwise"],
    description="Break a set of rankings into weighted pairwise comparisons.",
)
@cached(ttl=60)
async def break_rankings(input_data: BreakRequest) -> PairsResponse:
    """
    Break the submitted rankings with independent (`ib`) or full (`fb`) breaking.
    """
    dataset = input_data.to_dataset()
    broken = await asyncio.to_thread(
        break_dataset, dataset, input_data.scheme, np.random.default_rng(input_data.seed)
    )
    return PairsResponse(
        scheme=input_data.scheme,
        data=[
            PairRecord(winner=pair.winner, loser=pair.loser, weight=pair.weight)
            for pair in broken.pairs
        ],
    )
