from __future__ import annotations

from dataclasses import dataclass
from functools import cache

import numpy as np
from numpy.typing import NDArray

from app._enums import BreakingSchemes
from app.core.config import settings
from app.core.graph import ComparisonGraph, graph_from_edges
from app.models.models import PartialRanking, RankingDataset, WeightedPair
from app.utils.logger import logger

__all__ = ["BrokenDataset", "break_dataset", "full_breaking", "random_ib"]


@dataclass(frozen=True, eq=False)
class BrokenDataset:
    """
    Pairwise comparisons produced by breaking a dataset, stored column-wise.

    Attributes:
        n (int): Number of items.
        scheme (BreakingSchemes): The breaking that produced the pairs.
        winners (NDArray[np.int64]): Item ranked higher in each comparison.
        losers (NDArray[np.int64]): Item ranked lower in each comparison.
        weights (NDArray[np.float64]): Likelihood weight of each comparison.
    """

    n: int
    scheme: BreakingSchemes
    winners: NDArray[np.int64]
    losers: NDArray[np.int64]
    weights: NDArray[np.float64]

    def __len__(self) -> int:
        return int(self.winners.size)

    @property
    def pairs(self) -> list[WeightedPair]:
        return [
            WeightedPair(winner=int(winner), loser=int(loser), weight=float(weight))
            for winner, loser, weight in zip(self.winners, self.losers, self.weights, strict=True)
        ]

    def graph(self) -> ComparisonGraph:
        """The comparison graph of the pairs, weights summed per item pair."""
        return graph_from_edges(self.n, self.winners, self.losers, self.weights)


@cache
def _upper_positions(k: int) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    return np.triu_indices(k, 1)


def _ib_positions(k: int, rng: np.random.Generator) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    # shuffle positions and pair them consecutively; an odd leftover is dropped
    shuffled = rng.permutation(k)[: 2 * (k // 2)].reshape(-1, 2)
    return shuffled.min(axis=1), shuffled.max(axis=1)


def random_ib(ranking: PartialRanking, rng: np.random.Generator) -> list[WeightedPair]:
    """
    Break `ranking` into `floor(k / 2)` disjoint unit-weight comparisons.

    Args:
        ranking (PartialRanking): A ranking of size at least two.
        rng (np.random.Generator): Drives the uniform choice of the matching.

    Returns:
        list[WeightedPair]: One comparison per matched pair, winner ranked higher in `ranking`.
    """
    higher, lower = _ib_positions(ranking.k, rng)
    return [
        WeightedPair(winner=ranking.items[first], loser=ranking.items[second], weight=1.0)
        for first, second in zip(higher, lower, strict=True)
    ]


def full_breaking(ranking: PartialRanking) -> list[WeightedPair]:
    """All `k (k - 1) / 2` comparisons of `ranking`, each weighted `1 / (k - 1)`."""
    weight = 1.0 / (ranking.k - 1)
    higher, lower = _upper_positions(ranking.k)
    return [
        WeightedPair(winner=ranking.items[first], loser=ranking.items[second], weight=weight)
        for first, second in zip(higher, lower, strict=True)
    ]


def break_dataset(
    dataset: RankingDataset,
    scheme: BreakingSchemes,
    rng: np.random.Generator | None = None,
) -> BrokenDataset:
    """
    Break every ranking of `dataset` and concatenate the comparisons in ranking order.

    IB consumes `rng` ranking by ranking, so the output matches successive `random_ib` calls on
    the same generator. When no generator is given one is seeded from the configured seed.
    """
    if rng is None:
        rng = np.random.default_rng(settings.seed)

    winners: list[NDArray[np.int64]] = []
    losers: list[NDArray[np.int64]] = []
    weights: list[NDArray[np.float64]] = []
    for ranking in dataset.rankings:
        items = np.asarray(ranking.items, dtype=np.int64)
        if scheme == BreakingSchemes.IB:
            higher, lower = _ib_positions(ranking.k, rng)
            weight = 1.0
        else:
            higher, lower = _upper_positions(ranking.k)
            weight = 1.0 / (ranking.k - 1)
        winners.append(items[higher])
        losers.append(items[lower])
        weights.append(np.full(higher.size, weight))

    broken = BrokenDataset(
        n=dataset.n,
        scheme=scheme,
        winners=np.concatenate(winners),
        losers=np.concatenate(losers),
        weights=np.concatenate(weights),
    )
    logger.debug(f"Broke {dataset.m} rankings into {len(broken)} {scheme} comparisons")
    return broken
