from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats

from app._enums import NoiseFamilies, PlSamplers, RankingModels
from app._exceptions import (
    EmptyAssignmentError,
    InvalidItemIndexError,
    InvalidPartitionError,
    InvalidSubsetError,
    InvalidSubsetSizeError,
)
from app.models.models import PartialRanking, PreferenceVector, ThurstoneNoise

__all__ = [
    "gaussian_noise",
    "gen_theta_star",
    "gumbel_noise",
    "logistic_noise",
    "noise_for",
    "partition_subsets",
    "random_subsets",
    "ranking_log_prob",
    "ranking_positions",
    "restrict_ranking",
    "sample_dataset",
    "sample_pl",
    "sample_thurstone",
]

_TINY = np.finfo(np.float64).tiny
_ONE_MINUS = 1.0 - np.finfo(np.float64).epsneg


def theta_values(theta: PreferenceVector | ArrayLike) -> NDArray[np.float64]:
    """
    Return the utilities as a float array, accepting either a `PreferenceVector` or raw values.

    Raw values need not sum to zero: every likelihood in this package is shift invariant.
    """
    if isinstance(theta, PreferenceVector):
        return theta.array
    return np.asarray(theta, dtype=np.float64)


def _subset_items(subset: Iterable[int], n: int) -> NDArray[np.int64]:
    items = sorted(int(item) for item in subset)
    if not items:
        raise EmptyAssignmentError()
    if len(set(items)) != len(items):
        raise InvalidSubsetError(f"repeated items in subset {items}")
    for item in (items[0], items[-1]):
        if not 0 <= item < n:
            raise InvalidItemIndexError(item, n)
    return np.asarray(items, dtype=np.int64)


def _sequential_order(values: NDArray[np.float64], rng: np.random.Generator) -> NDArray[np.int64]:
    weights = np.exp(values - values.max())
    order = np.empty(values.size, dtype=np.int64)
    for position in range(values.size):
        cumulative = np.cumsum(weights)
        pick = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
        if pick >= values.size or weights[pick] == 0.0:
            pick = int(np.flatnonzero(weights)[-1])
        order[position] = pick
        weights[pick] = 0.0
    return order


def _latent_order(
    values: NDArray[np.float64], items: NDArray[np.int64], rng: np.random.Generator
) -> NDArray[np.int64]:
    # X_i ~ Exp(mean exp(-theta_i)); smallest arrival time ranks first
    arrivals = rng.exponential(scale=np.exp(-values))
    return np.lexsort((items, arrivals))


def sample_pl(
    theta: PreferenceVector | ArrayLike,
    subset: Iterable[int],
    rng: np.random.Generator,
    sampler: PlSamplers = PlSamplers.SEQUENTIAL,
    user: int = 0,
) -> PartialRanking:
    """
    Draw a Plackett-Luce ranking of `subset`.

    Args:
        theta (PreferenceVector | ArrayLike): Item utilities over all `n` items.
        subset (Iterable[int]): Items to rank, at least one.
        rng (np.random.Generator): Source of randomness.
        sampler (PlSamplers, optional): `sequential` (default) or `latent`; both produce the same
            distribution over permutations.
        user (int, optional): User identifier recorded on the ranking.

    Returns:
        PartialRanking: The ranking, most preferred item first.

    Raises:
        EmptyAssignmentError: If `subset` is empty.
        InvalidItemIndexError: If an item lies outside `[0, n)`.
    """
    values = theta_values(theta)
    items = _subset_items(subset, values.size)
    if sampler == PlSamplers.LATENT:
        order = _latent_order(values[items], items, rng)
    else:
        order = _sequential_order(values[items], rng)
    return PartialRanking(user=user, items=tuple(int(item) for item in items[order]))


def sample_thurstone(
    theta: PreferenceVector | ArrayLike,
    subset: Iterable[int],
    noise: ThurstoneNoise,
    rng: np.random.Generator,
    user: int = 0,
) -> PartialRanking:
    """
    Draw a Thurstone ranking: utilities `theta_i + noise` sorted in decreasing order.

    Ties (a probability-zero event) are broken in favour of the lower item index.
    """
    values = theta_values(theta)
    items = _subset_items(subset, values.size)
    uniforms = np.clip(rng.random(items.size), _TINY, _ONE_MINUS)
    utilities = values[items] + np.asarray(noise.inverse_cdf(uniforms), dtype=np.float64)
    order = np.lexsort((items, -utilities))
    return PartialRanking(user=user, items=tuple(int(item) for item in items[order]))


def ranking_positions(ranking: PartialRanking) -> dict[int, int]:
    """Map each ranked item to its position, 0 being the most preferred."""
    return {item: position for position, item in enumerate(ranking.items)}


def restrict_ranking(
    full: PartialRanking,
    subset: Iterable[int],
    positions: Mapping[int, int] | None = None,
) -> PartialRanking:
    """
    Restrict a ranking to `subset`, keeping the relative order of `full`.

    Args:
        full (PartialRanking): The ranking to restrict.
        subset (Iterable[int]): Items to keep; every one must appear in `full`.
        positions (Mapping[int, int] | None, optional): Precomputed `ranking_positions(full)`,
            useful when one ranking is restricted to many blocks.

    Raises:
        InvalidSubsetError: If an item of `subset` is not ranked by `full`.
    """
    positions = positions if positions is not None else ranking_positions(full)
    kept = set(int(item) for item in subset)
    if not kept:
        raise EmptyAssignmentError()
    missing = sorted(item for item in kept if item not in positions)
    if missing:
        raise InvalidSubsetError(f"items {missing} are not ranked by {list(full.items)}")
    ordered = sorted(kept, key=positions.__getitem__)
    return PartialRanking(user=full.user, items=tuple(ordered))


def ranking_log_prob(theta: PreferenceVector | ArrayLike, ranking: PartialRanking) -> float:
    """
    Log-probability of `ranking` under the Plackett-Luce model.

    Computes `sum_l [theta_{s(l)} - log sum_{t >= l} exp(theta_{s(t)})]` with a stable
    reverse log-sum-exp accumulation.
    """
    values = theta_values(theta)
    worst = max(ranking.items)
    if worst >= values.size:
        raise InvalidItemIndexError(worst, values.size)
    ranked = values[np.asarray(ranking.items, dtype=np.int64)]
    tails = np.logaddexp.accumulate(ranked[::-1])[::-1]
    return float(np.sum(ranked[:-1] - tails[:-1]))


def random_subsets(
    n: int, m: int, sizes: int | Sequence[int], rng: np.random.Generator
) -> list[tuple[int, ...]]:
    """
    Draw `m` independent subsets of `[n]`, subset `j` uniform among those of size `sizes[j]`.

    Each subset is produced by a partial Fisher-Yates shuffle of a shared item pool.
    """
    sizes = [int(sizes)] * m if isinstance(sizes, int) else [int(size) for size in sizes]
    if len(sizes) != m:
        raise InvalidSubsetSizeError(len(sizes), m)
    for size in sizes:
        if not 2 <= size <= n:
            raise InvalidSubsetSizeError(size, n)

    pool = np.arange(n, dtype=np.int64)
    subsets: list[tuple[int, ...]] = []
    for size in sizes:
        for t in range(size):
            swap = int(rng.integers(t, n))
            pool[t], pool[swap] = pool[swap], pool[t]
        subsets.append(tuple(sorted(int(item) for item in pool[:size])))
    return subsets


def partition_subsets(n: int, k: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    """
    A uniformly random partition of `[n]` into `n / k` blocks of size `k`.

    Raises:
        InvalidPartitionError: If `k` does not divide `n`.
    """
    if k < 1 or n % k:
        raise InvalidPartitionError(n, k)
    blocks = rng.permutation(n).reshape(n // k, k)
    return [tuple(sorted(int(item) for item in block)) for block in blocks]


def gen_theta_star(n: int, b: float, rng: np.random.Generator) -> PreferenceVector:
    """
    Draw i.i.d. uniform utilities on `[-b, b]` and center them to sum zero.

    Centering can push coordinates past `b`, so the returned vector records the inflated box
    `2 * b` rather than clipping.
    """
    raw = rng.uniform(-b, b, size=n)
    return PreferenceVector.from_array(raw - raw.mean(), b=2.0 * b)


def gumbel_noise() -> ThurstoneNoise:
    """
    Standard Gumbel noise, under which the Thurstone model is exactly Plackett-Luce.

    Returns:
        ThurstoneNoise: The Gumbel quantile function with location Fisher information 1.
    """
    return ThurstoneNoise(name=NoiseFamilies.GUMBEL, inverse_cdf=stats.gumbel_r.ppf, fisher_info=1.0)


def gaussian_noise() -> ThurstoneNoise:
    """Standard normal noise (Thurstone case V), location Fisher information 1."""
    return ThurstoneNoise(name=NoiseFamilies.GAUSSIAN, inverse_cdf=stats.norm.ppf, fisher_info=1.0)


def logistic_noise() -> ThurstoneNoise:
    """Standard logistic noise, location Fisher information 1/3."""
    return ThurstoneNoise(
        name=NoiseFamilies.LOGISTIC, inverse_cdf=stats.logistic.ppf, fisher_info=1.0 / 3.0
    )


def noise_for(family: NoiseFamilies) -> ThurstoneNoise:
    """
    Build the noise of a named family.

    Args:
        family (NoiseFamilies): `gumbel`, `gaussian` or `logistic`.

    Returns:
        ThurstoneNoise: A fresh noise description.
    """
    factories = {
        NoiseFamilies.GUMBEL: gumbel_noise,
        NoiseFamilies.GAUSSIAN: gaussian_noise,
        NoiseFamilies.LOGISTIC: logistic_noise,
    }
    return factories[family]()


def sample_dataset(
    theta: PreferenceVector | ArrayLike,
    subsets: Sequence[Iterable[int]],
    rng: np.random.Generator,
    model: RankingModels = RankingModels.PL,
    noise: ThurstoneNoise | None = None,
) -> list[PartialRanking]:
    """
    Draw one ranking per subset, user `j` ranking `subsets[j]`.

    For Thurstone models an explicit `noise` overrides the family named by `model`.
    """
    if model == RankingModels.PL:
        return [sample_pl(theta, subset, rng, user=j) for j, subset in enumerate(subsets)]

    if noise is None:
        gumbel = model == RankingModels.THURSTONE_GUMBEL
        noise = noise_for(NoiseFamilies.GUMBEL if gumbel else NoiseFamilies.GAUSSIAN)
    return [
        sample_thurstone(theta, subset, noise, rng, user=j) for j, subset in enumerate(subsets)
    ]
