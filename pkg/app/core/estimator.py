from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import logfire
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from app._enums import MleMethods
from app._exceptions import DegenerateItemError, NumericalFailureError
from app.core.breaking import BrokenDataset
from app.core.graph import build_graph, pairwise_graph, require_connected
from app.core.plackett_luce import theta_values
from app.models.models import MleResult, PartialRanking, PreferenceVector, RankingDataset, WeightedPair
from app.models.request_models import MleOptions, StepRule
from app.utils.logger import logger

__all__ = [
    "PackedRankings",
    "gradient",
    "hessian",
    "log_likelihood",
    "mm_step",
    "normalized_mse",
    "pack_rankings",
    "pairwise_gradient",
    "pairwise_log_likelihood",
    "project_theta",
    "ranking_log_probs",
    "solve_mle",
    "solve_pairwise_mle",
]

PROJECTION_TOLERANCE = 1e-12
PROJECTION_MAX_BISECTIONS = 200
MAX_BACKTRACKS = 60


@dataclass(frozen=True, eq=False)
class _Block:
    rankings: NDArray[np.int64]  # (m_k, k), column 0 is the top item
    weights: NDArray[np.float64]  # (m_k,)

    @property
    def k(self) -> int:
        return int(self.rankings.shape[1])


@dataclass(frozen=True, eq=False)
class PackedRankings:
    """Rankings grouped by size, with optional per-ranking likelihood weights."""

    n: int
    blocks: tuple[_Block, ...]

    @property
    def wins(self) -> NDArray[np.float64]:
        """Weighted number of selection rounds won by each item."""
        total = np.zeros(self.n)
        for block in self.blocks:
            rounds = block.rankings[:, :-1]
            total += np.bincount(
                rounds.ravel(),
                weights=np.repeat(block.weights, block.k - 1),
                minlength=self.n,
            )
        return total

    @classmethod
    def from_matrix(
        cls, n: int, rankings: ArrayLike, weights: ArrayLike | None = None
    ) -> PackedRankings:
        """A single block of equal-size rankings given as an `(m, k)` item matrix."""
        matrix = np.asarray(rankings, dtype=np.int64)
        weights = np.ones(matrix.shape[0]) if weights is None else np.asarray(weights, dtype=np.float64)
        return cls(n=n, blocks=(_Block(rankings=matrix, weights=weights),))


RankingsLike = RankingDataset | PackedRankings


def pack_rankings(
    rankings: Sequence[PartialRanking] | RankingDataset,
    n: int | None = None,
    weights: ArrayLike | None = None,
) -> PackedRankings:
    """
    Group rankings by size into integer matrices.

    Args:
        rankings (Sequence[PartialRanking] | RankingDataset): The rankings to pack.
        n (int | None, optional): Item count, required unless a dataset is given.
        weights (ArrayLike | None, optional): One likelihood weight per ranking, default one.
    """
    if isinstance(rankings, RankingDataset):
        n = rankings.n if n is None else n
        rankings = rankings.rankings
    if n is None:
        raise ValueError("n is required when packing a plain sequence of rankings")

    weights = np.ones(len(rankings)) if weights is None else np.asarray(weights, dtype=np.float64)
    by_size: dict[int, list[int]] = {}
    for position, ranking in enumerate(rankings):
        by_size.setdefault(ranking.k, []).append(position)

    blocks = []
    for k in sorted(by_size):
        if k < 2:
            continue
        positions = by_size[k]
        matrix = np.asarray([rankings[position].items for position in positions], dtype=np.int64)
        blocks.append(_Block(rankings=matrix, weights=weights[positions]))
    return PackedRankings(n=n, blocks=tuple(blocks))


def _packed(data: RankingsLike) -> PackedRankings:
    return data if isinstance(data, PackedRankings) else pack_rankings(data)


def _tails(values: NDArray[np.float64]) -> NDArray[np.float64]:
    # tails[:, l] = log sum_{t >= l} exp(values[:, t])
    return np.logaddexp.accumulate(values[:, ::-1], axis=1)[:, ::-1]


def _round_masses(tails: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    `log sum_{l <= min(t, k - 2)} exp(-tails[:, l])` for every position `t`.
    """
    cumulative = np.logaddexp.accumulate(-tails[:, :-1], axis=1)
    return np.concatenate([cumulative, cumulative[:, -1:]], axis=1)


def ranking_log_probs(
    theta: PreferenceVector | ArrayLike, rankings: ArrayLike
) -> NDArray[np.float64]:
    """Log-probabilities of the rows of an `(m, k)` matrix of equal-size rankings."""
    values = theta_values(theta)
    ranked = values[np.asarray(rankings, dtype=np.int64)]
    tails = _tails(ranked)
    return np.sum(ranked[:, :-1] - tails[:, :-1], axis=1)


def log_likelihood(theta: PreferenceVector | ArrayLike, dataset: RankingsLike) -> float:
    """
    The Plackett-Luce log-likelihood: the sum of `ranking_log_prob` over all rankings.
    """
    values = theta_values(theta)
    return math.fsum(
        float(block.weights @ ranking_log_probs(values, block.rankings))
        for block in _packed(dataset).blocks
    )


def gradient(theta: PreferenceVector | ArrayLike, dataset: RankingsLike) -> NDArray[np.float64]:
    """
    Exact gradient of the log-likelihood. Its components sum to zero.
    """
    values = theta_values(theta)
    packed = _packed(dataset)
    grad = packed.wins
    for block in packed.blocks:
        ranked = values[block.rankings]
        masses = np.exp(ranked + _round_masses(_tails(ranked)))
        grad -= np.bincount(
            block.rankings.ravel(),
            weights=(masses * block.weights[:, None]).ravel(),
            minlength=packed.n,
        )
    return grad


def hessian(
    theta: PreferenceVector | ArrayLike,
    dataset: RankingsLike,
    weights: ArrayLike | None = None,
) -> NDArray[np.float64]:
    """
    Exact Hessian of the log-likelihood.

    Every selection round contributes `-(diag(p) - p p^T)` over its contention set, `p` being the
    softmax of the contending utilities, so `-H` is positive semi-definite and `H 1 = 0`.

    Args:
        theta (PreferenceVector | ArrayLike): Point of evaluation.
        dataset (RankingDataset | PackedRankings): Rankings, possibly already packed.
        weights (ArrayLike | None, optional): Per-ranking weights overriding the packed ones;
            only accepted together with a `RankingDataset`.
    """
    values = theta_values(theta)
    if weights is not None:
        if not isinstance(dataset, RankingDataset):
            raise ValueError("explicit weights require a RankingDataset")
        packed = pack_rankings(dataset, weights=weights)
    else:
        packed = _packed(dataset)

    matrix = np.zeros((packed.n, packed.n))
    diagonal = np.zeros(packed.n)
    for block in packed.blocks:
        ranked = values[block.rankings]
        tails = _tails(ranked)
        for position in range(block.k - 1):
            contenders = block.rankings[:, position:]
            probs = np.exp(ranked[:, position:] - tails[:, position : position + 1])
            weighted = probs * block.weights[:, None]
            diagonal += np.bincount(contenders.ravel(), weights=weighted.ravel(), minlength=packed.n)
            np.add.at(
                matrix,
                (contenders[:, :, None], contenders[:, None, :]),
                weighted[:, :, None] * probs[:, None, :],
            )
    return matrix - np.diag(diagonal)


def _project(x: NDArray[np.float64], b: float) -> NDArray[np.float64]:
    if b == 0:
        return np.zeros_like(x)
    centered = x - x.mean()
    if np.isinf(b) or np.max(np.abs(centered)) <= b:
        return centered

    # sum(clip(x - shift, -b, b)) is nonincreasing in the shift
    lo, hi = float(x.min()) - b, float(x.max()) + b
    shift = 0.5 * (lo + hi)
    for _ in range(PROJECTION_MAX_BISECTIONS):
        shift = 0.5 * (lo + hi)
        total = float(np.clip(x - shift, -b, b).sum())
        if abs(total) <= PROJECTION_TOLERANCE:
            break
        if total > 0:
            lo = shift
        else:
            hi = shift
    return np.clip(x - shift, -b, b)


def project_theta(x: ArrayLike, b: float) -> PreferenceVector:
    """
    Euclidean projection onto `{sum = 0} & [-b, b]^n`.

    The projection has the form `clip(x - shift, -b, b)`; the shift is found by bisection until
    the coordinates sum to zero within `1e-12`.

    Example:
        >>> project_theta([2.0, -2.0], b=0.5).theta
        (0.5, -0.5)
    """
    values = np.asarray(x, dtype=np.float64)
    return PreferenceVector.from_array(_project(values, b), b=b)


def _degenerate_items(packed: PackedRankings) -> list[int]:
    return [int(item) for item in np.flatnonzero(packed.wins <= 0)]


def _mm_update(
    packed: PackedRankings, values: NDArray[np.float64], wins: NDArray[np.float64]
) -> NDArray[np.float64]:
    denominator = np.zeros(packed.n)
    for block in packed.blocks:
        ranked = values[block.rankings]
        rounds = np.exp(_round_masses(_tails(ranked)))
        denominator += np.bincount(
            block.rankings.ravel(),
            weights=(rounds * block.weights[:, None]).ravel(),
            minlength=packed.n,
        )
    updated = np.log(wins) - np.log(denominator)
    return updated - updated.mean()


def mm_step(theta: PreferenceVector | ArrayLike, dataset: RankingsLike) -> NDArray[np.float64]:
    """
    One minorization-maximization update, returned in log space and recentered to sum zero.

    In `w = exp(theta)` space, `w_i <- W_i / sum (sum of w over the contention set)^-1`, the
    outer sum running over every selection round that item `i` contends in and `W_i` counting
    the rounds it wins. The log-likelihood never decreases across a step.

    Raises:
        DegenerateItemError: If some item never wins a round.
    """
    packed = _packed(dataset)
    degenerate = _degenerate_items(packed)
    if degenerate:
        raise DegenerateItemError(degenerate)
    return _mm_update(packed, theta_values(theta), packed.wins)


def _relative_change(previous: float, current: float) -> float:
    return abs(current - previous) / max(1.0, abs(current))


def _mapping_norm(values: NDArray[np.float64], grad: NDArray[np.float64], b: float) -> float:
    return float(np.linalg.norm(_project(values + grad, b) - values))


def _projected_gradient(
    objective: Callable[[NDArray[np.float64]], float],
    grad_fn: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    start: NDArray[np.float64],
    b: float,
    opts: MleOptions,
) -> tuple[NDArray[np.float64], float, int, bool]:
    rule: StepRule = opts.step_rule
    values = _project(start, b)
    current = objective(values)
    step = rule.initial_step
    converged = False
    iteration = 0

    while iteration < opts.max_iters:
        grad = grad_fn(values)
        if _mapping_norm(values, grad, b) < opts.tol_grad:
            converged = True
            break

        iteration += 1
        step = min(rule.initial_step, step / rule.shrink)
        for _ in range(MAX_BACKTRACKS):
            candidate = _project(values + step * grad, b)
            value = objective(candidate)
            if value >= current + rule.sufficient_increase * float(grad @ (candidate - values)):
                break
            step *= rule.shrink
        else:
            # no representable step improves the objective
            converged = True
            break

        if not np.isfinite(value):
            raise NumericalFailureError(f"non-finite objective at iteration {iteration}")
        previous, current, values = current, value, candidate
        if _relative_change(previous, current) <= opts.tol_rel_ll:
            converged = True
            break

    return values, current, iteration, converged


def _mm_then_project(
    packed: PackedRankings, b: float, opts: MleOptions
) -> tuple[NDArray[np.float64], int, bool]:
    wins = packed.wins
    values = np.zeros(packed.n)
    current = log_likelihood(values, packed)
    converged = False
    iteration = 0
    while iteration < opts.max_iters:
        iteration += 1
        values = _mm_update(packed, values, wins)
        previous, current = current, log_likelihood(values, packed)
        if not np.isfinite(current):
            raise NumericalFailureError(f"non-finite log-likelihood at MM iteration {iteration}")
        if _relative_change(previous, current) <= opts.tol_rel_ll:
            converged = True
            break
    return _project(values, b), iteration, converged


def solve_mle(dataset: RankingDataset, b: float, opts: MleOptions | None = None) -> MleResult:
    """
    Maximize the Plackett-Luce log-likelihood over `Theta_b`.

    Args:
        dataset (RankingDataset): The observed rankings.
        b (float): Box bound of the feasible set.
        opts (MleOptions | None, optional): Solver and stopping options.

    Returns:
        MleResult: The maximizer with its objective value and convergence diagnostics.

    Raises:
        DisconnectedGraphError: If the comparison graph of `dataset` is disconnected.
        DegenerateItemError: If `b` is infinite and some item never wins a round.
    """
    opts = opts or MleOptions()
    method = opts.method
    with logfire.span("solve_mle", method=str(method), n=dataset.n, m=dataset.m, b=b):
        require_connected(build_graph(dataset))
        packed = pack_rankings(dataset)
        degenerate = _degenerate_items(packed)
        if degenerate and math.isinf(b):
            raise DegenerateItemError(degenerate)

        if method == MleMethods.MM_THEN_PROJECT:
            if degenerate:
                logger.warning(
                    f"Items {degenerate} never win a round, unconstrained MM diverges; "
                    "using projected gradient instead"
                )
                method = MleMethods.PROJECTED_GRADIENT

        if method == MleMethods.MM_THEN_PROJECT:
            values, iterations, converged = _mm_then_project(packed, b, opts)
            final = log_likelihood(values, packed)
        else:
            values, final, iterations, converged = _projected_gradient(
                lambda point: log_likelihood(point, packed),
                lambda point: gradient(point, packed),
                np.zeros(packed.n),
                b,
                opts,
            )

        grad_norm = _mapping_norm(values, gradient(values, packed), b)
        if not converged:
            logger.warning(f"{method} stopped after {iterations} iterations without converging")
        logger.debug(f"{method} finished after {iterations} iterations, log-likelihood {final:.6f}")

    return MleResult(
        theta_hat=PreferenceVector.from_array(values, b=b),
        final_log_likelihood=final,
        iterations=iterations,
        converged=converged,
        grad_norm=grad_norm,
        method=method,
    )


def _pair_arrays(
    pairs: Sequence[WeightedPair] | BrokenDataset,
) -> tuple[NDArray[np.int64], NDArray[np.int64], NDArray[np.float64]]:
    if isinstance(pairs, BrokenDataset):
        return pairs.winners, pairs.losers, pairs.weights
    return (
        np.asarray([pair.winner for pair in pairs], dtype=np.int64),
        np.asarray([pair.loser for pair in pairs], dtype=np.int64),
        np.asarray([pair.weight for pair in pairs], dtype=np.float64),
    )


def _pairwise_objective(
    values: NDArray[np.float64],
    winners: NDArray[np.int64],
    losers: NDArray[np.int64],
    weights: NDArray[np.float64],
) -> float:
    return float(weights @ (values[winners] - np.logaddexp(values[winners], values[losers])))


def _pairwise_grad(
    values: NDArray[np.float64],
    winners: NDArray[np.int64],
    losers: NDArray[np.int64],
    weights: NDArray[np.float64],
) -> NDArray[np.float64]:
    surprise = weights * special.expit(values[losers] - values[winners])
    return np.bincount(winners, weights=surprise, minlength=values.size) - np.bincount(
        losers, weights=surprise, minlength=values.size
    )


def pairwise_log_likelihood(
    theta: PreferenceVector | ArrayLike, pairs: Sequence[WeightedPair] | BrokenDataset
) -> float:
    """`sum_t weight_t * [theta_winner - log(exp(theta_winner) + exp(theta_loser))]`."""
    return _pairwise_objective(theta_values(theta), *_pair_arrays(pairs))


def pairwise_gradient(
    theta: PreferenceVector | ArrayLike, pairs: Sequence[WeightedPair] | BrokenDataset
) -> NDArray[np.float64]:
    """
    Gradient of `pairwise_log_likelihood`: item `i` gains `weight * sigma(theta_loser - theta_i)`
    for every comparison it wins and loses the same amount for every one it loses.
    """
    return _pairwise_grad(theta_values(theta), *_pair_arrays(pairs))


def solve_pairwise_mle(
    pairs: Sequence[WeightedPair] | BrokenDataset,
    n: int,
    b: float,
    opts: MleOptions | None = None,
) -> MleResult:
    """
    Maximize the weighted pairwise log-likelihood over `Theta_b` by projected gradient ascent.

    Used for both breaking schemes: unit weights after IB, `1 / (k_j - 1)` after FB.

    Raises:
        DisconnectedGraphError: If the pairwise comparison graph is disconnected.
    """
    opts = opts or MleOptions()
    winners, losers, weights = _pair_arrays(pairs)
    with logfire.span("solve_pairwise_mle", n=n, pairs=int(winners.size), b=b):
        graph = pairs.graph() if isinstance(pairs, BrokenDataset) else pairwise_graph(n, pairs)
        require_connected(graph)
        values, final, iterations, converged = _projected_gradient(
            lambda point: _pairwise_objective(point, winners, losers, weights),
            lambda point: _pairwise_grad(point, winners, losers, weights),
            np.zeros(n),
            b,
            opts,
        )
        grad_norm = _mapping_norm(values, _pairwise_grad(values, winners, losers, weights), b)
        if not converged:
            logger.warning(f"Pairwise solver stopped after {iterations} iterations without converging")

    return MleResult(
        theta_hat=PreferenceVector.from_array(values, b=b),
        final_log_likelihood=final,
        iterations=iterations,
        converged=converged,
        grad_norm=grad_norm,
        method=MleMethods.PROJECTED_GRADIENT,
    )


def normalized_mse(
    theta_hat: PreferenceVector | ArrayLike, theta_star: PreferenceVector | ArrayLike, mk: float
) -> float:
    """`(m k / n^2) * ||theta_hat - theta_star||^2` with both vectors centered first."""
    estimate = theta_values(theta_hat)
    truth = theta_values(theta_star)
    difference = (estimate - estimate.mean()) - (truth - truth.mean())
    return float(mk / truth.size**2 * (difference @ difference))
