from __future__ import annotations

from itertools import product

import logfire
import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import stats

from app._exceptions import DisconnectedGraphError, EstimatorNotFoundError
from app.core.bounds import cr_limit_normalized
from app.core.config import settings
from app.core.estimator import normalized_mse
from app.core.graph import build_graph, is_connected, laplacian_spectrum
from app.core.plackett_luce import (
    gen_theta_star,
    partition_subsets,
    ranking_positions,
    restrict_ranking,
    sample_pl,
)
from app.core.registries import estimator_registry
from app.models.models import PartialRanking, RankingDataset
from app.models.request_models import ExperimentConfig
from app.models.response_models import ExperimentRow
from app.utils.logger import logger

__all__ = ["cell_grid", "partial_rankings", "run_experiment", "run_replicate", "summarize"]

SUMMARY_KEYS = ["b", "d", "k", "estimator"]


def cell_grid(config: ExperimentConfig) -> list[tuple[float, int, int]]:
    """The `(b, d, k)` cells in a fixed order; a cell's position seeds its replicates."""
    return list(product(config.b_values, config.d_values, config.k_values))


def partial_rankings(
    full_rankings: list[PartialRanking], n: int, k: int, rng: np.random.Generator
) -> list[PartialRanking]:
    """
    Cut each full ranking along its own random partition into `n / k` rankings of size `k`.
    """
    rankings: list[PartialRanking] = []
    for full in full_rankings:
        positions = ranking_positions(full)
        for block in partition_subsets(n, k, rng):
            restricted = restrict_ranking(full, block, positions)
            rankings.append(PartialRanking(user=len(rankings), items=restricted.items))
    return rankings


def run_replicate(
    config: ExperimentConfig, cell_index: int, b: float, d: int, k: int, replicate: int
) -> list[ExperimentRow]:
    """
    One replicate of one cell, seeded from `(seed, cell_index, replicate)` alone.
    """
    seed_sequence = np.random.SeedSequence([config.seed, cell_index, replicate])
    data_seed, *estimator_seeds = seed_sequence.spawn(1 + len(config.estimator_variants))
    rng = np.random.default_rng(data_seed)
    n = config.n

    with logfire.span("replicate b={b} d={d} k={k} #{replicate}", b=b, d=d, k=k, replicate=replicate):
        theta_star = gen_theta_star(n, b, rng)
        everyone = range(n)
        full_rankings = [
            sample_pl(theta_star, everyone, rng, sampler=config.sampler, user=user)
            for user in range(d)
        ]
        dataset = RankingDataset(n=n, rankings=tuple(partial_rankings(full_rankings, n, k, rng)))
        spectrum = laplacian_spectrum(build_graph(dataset))
        connected = is_connected(spectrum)
        mk = dataset.total_size

        rows: list[ExperimentRow] = []
        for variant, estimator_seed in zip(config.estimator_variants, estimator_seeds, strict=True):
            row = {
                "b": b,
                "d": d,
                "k": k,
                "replicate": replicate,
                "estimator": variant,
                "normalized_mse": None,
                "cr_limit": cr_limit_normalized(k),
                "lambda2": spectrum.lambda2,
                "lambda_n": spectrum.lambda_n,
                "iterations": 0,
                "converged": False,
            }
            if not connected:
                logger.warning(f"Cell b={b} d={d} k={k} replicate {replicate} is disconnected")
                rows.append(ExperimentRow(**row))
                continue

            estimator = estimator_registry.get_estimator(variant)
            try:
                result = estimator(
                    dataset, config.estimator_b, config.mle, np.random.default_rng(estimator_seed)
                )
            except DisconnectedGraphError:
                logger.warning(f"{variant} comparisons are disconnected in cell b={b} d={d} k={k}")
                rows.append(ExperimentRow(**row))
                continue

            row["normalized_mse"] = normalized_mse(result.theta_hat, theta_star, mk)
            row["iterations"] = result.iterations
            row["converged"] = result.converged
            rows.append(ExperimentRow(**row))

    return rows


def run_experiment(config: ExperimentConfig, threads: int | None = None) -> list[ExperimentRow]:
    """
    Run every replicate of every cell, in parallel threads, and return the rows sorted by
    `(b, d, k, replicate, estimator)`.

    Args:
        config (ExperimentConfig): The grid, replicate count, seed and estimator options.
        threads (int | None, optional): Worker threads; defaults to `settings.threads`.

    Returns:
        list[ExperimentRow]: One row per cell, replicate and estimator.

    Raises:
        EstimatorNotFoundError: If a requested variant is not registered.
    """
    registered = estimator_registry.list_registered_estimators()
    for variant in config.estimator_variants:
        if variant not in registered:
            raise EstimatorNotFoundError(variant)

    threads = threads or settings.threads
    tasks = [
        (cell_index, b, d, k, replicate)
        for cell_index, (b, d, k) in enumerate(cell_grid(config))
        for replicate in range(config.replicates)
    ]
    logger.info(
        f"Running {len(tasks)} replicates over {len(tasks) // config.replicates} cells "
        f"with {threads} thread(s)"
    )

    with logfire.span("run_experiment", n=config.n, tasks=len(tasks)):
        batches = Parallel(n_jobs=threads, prefer="threads")(
            delayed(run_replicate)(config, *task) for task in tasks
        )

    variant_order = {variant: position for position, variant in enumerate(config.estimator_variants)}
    rows = [row for batch in batches for row in batch]
    rows.sort(key=lambda row: (row.b, row.d, row.k, row.replicate, variant_order[row.estimator]))
    return rows


def summarize(rows: list[ExperimentRow]) -> pd.DataFrame:
    """
    Per `(b, d, k, estimator)` statistics of the normalized MSE: mean, standard deviation,
    standard error, a 95% Student-t band, the number of estimates and of disconnected replicates.
    """
    frame = pd.DataFrame([row.model_dump(mode="json") for row in rows])
    frame["normalized_mse"] = frame["normalized_mse"].astype(float)
    grouped = frame.groupby(SUMMARY_KEYS, sort=True)
    summary = grouped.agg(
        mean=("normalized_mse", "mean"),
        std=("normalized_mse", "std"),
        count=("normalized_mse", "count"),
        replicates=("replicate", "size"),
        cr_limit=("cr_limit", "first"),
    ).reset_index()

    summary["disconnected"] = summary["replicates"] - summary["count"]
    summary["sem"] = summary["std"] / np.sqrt(summary["count"])
    quantile = stats.t.ppf(0.975, np.maximum(summary["count"] - 1, 1))
    summary["band_low"] = summary["mean"] - quantile * summary["sem"]
    summary["band_high"] = summary["mean"] + quantile * summary["sem"]
    return summary[
        [
            *SUMMARY_KEYS,
            "mean",
            "std",
            "sem",
            "band_low",
            "band_high",
            "count",
            "disconnected",
            "cr_limit",
        ]
    ]
