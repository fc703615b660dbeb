from __future__ import annotations

import threading
from collections.abc import Callable, Iterable
from typing import Generic, TypeVar

import numpy as np

from app._enums import BreakingSchemes, EstimatorVariants
from app._exceptions import EstimatorNotFoundError
from app.core.breaking import break_dataset
from app.core.estimator import solve_mle, solve_pairwise_mle
from app.models.models import MleResult, RankingDataset
from app.models.request_models import MleOptions

__all__ = [
    "Estimator",
    "EstimatorRegistry",
    "estimator_factory",
    "estimator_registry",
    "run_estimator",
]

EstimatorType = TypeVar("EstimatorType")

Estimator = Callable[[RankingDataset, float, MleOptions, np.random.Generator], MleResult]


class EstimatorRegistry(Generic[EstimatorType]):
    """
    A thread-safe registry mapping estimator variants to estimator callables.

    Estimators are created through a factory the first time a variant is registered, then shared
    by every caller; the experiment runner looks them up from worker threads.

    Type Parameters:
        EstimatorType: The type of the registered entries (e.g., `Estimator`).
    """

    def __init__(self, estimator_factory: Callable[[str], EstimatorType]) -> None:
        """
        Initialize the registry.

        Args:
            estimator_factory (Callable[[str], EstimatorType]):
                A callable that accepts a variant name and returns the matching estimator.
        """
        self._estimators: dict[str, EstimatorType] = {}
        self._lock = threading.Lock()
        self._estimator_factory = estimator_factory

    def register_estimator(self, variant: str, alias: str | None = None) -> EstimatorType:
        """
        Register an estimator under its variant name, or under `alias` when given.

        Args:
            variant (str): The variant to build through the factory.
            alias (str | None, optional): An optional key to register it under. Defaults to None.

        Returns:
            EstimatorType: The newly registered estimator.

        Raises:
            KeyError: If the key is already registered.
        """
        key = alias or variant

        with self._lock:
            if key in self._estimators:
                raise KeyError(f"Estimator '{key}' is already registered.")

            estimator = self._estimator_factory(variant)
            self._estimators[key] = estimator

        return estimator

    def register_estimators(self, variants: Iterable[EstimatorVariants]) -> None:
        """
        Register several variants at once, each under its own name.

        Args:
            variants (Iterable[EstimatorVariants]): The variants to register.

        Raises:
            KeyError: If one of them is already registered.
        """
        for variant in variants:
            self.register_estimator(variant)

    def get_estimator(self, key: str) -> EstimatorType:
        """
        Retrieve a registered estimator by its key.

        Args:
            key (str): A variant name or an alias.

        Returns:
            EstimatorType: The estimator registered under `key`.

        Raises:
            EstimatorNotFoundError: If nothing is registered under `key`.
        """
        with self._lock:
            if key not in self._estimators:
                raise EstimatorNotFoundError(key)

            return self._estimators[key]

    def list_registered_estimators(self) -> list[str]:
        """
        List the keys of all registered estimators, in registration order.

        Returns:
            list[str]: Variant names and aliases.
        """
        with self._lock:
            return list(self._estimators.keys())


def estimate_ml(
    dataset: RankingDataset, b: float, opts: MleOptions, rng: np.random.Generator
) -> MleResult:
    """The ranking-likelihood maximizer; `rng` is unused."""
    return solve_mle(dataset, b, opts)


def estimate_ib(
    dataset: RankingDataset, b: float, opts: MleOptions, rng: np.random.Generator
) -> MleResult:
    """
    Break every ranking into disjoint unit-weight pairs drawn from `rng`, then maximize the
    pairwise likelihood.
    """
    broken = break_dataset(dataset, BreakingSchemes.IB, rng)
    return solve_pairwise_mle(broken, dataset.n, b, opts)


def estimate_fb(
    dataset: RankingDataset, b: float, opts: MleOptions, rng: np.random.Generator
) -> MleResult:
    """Full breaking with weights `1 / (k_j - 1)` followed by the pairwise maximizer."""
    broken = break_dataset(dataset, BreakingSchemes.FB, rng)
    return solve_pairwise_mle(broken, dataset.n, b, opts)


def estimator_factory(variant: str) -> Estimator:
    """
    Build the estimator of a variant: `ml` maximizes the ranking likelihood directly, `ib` and
    `fb` break the rankings into pairwise comparisons first.

    Raises:
        EstimatorNotFoundError: If the variant is unknown.
    """
    estimators: dict[str, Estimator] = {
        EstimatorVariants.ML: estimate_ml,
        EstimatorVariants.IB: estimate_ib,
        EstimatorVariants.FB: estimate_fb,
    }
    if variant not in estimators:
        raise EstimatorNotFoundError(variant)
    return estimators[variant]


estimator_registry: EstimatorRegistry[Estimator] = EstimatorRegistry(estimator_factory)
estimator_registry.register_estimators(EstimatorVariants)


def run_estimator(
    dataset: RankingDataset,
    variant: str,
    b: float,
    seed: int,
    opts: MleOptions | None = None,
) -> MleResult:
    """
    Look up `variant` in the registry and run it with a generator seeded from `seed`.

    Raises:
        EstimatorNotFoundError: If the variant is not registered.
    """
    estimator = estimator_registry.get_estimator(variant)
    return estimator(dataset, b, opts or MleOptions(), np.random.default_rng(seed))
