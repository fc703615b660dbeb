from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cache

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg, sparse
from scipy.sparse import csgraph

from app._exceptions import DisconnectedGraphError
from app.core.config import settings
from app.models.models import RankingDataset, WeightedPair
from app.models.response_models import GraphStats

__all__ = [
    "ComparisonGraph",
    "LaplacianSpectrum",
    "build_graph",
    "connected_components",
    "connectivity_tolerance",
    "graph_from_edges",
    "graph_stats",
    "is_connected",
    "laplacian",
    "laplacian_spectrum",
    "pairwise_graph",
    "require_connected",
]


@dataclass(frozen=True, eq=False)
class ComparisonGraph:
    """
    Attributes:
        n (int): Number of items.
        adjacency (sparse.csr_array): Symmetric weight matrix with a zero diagonal.
        degrees (NDArray[np.float64]): Row sums of `adjacency`.
    """

    n: int
    adjacency: sparse.csr_array
    degrees: NDArray[np.float64]

    @property
    def edges(self) -> tuple[NDArray[np.int64], NDArray[np.int64], NDArray[np.float64]]:
        """Edge list `(i, i', weight)` with `i < i'`."""
        upper = sparse.triu(self.adjacency, k=1, format="coo")
        return upper.row.astype(np.int64), upper.col.astype(np.int64), upper.data


@dataclass(frozen=True, eq=False)
class LaplacianSpectrum:
    eigenvalues: NDArray[np.float64]
    trace: float

    @property
    def lambda2(self) -> float:
        return float(self.eigenvalues[1]) if self.eigenvalues.size > 1 else 0.0

    @property
    def lambda_n(self) -> float:
        return float(self.eigenvalues[-1])


@cache
def _upper_pairs(k: int) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    return np.triu_indices(k, 1)


def graph_from_edges(
    n: int, first: ArrayLike, second: ArrayLike, weights: ArrayLike
) -> ComparisonGraph:
    """
    Accumulate weighted undirected edges (duplicates summed) into a `ComparisonGraph`.
    """
    first = np.asarray(first, dtype=np.int64)
    second = np.asarray(second, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    rows = np.concatenate([first, second])
    cols = np.concatenate([second, first])
    data = np.concatenate([weights, weights])
    adjacency = sparse.coo_array((data, (rows, cols)), shape=(n, n)).tocsr()
    adjacency.sum_duplicates()
    degrees = np.asarray(adjacency.sum(axis=1), dtype=np.float64).ravel()
    return ComparisonGraph(n=n, adjacency=adjacency, degrees=degrees)


def build_graph(dataset: RankingDataset) -> ComparisonGraph:
    """
    Build the comparison graph of `dataset`.

    A ranking of size `k` adds `1 / (k - 1)` to the weight of every pair of items it contains,
    so it adds exactly one to the degree of each of its items.

    Args:
        dataset (RankingDataset): The rankings; only their item sets matter.

    Returns:
        ComparisonGraph: The weighted graph over all `n` items, isolated items included.

    Example:
        >>> dataset = RankingDataset(n=3, rankings=(PartialRanking(items=(0, 1, 2)),))
        >>> build_graph(dataset).degrees
        array([1., 1., 1.])
    """
    first: list[NDArray[np.int64]] = []
    second: list[NDArray[np.int64]] = []
    weights: list[NDArray[np.float64]] = []
    for ranking in dataset.rankings:
        items = np.asarray(ranking.items, dtype=np.int64)
        upper, lower = _upper_pairs(ranking.k)
        first.append(items[upper])
        second.append(items[lower])
        weights.append(np.full(upper.size, 1.0 / (ranking.k - 1)))

    return graph_from_edges(
        dataset.n, np.concatenate(first), np.concatenate(second), np.concatenate(weights)
    )


def pairwise_graph(n: int, pairs: Sequence[WeightedPair]) -> ComparisonGraph:
    """The comparison graph of weighted pairwise comparisons, weights summed per item pair."""
    return graph_from_edges(
        n,
        [pair.winner for pair in pairs],
        [pair.loser for pair in pairs],
        [pair.weight for pair in pairs],
    )


def laplacian(graph: ComparisonGraph) -> NDArray[np.float64]:
    """Dense `L = D - A`."""
    return np.diag(graph.degrees) - graph.adjacency.toarray()


def laplacian_spectrum(graph: ComparisonGraph) -> LaplacianSpectrum:
    """
    Eigenvalues of the dense Laplacian in ascending order, with its trace.

    Args:
        graph (ComparisonGraph): The comparison graph.

    Returns:
        LaplacianSpectrum: `eigenvalues[0]` is zero up to rounding; `lambda2` is the spectral gap.
    """
    matrix = laplacian(graph)
    eigenvalues = linalg.eigh(matrix, eigvals_only=True)
    return LaplacianSpectrum(eigenvalues=np.asarray(eigenvalues), trace=float(np.trace(matrix)))


def connectivity_tolerance(spectrum: LaplacianSpectrum) -> float:
    """`PL_CONNECTIVITY_RTOL * max(1, lambda_n)`."""
    return settings.connectivity_rtol * max(1.0, spectrum.lambda_n)


def is_connected(spectrum: LaplacianSpectrum, tol: float | None = None) -> bool:
    """
    Whether the spectral gap `lambda_2` exceeds `tol`, by default `1e-8 * max(1, lambda_n)`.
    """
    if spectrum.eigenvalues.size < 2:
        return True
    tol = connectivity_tolerance(spectrum) if tol is None else tol
    return spectrum.lambda2 > tol


def connected_components(graph: ComparisonGraph) -> list[list[int]]:
    """Item lists of the connected components, ordered by their smallest item."""
    _, labels = csgraph.connected_components(graph.adjacency, directed=False)
    components: dict[int, list[int]] = {}
    for item, label in enumerate(labels):
        components.setdefault(int(label), []).append(item)
    return sorted(components.values(), key=lambda component: component[0])


def require_connected(graph: ComparisonGraph, spectrum: LaplacianSpectrum | None = None) -> None:
    """
    Raises:
        DisconnectedGraphError: If the graph has more than one component.
    """
    spectrum = spectrum or laplacian_spectrum(graph)
    if not is_connected(spectrum):
        raise DisconnectedGraphError(connected_components(graph))


def graph_stats(dataset: RankingDataset) -> GraphStats:
    """Sizes, extreme degrees, spectral gap and connectivity of the comparison graph of `dataset`."""
    graph = build_graph(dataset)
    spectrum = laplacian_spectrum(graph)
    return GraphStats(
        n=dataset.n,
        m=dataset.m,
        total_size=dataset.total_size,
        min_degree=float(graph.degrees.min()),
        max_degree=float(graph.degrees.max()),
        lambda2=spectrum.lambda2,
        lambda_n=spectrum.lambda_n,
        connected=is_connected(spectrum),
    )
