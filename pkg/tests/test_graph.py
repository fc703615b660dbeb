import numpy as np
import pytest

from app._exceptions import DisconnectedGraphError
from app.core.graph import (
    build_graph,
    connected_components,
    graph_from_edges,
    graph_stats,
    is_connected,
    laplacian,
    laplacian_spectrum,
    pairwise_graph,
    require_connected,
)
from app.core.plackett_luce import random_subsets
from app.models.models import PartialRanking, RankingDataset, WeightedPair


def dataset_of(n, *rankings):
    return RankingDataset(
        n=n,
        rankings=tuple(PartialRanking(user=user, items=items) for user, items in enumerate(rankings)),
    )


def random_dataset(rng, n, m, k):
    subsets = random_subsets(n, m, k, rng)
    return RankingDataset(
        n=n, rankings=tuple(PartialRanking(user=j, items=s) for j, s in enumerate(subsets))
    )


def test_single_triple():
    """One ranking of three items gives each pair weight 1/2 and every degree 1."""
    graph = build_graph(dataset_of(3, (0, 1, 2)))
    np.testing.assert_allclose(graph.adjacency.toarray(), [[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])
    np.testing.assert_allclose(graph.degrees, [1.0, 1.0, 1.0])


def test_single_pair():
    graph = build_graph(dataset_of(2, (1, 0)))
    np.testing.assert_allclose(graph.adjacency.toarray(), [[0, 1], [1, 0]])
    np.testing.assert_allclose(graph.degrees, [1.0, 1.0])


def test_two_full_rankings():
    """Two users ranking all three items: unit weights, degree 2, trace 6."""
    graph = build_graph(dataset_of(3, (0, 1, 2), (2, 1, 0)))
    np.testing.assert_allclose(graph.adjacency.toarray(), [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    np.testing.assert_allclose(graph.degrees, [2.0, 2.0, 2.0])
    assert laplacian_spectrum(graph).trace == pytest.approx(6.0)


def test_edges_upper_triangle():
    first, second, weights = build_graph(dataset_of(3, (2, 0), (1, 2))).edges
    assert list(zip(first.tolist(), second.tolist(), strict=True)) == [(0, 2), (1, 2)]
    np.testing.assert_allclose(weights, [1.0, 1.0])


def test_triangle_spectrum():
    graph = graph_from_edges(3, [0, 0, 1], [1, 2, 2], [1.0, 1.0, 1.0])
    spectrum = laplacian_spectrum(graph)
    np.testing.assert_allclose(spectrum.eigenvalues, [0.0, 3.0, 3.0], atol=1e-10)
    assert is_connected(spectrum)


def test_path_spectrum():
    graph = graph_from_edges(3, [0, 1], [1, 2], [1.0, 1.0])
    spectrum = laplacian_spectrum(graph)
    np.testing.assert_allclose(spectrum.eigenvalues, [0.0, 1.0, 3.0], atol=1e-10)
    assert is_connected(spectrum)
    assert spectrum.lambda2 == pytest.approx(1.0)
    assert spectrum.lambda_n == pytest.approx(3.0)


def test_two_disjoint_edges():
    graph = graph_from_edges(4, [0, 2], [1, 3], [1.0, 1.0])
    spectrum = laplacian_spectrum(graph)
    assert spectrum.lambda2 <= 1e-8
    assert not is_connected(spectrum)
    assert connected_components(graph) == [[0, 1], [2, 3]]


def test_require_connected_lists_components():
    dataset = dataset_of(5, (0, 1), (3, 2), (4, 2))
    with pytest.raises(DisconnectedGraphError) as excinfo:
        require_connected(build_graph(dataset))
    assert excinfo.value.components == [[0, 1], [2, 3, 4]]
    assert excinfo.value.to_dict()["details"] == {"components": [[0, 1], [2, 3, 4]]}


def test_isolated_item_is_disconnected():
    """An item no user ranks is its own component."""
    graph = build_graph(dataset_of(4, (0, 1, 2), (2, 1)))
    assert not is_connected(laplacian_spectrum(graph))
    assert connected_components(graph)[-1] == [3]


def test_laplacian_annihilates_ones(rng):
    graph = build_graph(random_dataset(rng, 12, 30, 4))
    np.testing.assert_allclose(laplacian(graph) @ np.ones(12), 0.0, atol=1e-10)


@pytest.mark.parametrize("seed", range(100))
def test_random_dataset_identities(seed):
    """Degrees count rankings, L annihilates ones, the trace is the total size and L is PSD."""
    rng = np.random.default_rng(seed)
    sizes = rng.integers(2, 7, size=40).tolist()
    subsets = random_subsets(15, 40, sizes, rng)
    dataset = RankingDataset(
        n=15, rankings=tuple(PartialRanking(user=j, items=s) for j, s in enumerate(subsets))
    )
    graph = build_graph(dataset)
    spectrum = laplacian_spectrum(graph)

    counts = np.bincount([item for subset in subsets for item in subset], minlength=15)
    np.testing.assert_allclose(graph.degrees, counts, rtol=0, atol=1e-12)
    np.testing.assert_allclose(laplacian(graph) @ np.ones(15), 0.0, atol=1e-10)
    assert spectrum.trace == pytest.approx(sum(sizes), rel=1e-6)
    assert spectrum.eigenvalues.sum() == pytest.approx(sum(sizes), rel=1e-6)
    assert abs(spectrum.eigenvalues[0]) <= 1e-8
    assert spectrum.eigenvalues.min() >= -1e-8

    adjacency = graph.adjacency.toarray()
    np.testing.assert_allclose(adjacency, adjacency.T)
    assert np.all(np.diag(adjacency) == 0.0)


def test_random_assignment_concentration():
    """With mk well above n log n the spectrum stays within a factor of mk / (n - 1)."""
    n, m, k = 32, 1200, 4
    center = m * k / (n - 1)
    for seed in range(20):
        spectrum = laplacian_spectrum(build_graph(random_dataset(np.random.default_rng(seed), n, m, k)))
        assert spectrum.lambda2 >= center / 2
        assert spectrum.lambda_n <= 3 * center / 2


def test_pairwise_graph_sums_weights():
    pairs = [
        WeightedPair(winner=0, loser=1, weight=0.5),
        WeightedPair(winner=1, loser=0, weight=0.25),
        WeightedPair(winner=2, loser=1),
    ]
    graph = pairwise_graph(3, pairs)
    np.testing.assert_allclose(graph.adjacency.toarray(), [[0, 0.75, 0], [0.75, 0, 1], [0, 1, 0]])


def test_graph_stats(small_dataset):
    stats = graph_stats(small_dataset)
    assert stats.n == 4
    assert stats.m == 5
    assert stats.total_size == 14
    assert stats.min_degree == pytest.approx(3.0)
    assert stats.max_degree == pytest.approx(4.0)
    assert stats.connected
    assert stats.lambda2 > 0
