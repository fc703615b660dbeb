import math
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from app._enums import BreakingSchemes
from app.core.breaking import break_dataset, full_breaking, random_ib
from app.core.graph import build_graph
from app.core.plackett_luce import sample_pl
from app.models.models import PartialRanking, RankingDataset

DRAWS = 100_000


def test_full_breaking_triple():
    pairs = full_breaking(PartialRanking(items=(2, 0, 1)))
    assert [(pair.winner, pair.loser) for pair in pairs] == [(2, 0), (2, 1), (0, 1)]
    assert all(pair.weight == pytest.approx(0.5) for pair in pairs)


def test_full_breaking_pair():
    pairs = full_breaking(PartialRanking(items=(4, 1)))
    assert [(pair.winner, pair.loser, pair.weight) for pair in pairs] == [(4, 1, 1.0)]


@pytest.mark.parametrize("k", [2, 3, 4, 7])
def test_random_ib_is_a_matching(rng, k):
    ranking = PartialRanking(items=tuple(range(10, 10 + k)))
    positions = {item: position for position, item in enumerate(ranking.items)}
    for _ in range(50):
        pairs = random_ib(ranking, rng)
        assert len(pairs) == k // 2
        touched = [item for pair in pairs for item in (pair.winner, pair.loser)]
        assert len(set(touched)) == len(touched)
        assert all(positions[pair.winner] < positions[pair.loser] for pair in pairs)
        assert all(pair.weight == 1.0 for pair in pairs)


def test_random_ib_uniform_matchings(rng):
    """The three perfect matchings of four items are equally likely."""
    ranking = PartialRanking(items=(0, 1, 2, 3))
    matchings = Counter(
        tuple(sorted((pair.winner, pair.loser) for pair in random_ib(ranking, rng)))
        for _ in range(DRAWS)
    )
    expected = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]
    observed = np.array([matchings[matching] for matching in expected], dtype=float)
    assert observed.sum() == DRAWS
    assert stats.chisquare(observed).pvalue > 0.001


def test_random_ib_uniform_pair_of_three(rng):
    """A ranking of three items keeps one of its three pairs, each equally likely."""
    ranking = PartialRanking(items=(5, 3, 8))
    kept = Counter((pair.winner, pair.loser) for _ in range(DRAWS) for pair in random_ib(ranking, rng))
    observed = np.array([kept[(5, 3)], kept[(5, 8)], kept[(3, 8)]], dtype=float)
    assert observed.sum() == DRAWS
    assert stats.chisquare(observed).pvalue > 0.001


def test_random_ib_pair_follows_bradley_terry(rng):
    """A kept pair from PL data is won with probability e^theta_i / (e^theta_i + e^theta_j)."""
    theta = np.array([0.8, -0.3, 0.1, -0.6])
    expected = math.exp(theta[0]) / (math.exp(theta[0]) + math.exp(theta[2]))
    wins = occurrences = 0
    while occurrences < 10_000:
        for pair in random_ib(sample_pl(theta, range(4), rng), rng):
            if {pair.winner, pair.loser} == {0, 2}:
                occurrences += 1
                wins += pair.winner == 0
    stderr = math.sqrt(expected * (1.0 - expected) / occurrences)
    assert abs(wins / occurrences - expected) < 3 * stderr


def test_random_ib_pairs_are_independent(rng):
    """Outcomes of the two disjoint pairs of a four-item breaking are independent."""
    theta = np.array([0.8, -0.3, 0.1, -0.6])
    table = np.zeros((2, 2))
    while table.sum() < 20_000:
        pairs = random_ib(sample_pl(theta, range(4), rng), rng)
        outcome = {frozenset((pair.winner, pair.loser)): pair.winner for pair in pairs}
        if set(outcome) == {frozenset((0, 1)), frozenset((2, 3))}:
            table[int(outcome[frozenset((0, 1))] == 0), int(outcome[frozenset((2, 3))] == 2)] += 1
    assert stats.chi2_contingency(table).pvalue > 0.001


def test_break_dataset_full(small_dataset):
    broken = break_dataset(small_dataset, BreakingSchemes.FB)
    assert broken.scheme == BreakingSchemes.FB
    expected = [pair for ranking in small_dataset.rankings for pair in full_breaking(ranking)]
    assert broken.pairs == expected
    assert len(broken) == 3 + 3 + 1 + 6 + 1


def test_full_breaking_graph_equals_comparison_graph(small_dataset):
    broken = break_dataset(small_dataset, BreakingSchemes.FB)
    np.testing.assert_allclose(
        broken.graph().adjacency.toarray(), build_graph(small_dataset).adjacency.toarray()
    )


def test_break_dataset_ib_matches_sequential_calls(small_dataset):
    broken = break_dataset(small_dataset, BreakingSchemes.IB, np.random.default_rng(3))
    rng = np.random.default_rng(3)
    expected = [pair for ranking in small_dataset.rankings for pair in random_ib(ranking, rng)]
    assert broken.pairs == expected
    assert len(broken) == sum(ranking.k // 2 for ranking in small_dataset.rankings)


def test_break_dataset_ib_is_reproducible(small_dataset):
    first = break_dataset(small_dataset, BreakingSchemes.IB, np.random.default_rng(11))
    second = break_dataset(small_dataset, BreakingSchemes.IB, np.random.default_rng(11))
    assert first.pairs == second.pairs


def test_break_dataset_pairs_only():
    """On pairwise rankings both schemes keep every comparison with unit weight."""
    dataset = RankingDataset(
        n=3, rankings=(PartialRanking(items=(0, 1)), PartialRanking(items=(2, 1)))
    )
    for scheme in BreakingSchemes:
        broken = break_dataset(dataset, scheme, np.random.default_rng(0))
        assert [(pair.winner, pair.loser, pair.weight) for pair in broken.pairs] == [
            (0, 1, 1.0),
            (2, 1, 1.0),
        ]
