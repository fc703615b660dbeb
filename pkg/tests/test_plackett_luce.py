import math
from collections import Counter
from itertools import permutations

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from app._enums import PlSamplers, RankingModels
from app._exceptions import (
    EmptyAssignmentError,
    InvalidItemIndexError,
    InvalidPartitionError,
    InvalidSubsetError,
    InvalidSubsetSizeError,
)
from app.core.plackett_luce import (
    gaussian_noise,
    gen_theta_star,
    gumbel_noise,
    partition_subsets,
    random_subsets,
    ranking_log_prob,
    restrict_ranking,
    sample_dataset,
    sample_pl,
    sample_thurstone,
)
from app.models.models import PartialRanking, PreferenceVector, ThurstoneNoise

DRAWS = 100_000
THETA_3 = np.array([math.log(2.0), 0.0, -math.log(2.0)])


def pl_probabilities(theta, items):
    orders = list(permutations(items))
    probabilities = np.array(
        [math.exp(ranking_log_prob(theta, PartialRanking(items=order))) for order in orders]
    )
    return orders, probabilities / probabilities.sum()


def chisquare_pvalue(draws, orders, probabilities):
    counts = Counter(draws)
    observed = np.array([counts.get(order, 0) for order in orders], dtype=float)
    return stats.chisquare(observed, observed.sum() * probabilities).pvalue


def test_sample_pl_single_item():
    """A single-item subset always yields that item."""
    rng = np.random.default_rng(0)
    ranking = sample_pl(np.zeros(8), [7], rng)
    assert ranking.items == (7,)


def test_sample_pl_two_items(rng):
    """theta = (2, -2) ranks item 0 first with probability e^4 / (1 + e^4)."""
    expected = math.exp(4.0) / (1.0 + math.exp(4.0))
    wins = sum(sample_pl([2.0, -2.0], [0, 1], rng).items[0] == 0 for _ in range(DRAWS))
    stderr = math.sqrt(expected * (1.0 - expected) / DRAWS)
    assert abs(wins / DRAWS - expected) < 3 * stderr


@pytest.mark.parametrize("sampler", [PlSamplers.SEQUENTIAL, PlSamplers.LATENT])
def test_sample_pl_permutation_distribution(rng, sampler):
    """Both constructions match the sequential product probabilities."""
    orders, probabilities = pl_probabilities(THETA_3, (0, 1, 2))
    assert probabilities[orders.index((0, 1, 2))] == pytest.approx(8.0 / 21.0, abs=1e-12)

    draws = [sample_pl(THETA_3, [0, 1, 2], rng, sampler=sampler).items for _ in range(DRAWS)]
    assert chisquare_pvalue(draws, orders, probabilities) > 0.001


def test_sequential_and_latent_agree_on_four_items(rng):
    """Both samplers give the same distribution over the 24 orders of four items."""
    theta = np.array([0.5, 0.0, -0.3, 0.2])
    orders = list(permutations(range(4)))
    table = []
    for sampler in (PlSamplers.SEQUENTIAL, PlSamplers.LATENT):
        counts = Counter(sample_pl(theta, range(4), rng, sampler=sampler).items for _ in range(DRAWS))
        table.append([counts[order] for order in orders])
    assert stats.chi2_contingency(np.array(table, dtype=float)).pvalue > 0.001


def test_sample_pl_rejects_bad_subsets(rng):
    with pytest.raises(EmptyAssignmentError):
        sample_pl(THETA_3, [], rng)
    with pytest.raises(InvalidItemIndexError):
        sample_pl(THETA_3, [0, 3], rng)
    with pytest.raises(InvalidSubsetError):
        sample_pl(THETA_3, [1, 1], rng)


def test_sample_pl_records_user(rng):
    assert sample_pl(THETA_3, [0, 2], rng, user=11).user == 11


def test_thurstone_gumbel_matches_pl(rng):
    """Gumbel noise reproduces the Plackett-Luce permutation distribution."""
    orders, probabilities = pl_probabilities(THETA_3, (0, 1, 2))
    noise = gumbel_noise()
    draws = [sample_thurstone(THETA_3, [0, 1, 2], noise, rng).items for _ in range(DRAWS)]
    assert chisquare_pvalue(draws, orders, probabilities) > 0.001


def test_thurstone_equal_utilities_uniform(rng):
    """Equal utilities make every order equally likely."""
    orders = list(permutations((0, 1, 2)))
    noise = gaussian_noise()
    draws = [sample_thurstone(np.zeros(3), [0, 1, 2], noise, rng).items for _ in range(DRAWS)]
    assert chisquare_pvalue(draws, orders, np.full(6, 1.0 / 6.0)) > 0.001


def test_thurstone_gaussian_two_items(rng):
    """theta = (1, -1) with Gaussian noise ranks item 0 first with probability Phi(sqrt 2)."""
    expected = stats.norm.cdf(2.0 / math.sqrt(2.0))
    assert expected == pytest.approx(0.9214, abs=1e-4)

    noise = gaussian_noise()
    wins = sum(
        sample_thurstone([1.0, -1.0], [0, 1], noise, rng).items[0] == 0 for _ in range(DRAWS)
    )
    stderr = math.sqrt(expected * (1.0 - expected) / DRAWS)
    assert abs(wins / DRAWS - expected) < 3 * stderr


def test_thurstone_noise_must_be_increasing():
    with pytest.raises(ValidationError):
        ThurstoneNoise(inverse_cdf=lambda u: -u, fisher_info=1.0)


def test_noise_fisher_information():
    assert gumbel_noise().fisher_info == 1.0
    assert gaussian_noise().fisher_info == 1.0


def test_restrict_ranking():
    full = PartialRanking(items=(3, 1, 4, 2))
    assert restrict_ranking(full, {1, 2}).items == (1, 2)
    assert restrict_ranking(full, {3, 1, 4, 2}).items == full.items
    assert restrict_ranking(full, [2, 3]).items == (3, 2)


def test_restrict_ranking_rejects_missing_items():
    full = PartialRanking(items=(3, 1, 4, 2))
    with pytest.raises(InvalidSubsetError):
        restrict_ranking(full, {1, 5})


def test_restriction_is_plackett_luce(rng):
    """A full ranking restricted to a subset is PL-distributed on that subset."""
    theta = np.array([0.8, -0.3, 0.1, -0.6])
    orders, probabilities = pl_probabilities(theta, (0, 1, 2))
    draws = [
        restrict_ranking(sample_pl(theta, range(4), rng), {0, 1, 2}).items for _ in range(DRAWS)
    ]
    assert chisquare_pvalue(draws, orders, probabilities) > 0.001


def test_ranking_log_prob_values():
    assert ranking_log_prob(np.zeros(3), PartialRanking(items=(2, 0, 1))) == pytest.approx(
        -math.log(6.0), abs=1e-12
    )
    assert ranking_log_prob(THETA_3, PartialRanking(items=(0, 1, 2))) == pytest.approx(
        math.log(8.0 / 21.0), abs=1e-12
    )
    assert math.log(8.0 / 21.0) == pytest.approx(-0.9651, abs=1e-4)


def test_ranking_log_prob_normalization():
    theta = np.array([1.3, -0.4, 0.0, 2.2, -3.1])
    for subset in [(0, 1, 2, 3), (0, 1, 2, 3, 4), (1, 4)]:
        total = math.fsum(
            math.exp(ranking_log_prob(theta, PartialRanking(items=order)))
            for order in permutations(subset)
        )
        assert total == pytest.approx(1.0, abs=1e-10)


def test_ranking_log_prob_shift_invariance():
    theta = np.array([0.5, -1.5, 1.0, 0.0])
    ranking = PartialRanking(items=(2, 0, 3, 1))
    base = ranking_log_prob(theta, ranking)
    for shift in (-3.0, 1.0, 7.0):
        assert ranking_log_prob(theta + shift, ranking) == pytest.approx(base, abs=1e-10)


def test_ranking_log_prob_large_range():
    """Utilities of magnitude 30 do not overflow."""
    theta = np.array([30.0, -30.0, 0.0])
    value = ranking_log_prob(theta, PartialRanking(items=(1, 2, 0)))
    assert math.isfinite(value)
    assert value < -50.0


def test_random_subsets_uniform_pairs(rng):
    subsets = random_subsets(3, DRAWS, 2, rng)
    orders = [(0, 1), (0, 2), (1, 2)]
    assert chisquare_pvalue(subsets, orders, np.full(3, 1.0 / 3.0)) > 0.001


def test_random_subsets_uniform_triples(rng):
    subsets = random_subsets(4, DRAWS, 3, rng)
    orders = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    assert chisquare_pvalue(subsets, orders, np.full(4, 0.25)) > 0.001


def test_random_subsets_full_set(rng):
    assert random_subsets(5, 10, 5, rng) == [(0, 1, 2, 3, 4)] * 10


def test_random_subsets_mixed_sizes(rng):
    subsets = random_subsets(6, 3, [2, 4, 6], rng)
    assert [len(subset) for subset in subsets] == [2, 4, 6]


@pytest.mark.parametrize("size", [1, 6])
def test_random_subsets_rejects_sizes(rng, size):
    with pytest.raises(InvalidSubsetSizeError):
        random_subsets(5, 2, size, rng)


def test_partition_subsets_covers_items(rng):
    blocks = partition_subsets(4, 2, rng)
    assert len(blocks) == 2
    assert sorted(item for block in blocks for item in block) == [0, 1, 2, 3]
    assert len(partition_subsets(1024, 512, rng)) == 2


def test_partition_subsets_uniform(rng):
    partitions = [tuple(sorted(partition_subsets(4, 2, rng))) for _ in range(DRAWS)]
    orders = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]
    assert chisquare_pvalue(partitions, orders, np.full(3, 1.0 / 3.0)) > 0.001


def test_partition_subsets_requires_divisor(rng):
    with pytest.raises(InvalidPartitionError):
        partition_subsets(10, 3, rng)


def test_gen_theta_star(rng):
    assert np.all(gen_theta_star(6, 0.0, rng).array == 0.0)

    pair = gen_theta_star(2, 3.0, rng)
    assert pair.theta[0] == pytest.approx(-pair.theta[1], abs=1e-15)
    assert math.fsum(pair.theta) == pytest.approx(0.0, abs=1e-15)
    assert pair.b == 6.0


def test_gen_theta_star_centered_mean(rng):
    n, b, draws = 5, 1.0, 10_000
    samples = np.array([gen_theta_star(n, b, rng).array for _ in range(draws)])
    stderr = math.sqrt((1.0 - 1.0 / n) * b**2 / 3.0 / draws)
    assert np.all(np.abs(samples.mean(axis=0)) < 3 * stderr)


def test_sample_dataset(rng):
    theta = gen_theta_star(6, 1.0, rng)
    subsets = random_subsets(6, 4, 3, rng)
    for model in RankingModels:
        rankings = sample_dataset(theta, subsets, rng, model=model)
        assert [ranking.user for ranking in rankings] == [0, 1, 2, 3]
        assert [tuple(sorted(ranking.items)) for ranking in rankings] == subsets


def test_preference_vector_invariants():
    PreferenceVector(theta=(1.0, -1.0), b=1.0)
    with pytest.raises(ValidationError):
        PreferenceVector(theta=(1.0, 0.5), b=2.0)
    with pytest.raises(ValidationError):
        PreferenceVector(theta=(1.5, -1.5), b=1.0)
    with pytest.raises(ValidationError):
        PreferenceVector.model_validate({"n": 3, "b": 1.0, "theta": [0.5, -0.5]})


def test_partial_ranking_invariants():
    with pytest.raises(ValidationError):
        PartialRanking(items=(0, 1, 0))
    with pytest.raises(ValidationError):
        PartialRanking(items=(-1, 2))
