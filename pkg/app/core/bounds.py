from __future__ import annotations

import math
from collections.abc import Sequence
from itertools import permutations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from app.core.config import settings
from app.core.estimator import PackedRankings, hessian, ranking_log_probs
from app.core.graph import (
    LaplacianSpectrum,
    build_graph,
    connectivity_tolerance,
    laplacian_spectrum,
)
from app.core.plackett_luce import theta_values
from app.models.models import PreferenceVector, RankingDataset
from app.models.response_models import BoundReport, InputsSummary
from app.utils.logger import logger

__all__ = [
    "bound_report",
    "contention_probability_zero",
    "cor1_upper_bound",
    "cor2_upper_bound",
    "cr_limit_normalized",
    "cramer_rao_bound",
    "cramer_rao_bound_jensen",
    "fisher_cramer_rao_bound",
    "fisher_information",
    "fisher_information_monte_carlo",
    "fisher_information_zero",
    "oracle_lower_bound",
    "oracle_lower_bound_jensen",
    "thm3_upper_bound",
    "thm4_random_assignment_bound",
    "thm4_upper_bound",
]

PL_FISHER_INFO = 1.0


def harmonic(k: int) -> float:
    """`H_k = sum_{ell <= k} 1 / ell`."""
    return math.fsum(1.0 / ell for ell in range(1, k + 1))


def cr_limit_normalized(k: int) -> float:
    """
    `(1 - H_k / k)^-1`, the normalized Cramer-Rao floor for size-`k` rankings.

    Example:
        >>> cr_limit_normalized(2)
        4.0
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    return 1.0 / (1.0 - harmonic(k) / k)


def _oracle_factor(d_low: float, b: float, fisher_info_mu: float) -> float:
    if math.isinf(b):
        penalty = 0.0
    elif d_low <= 0:
        return 0.0
    else:
        penalty = 2.0 * math.pi**2 / (b**2 * d_low)
    return 1.0 / (2.0 * fisher_info_mu + penalty)


def oracle_lower_bound(degrees: ArrayLike, b: float, fisher_info_mu: float = PL_FISHER_INFO) -> float:
    """
    Oracle lower bound on the minimax squared error.

    `sum_{i >= 2} 1 / d_i` divided by `2 I(mu) + 2 pi^2 / (b^2 (d_1 + d_2))`, degrees in
    ascending order. The bound is zero at `b = 0`.

    Args:
        degrees (ArrayLike): Item degrees; sorted here if they are not already.
        b (float): Box bound of the parameter space.
        fisher_info_mu (float, optional): Location Fisher information of the noise, 1 for PL.
    """
    if b == 0:
        return 0.0
    ordered = np.sort(np.asarray(degrees, dtype=np.float64))
    if ordered[1] <= 0:
        return math.inf
    return _oracle_factor(ordered[0] + ordered[1], b, fisher_info_mu) * float(np.sum(1.0 / ordered[1:]))


def oracle_lower_bound_jensen(
    n: int, mk: float, b: float, d_low: float, fisher_info_mu: float = PL_FISHER_INFO
) -> float:
    """The relaxation `(n - 1)^2 / (m k)` of the oracle bound; `d_low` is `d_1 + d_2`."""
    if b == 0:
        return 0.0
    return _oracle_factor(d_low, b, fisher_info_mu) * (n - 1) ** 2 / mk


def cramer_rao_bound(spectrum: LaplacianSpectrum, k_max: int) -> float:
    """
    `(1 - H_kmax / k_max)^-1 * sum_{i >= 2} 1 / lambda_i`, infinite for a disconnected graph.
    """
    if spectrum.lambda2 <= connectivity_tolerance(spectrum):
        return math.inf
    return cr_limit_normalized(k_max) * float(np.sum(1.0 / spectrum.eigenvalues[1:]))


def cramer_rao_bound_jensen(n: int, mk: float, k_max: int) -> float:
    """
    The relaxation `(1 - H_kmax / k_max)^-1 (n - 1)^2 / (m k)` of the Cramer-Rao bound.

    It never exceeds `cramer_rao_bound` for a connected assignment of the same total size `m k`.
    """
    return cr_limit_normalized(k_max) * (n - 1) ** 2 / mk


def contention_probability_zero(k: int, ell: int) -> float:
    """
    Probability that two fixed items both still contend in round `ell` of a uniform ranking.
    """
    if not 1 <= ell <= k - 1:
        raise ValueError(f"round {ell} is outside [1, {k - 1}]")
    return (k - ell + 1) * (k - ell) / (k * (k - 1))


def _contention_coefficient(k: int) -> float:
    return math.fsum((k - ell) / (k * (k - 1) * (k - ell + 1)) for ell in range(1, k))


def fisher_information_zero(subsets: Sequence[Sequence[int]], n: int) -> NDArray[np.float64]:
    """
    Fisher information at `theta = 0` in closed form.

    Each subset `S` of size `k` contributes `c_k (k diag(1_S) - 1_S 1_S^T)`, with
    `c_k = sum_l (k - l) / (k (k - 1) (k - l + 1))`.
    """
    information = np.zeros((n, n))
    for subset in subsets:
        items = np.asarray(subset, dtype=np.int64)
        k = items.size
        if k < 2:
            continue
        coefficient = _contention_coefficient(k)
        information[np.ix_(items, items)] -= coefficient
        information[items, items] += coefficient * k
    return information


def _permutation_matrix(items: tuple[int, ...]) -> NDArray[np.int64]:
    return np.asarray(list(permutations(items)), dtype=np.int64)


def fisher_information(
    theta: PreferenceVector | ArrayLike, subsets: Sequence[Sequence[int]], n: int
) -> NDArray[np.float64]:
    """
    Exact Fisher information `-E[H(theta)]` by enumerating every ranking of every subset.

    Enumeration costs `k!` per distinct subset; `bound_report` switches to the Monte-Carlo
    estimate above `settings.exact_fisher_max_k`.
    """
    values = theta_values(theta)
    information = np.zeros((n, n))
    cache: dict[tuple[int, ...], NDArray[np.float64]] = {}
    for subset in subsets:
        key = tuple(sorted(int(item) for item in subset))
        if len(key) < 2:
            continue
        if key not in cache:
            orders = _permutation_matrix(key)
            probabilities = np.exp(ranking_log_probs(values, orders))
            cache[key] = -hessian(values, PackedRankings.from_matrix(n, orders, probabilities))
        information += cache[key]
    return information


def fisher_information_monte_carlo(
    theta: PreferenceVector | ArrayLike,
    subsets: Sequence[Sequence[int]],
    n: int,
    samples: int,
    rng: np.random.Generator,
) -> NDArray[np.float64]:
    """
    Monte-Carlo estimate of `-E[H(theta)]` from `samples` PL rankings of each subset.

    Rankings are drawn through exponential arrival times, all samples of a subset at once.
    """
    values = theta_values(theta)
    information = np.zeros((n, n))
    for subset in subsets:
        items = np.asarray(sorted(int(item) for item in subset), dtype=np.int64)
        if items.size < 2:
            continue
        arrivals = rng.exponential(size=(samples, items.size)) * np.exp(-values[items])
        orders = items[np.argsort(arrivals, axis=1, kind="stable")]
        weights = np.full(samples, 1.0 / samples)
        information -= hessian(values, PackedRankings.from_matrix(n, orders, weights))
    return information


def fisher_cramer_rao_bound(information: ArrayLike) -> float:
    """`sum_{i >= 2} 1 / lambda_i(I)`, infinite when `I` has a repeated zero eigenvalue."""
    eigenvalues = linalg.eigh(np.asarray(information, dtype=np.float64), eigvals_only=True)
    tol = settings.connectivity_rtol * max(1.0, float(eigenvalues[-1]))
    if eigenvalues.size < 2 or eigenvalues[1] <= tol:
        return math.inf
    return float(np.sum(1.0 / eigenvalues[1:]))


def _growth(b: float) -> float:
    return (1.0 + math.exp(2.0 * b)) ** 2


def thm3_upper_bound(
    lambda2: float,
    lambda_n: float,
    m: int,
    k: float,
    b: float,
    n: int,
    tol: float | None = None,
) -> float | None:
    """
    High-probability bound on `||theta_ML - theta*||` in terms of the spectral gap.

    `4 (1 + e^{2b})^2 sqrt(m log n) / lambda_2` when every ranking is a pair, otherwise
    `8 e^{4b} sqrt(2 m k log n) / (lambda_2 - 16 e^{2b} sqrt(lambda_n log n))`, which is
    undefined (`None`) when the denominator is not positive.
    """
    log_n = math.log(n)
    if k <= 2:
        tol = settings.connectivity_rtol if tol is None else tol
        if lambda2 <= tol:
            return math.inf
        return 4.0 * _growth(b) * math.sqrt(m * log_n) / lambda2

    denominator = lambda2 - 16.0 * math.exp(2.0 * b) * math.sqrt(lambda_n * log_n)
    if denominator <= 0:
        return None
    return 8.0 * math.exp(4.0 * b) * math.sqrt(2.0 * m * k * log_n) / denominator


def thm4_upper_bound(
    lambda2: float, m: int, k: float, b: float, n: int, tol: float | None = None
) -> float:
    """`2 (1 + e^{2b})^2 sqrt(m k log n) / lambda_2` for the full-breaking estimator."""
    tol = settings.connectivity_rtol if tol is None else tol
    if lambda2 <= tol:
        return math.inf
    return 2.0 * _growth(b) * math.sqrt(m * k * math.log(n)) / lambda2


def cor1_upper_bound(n: int, m: int, k: float, b: float) -> float:
    """
    Error bound of the ML estimator when the subsets are drawn uniformly at random.

    Args:
        n (int): Number of items.
        m (int): Number of rankings.
        k (float): Ranking size; pairs use the sharper `4 (1 + e^{2b})^2 sqrt(n^2 log n / m)`.
        b (float): Box bound of the parameter space.

    Returns:
        float: `32 e^{4b} sqrt(2 n^2 log n / (m k))` for `k > 2`.
    """
    log_n = math.log(n)
    if k <= 2:
        return 4.0 * _growth(b) * math.sqrt(n**2 * log_n / m)
    return 32.0 * math.exp(4.0 * b) * math.sqrt(2.0 * n**2 * log_n / (m * k))


def cor2_upper_bound(n: int, m: int, k: float, b: float) -> float:
    """`4 (1 + e^{2b})^2 sqrt(2 n^2 log n / (m k))` for the independent-breaking estimator."""
    return 4.0 * _growth(b) * math.sqrt(2.0 * n**2 * math.log(n) / (m * k))


def thm4_random_assignment_bound(n: int, m: int, k: float, b: float) -> float:
    """`4 (1 + e^{2b})^2 sqrt(n^2 log n / (m k))`, the full-breaking bound under random subsets."""
    return 4.0 * _growth(b) * math.sqrt(n**2 * math.log(n) / (m * k))


def bound_report(
    dataset: RankingDataset,
    b: float,
    theta: PreferenceVector | ArrayLike | None = None,
    rng: np.random.Generator | None = None,
) -> BoundReport:
    """
    Evaluate every bound for the assignment of `dataset`.

    Args:
        dataset (RankingDataset): Supplies the assignment; the ranking orders are not used.
        b (float): Box bound of the parameter space.
        theta (PreferenceVector | ArrayLike | None, optional): When given, the Cramer-Rao bound
            is also evaluated at `theta` from its Fisher information, exactly when the rankings
            are short enough to enumerate and by Monte-Carlo otherwise.
        rng (np.random.Generator | None, optional): Drives the Monte-Carlo estimate.

    Returns:
        BoundReport: The lower and upper bounds with a summary of their inputs.
    """
    graph = build_graph(dataset)
    spectrum = laplacian_spectrum(graph)
    degrees = np.sort(graph.degrees)
    n, m, k, k_max = dataset.n, dataset.m, dataset.k, dataset.k_max
    mk = float(dataset.total_size)

    report = {
        "oracle_lb": oracle_lower_bound(degrees, b),
        "oracle_lb_jensen": oracle_lower_bound_jensen(n, mk, b, float(degrees[0] + degrees[1])),
        "cramer_rao_lb": cramer_rao_bound(spectrum, k_max),
        "cramer_rao_lb_jensen": cramer_rao_bound_jensen(n, mk, k_max),
        "cr_limit_normalized": cr_limit_normalized(k_max),
        "thm3_ub": thm3_upper_bound(
            spectrum.lambda2, spectrum.lambda_n, m, k, b, n, tol=connectivity_tolerance(spectrum)
        ),
        "thm4_ub": thm4_upper_bound(
            spectrum.lambda2, m, k, b, n, tol=connectivity_tolerance(spectrum)
        ),
        "cor1_ub": cor1_upper_bound(n, m, k, b),
        "cor2_ub": cor2_upper_bound(n, m, k, b),
        "thm4_random_ub": thm4_random_assignment_bound(n, m, k, b),
    }

    if theta is not None:
        if k_max <= settings.exact_fisher_max_k:
            information = fisher_information(theta, dataset.subsets, n)
            report["fisher_method"] = "exact"
        else:
            rng = rng or np.random.default_rng(settings.seed)
            information = fisher_information_monte_carlo(
                theta, dataset.subsets, n, settings.fisher_samples, rng
            )
            report["fisher_method"] = "monte-carlo"
        report["cramer_rao_lb_at_theta"] = fisher_cramer_rao_bound(information)
        logger.info(f"Fisher information at theta computed by {report['fisher_method']}")

    return BoundReport(
        **report,
        inputs_summary=InputsSummary(
            n=n,
            m=m,
            k=k,
            k_max=k_max,
            b=b,
            lambda2=spectrum.lambda2,
            lambda_n=spectrum.lambda_n,
            degrees=[float(degree) for degree in degrees],
        ),
    )
