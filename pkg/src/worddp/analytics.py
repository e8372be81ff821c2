"""Closed-form accuracy formulas, concentration bounds, and sample statistics.

Accuracy is measured as the Hamming distance between input and released
word.  For the free-alphabet mechanisms the distance is a binomial count
with closed-form mean and variance; for the chain-constrained whole-word
mechanism only bracketing bounds are available, derived from the smallest
and largest successor counts in the chain.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import exp, log, log1p
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp

from worddp.markov import DistanceCounts, MarkovChain

__all__ = [
    "Moments",
    "offline_moments",
    "online_moments",
    "MarkovOfflineBounds",
    "markov_offline_bounds",
    "offline_concentration_bound",
    "OnlineTailBounds",
    "online_concentration_bounds",
    "EmpiricalMoments",
    "empirical_moments",
    "CSV_COLUMNS",
    "write_accuracy_csv",
]


class Moments(NamedTuple):
    expectation: float
    variance: float


def _binomial_moments(n: int, weight: float) -> Moments:
    # distance is Binomial(n, weight / (1 + weight))
    p = weight / (1.0 + weight)
    return Moments(n * p, n * p * (1.0 - p))


def offline_moments(n: int, m: int, epsilon: float, k: int) -> Moments:
    """Mean and variance of the whole-word mechanism's output distance:
    ``E = n - n / ((m-1) exp(-eps/2k) + 1)`` and the matching binomial
    variance."""
    _check_params(n, m, epsilon, k)
    return _binomial_moments(n, (m - 1) * exp(-epsilon / (2.0 * k)))


def online_moments(n: int, m: int, epsilon: float, k: int) -> Moments:
    """Same shape as :func:`offline_moments` with the per-symbol budget
    ``epsilon/k`` in place of ``epsilon/2k``; the per-symbol mechanism pays
    twice the exponent for the same budget."""
    _check_params(n, m, epsilon, k)
    return _binomial_moments(n, (m - 1) * exp(-epsilon / k))


def _check_params(n: int, m: int, epsilon: float, k: int) -> None:
    if n < 1:
        raise ValueError("word length n must be at least 1")
    if m < 1:
        raise ValueError("alphabet size m must be at least 1")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if k < 1:
        raise ValueError("adjacency level k must be at least 1")


@dataclass(frozen=True)
class MarkovOfflineBounds:
    """Expectation bracket and variance cap for the chain-constrained
    whole-word mechanism."""

    lower: float
    upper: float
    variance_bound: float

    def __post_init__(self) -> None:
        if self.lower > self.upper + 1e-12:
            raise ValueError("lower bound exceeds upper bound")


def markov_offline_bounds(
    n: int,
    chain: MarkovChain,
    epsilon: float,
    k: int,
    counts: DistanceCounts,
) -> MarkovOfflineBounds:
    """Bracket the expected output distance using successor-count extremes.

    With ``B = exp(-eps/2k)`` and ``N`` ranging over per-state successor
    counts, the expectation lies between
    ``n (N_min - 1) B ((N_min - 1) B + 1)^{n-1} / Z`` and
    ``n N_max B (N_max B + 1)^{n-1} / Z`` where ``Z`` is the exact
    feasibility-weighted normalizer.  The variance of a distance supported
    on ``[0, n]`` can never exceed ``n^2 / 4``.
    """
    if counts.n != n:
        raise ValueError("distance counts do not match the word length")
    if epsilon < 0 or k < 1:
        raise ValueError("need epsilon >= 0 and k >= 1")
    succ = [chain.n_successors(s) for s in range(chain.n_states)]
    n_min, n_max = min(succ), max(succ)
    decay = -epsilon / (2.0 * k)
    log_z = logsumexp(
        [log(counts[l]) + decay * l for l in counts.support()]
    )
    lower_rate = n_min - 1
    if lower_rate == 0:
        lower = 0.0
    else:
        log_num = (
            log(n) + log(lower_rate) + decay
            + (n - 1) * log1p(lower_rate * exp(decay))
        )
        lower = exp(log_num - log_z)
    log_num = (
        log(n) + log(n_max) + decay + (n - 1) * log1p(n_max * exp(decay))
    )
    upper = exp(log_num - log_z)
    return MarkovOfflineBounds(
        lower=lower, upper=upper, variance_bound=n * n / 4.0
    )


def offline_concentration_bound(n: int, eta: float) -> float:
    """Two-sided tail bound ``2 exp(-2 eta^2 / n^2)`` for the whole-word
    mechanism's distance around its mean.

    Only ``eta`` in (0, 0.5) is accepted.  Because the exponent divides by
    ``n^2`` while the distance is integer valued, the bound is loose at
    word scale; it is clamped into [0, 1].
    """
    if not 0.0 < eta < 0.5:
        raise ValueError("eta must lie in the open interval (0, 0.5)")
    if n < 1:
        raise ValueError("word length n must be at least 1")
    return min(1.0, 2.0 * exp(-2.0 * eta * eta / (n * n)))


class OnlineTailBounds(NamedTuple):
    upper: float
    lower: float


def online_concentration_bounds(
    expectation: float, eta: float
) -> OnlineTailBounds:
    """Multiplicative Chernoff tails for the per-symbol mechanism's distance:
    ``P[d > (1+eta) E] <= exp(-eta^2 E / (2+eta))`` and
    ``P[d < (1-eta) E] <= exp(-eta^2 E / 2)`` for ``eta`` in (0, 1)."""
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in the open interval (0, 1)")
    if expectation < 0:
        raise ValueError("expectation must be nonnegative")
    upper = min(1.0, exp(-eta * eta * expectation / (2.0 + eta)))
    lower = min(1.0, exp(-eta * eta * expectation / 2.0))
    return OnlineTailBounds(upper=upper, lower=lower)


@dataclass(frozen=True)
class EmpiricalMoments:
    """Sample mean and unbiased variance with their standard errors."""

    mean: float
    variance: float
    se_mean: float
    se_variance: float
    count: int


def empirical_moments(samples: Sequence[float] | np.ndarray) -> EmpiricalMoments:
    """Summarize a sample; standard errors use moment (not normality)
    formulas, so constant samples report zero everywhere."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need a flat sample of at least two values")
    n = x.size
    mean = float(x.mean())
    centered = x - mean
    variance = float(centered @ centered / (n - 1))
    se_mean = float(np.sqrt(variance / n))
    m4 = float((centered**4).mean())
    var_of_var = (m4 - variance**2 * (n - 3) / (n - 1)) / n
    se_variance = float(np.sqrt(max(0.0, var_of_var)))
    return EmpiricalMoments(
        mean=mean,
        variance=variance,
        se_mean=se_mean,
        se_variance=se_variance,
        count=n,
    )


CSV_COLUMNS = (
    "mechanism",
    "initial_state",
    "epsilon",
    "k",
    "n",
    "m_or_S",
    "samples",
    "empirical_mean",
    "empirical_se",
    "expectation",
    "variance",
    "lower",
    "upper",
)


def write_accuracy_csv(path: str | Path, rows: Iterable[dict]) -> None:
    """Write experiment rows with the fixed column set.

    Every column is present in every row; cells without an applicable
    analytic value are left empty.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            unknown = set(row) - set(CSV_COLUMNS)
            if unknown:
                raise ValueError(f"unexpected CSV columns: {sorted(unknown)}")
            writer.writerow({col: row.get(col, "") for col in CSV_COLUMNS})
