"""Differentially private release of fixed-length symbolic words.

The package privatizes words (sequences of symbols from a finite alphabet)
under word-level differential privacy with a bounded-Hamming-distance
adjacency relation.  Four samplers are provided: whole-word and per-symbol
mechanisms over a free alphabet, and feasibility-preserving variants for
words constrained by a Markov chain.  Supporting modules supply exact
ground-truth distributions, privacy verification, and accuracy analytics.
"""

from worddp.core import (
    Alphabet,
    MechanismConfig,
    Word,
    encode_word,
    hamming_distance,
    is_adjacent,
    make_rng,
    split_rngs,
)
from worddp.automaton import DistanceAutomaton
from worddp.mechanisms import (
    DistanceDistribution,
    OnlinePolicy,
    distance_distribution,
    online_policy,
    privatize_offline,
    privatize_online,
    privatize_online_step,
)
from worddp.markov import (
    DistanceCounts,
    InfeasibleWordError,
    MarkovChain,
    MarkovOnlinePolicy,
    ProductDistanceAutomaton,
    build_bigram,
    feasible_distance_counts,
    markov_online_policy,
    privatize_markov_offline,
    privatize_markov_online,
    privatize_markov_online_step,
    tokenize,
)

__all__ = [
    "Alphabet",
    "DistanceAutomaton",
    "DistanceCounts",
    "DistanceDistribution",
    "InfeasibleWordError",
    "MarkovChain",
    "MarkovOnlinePolicy",
    "MechanismConfig",
    "OnlinePolicy",
    "ProductDistanceAutomaton",
    "Word",
    "build_bigram",
    "distance_distribution",
    "encode_word",
    "feasible_distance_counts",
    "hamming_distance",
    "is_adjacent",
    "make_rng",
    "markov_online_policy",
    "online_policy",
    "privatize_markov_offline",
    "privatize_markov_online",
    "privatize_markov_online_step",
    "privatize_offline",
    "privatize_online",
    "privatize_online_step",
    "split_rngs",
    "tokenize",
]
