"""Words constrained by a Markov chain, and mechanisms that respect it.

A :class:`MarkovChain` fixes which symbol may follow which; a word is
*feasible* when every consecutive pair (starting from the initial state) has
positive transition probability.  Only the support of the chain matters to
the mechanisms; the probability values are carried for estimation and
serialization.

The privatizers mirror the free-alphabet ones but never leave the feasible
set: the whole-word sampler weights each distance class by the number of
feasible words in it, and the per-symbol sampler redistributes mass over the
successors of the previously released state.
"""

from __future__ import annotations

import json
import logging
import string
from dataclasses import dataclass
from fractions import Fraction
from math import exp, log
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from scipy.special import logsumexp

from worddp.core import Alphabet, MechanismConfig, Word, encode_word
from worddp.mechanisms import DistanceDistribution

__all__ = [
    "InfeasibleWordError",
    "MarkovChain",
    "tokenize",
    "build_bigram",
    "DistanceCounts",
    "feasible_distance_counts",
    "ProductDistanceAutomaton",
    "privatize_markov_offline",
    "MarkovOnlinePolicy",
    "markov_online_policy",
    "privatize_markov_online_step",
    "privatize_markov_online",
]

logger = logging.getLogger(__name__)

_ENUMERATION_LIMIT = 10**6
_ROW_SUM_TOL = 1e-9


class InfeasibleWordError(ValueError):
    """A word uses a transition the chain assigns zero probability."""

    def __init__(self, position: int, from_token: str, to_token: str):
        self.position = position
        self.from_token = from_token
        self.to_token = to_token
        super().__init__(
            f"infeasible transition at position {position}: "
            f"{from_token!r} -> {to_token!r} has zero probability"
        )


class MarkovChain:
    """Finite-state chain over named states with a designated initial state.

    The transition matrix is row-stochastic, which guarantees every state
    has at least one successor.
    """

    def __init__(
        self,
        states: Alphabet | Sequence[str],
        matrix: np.ndarray,
        initial: int | str = 0,
    ):
        if not isinstance(states, Alphabet):
            states = Alphabet(tuple(states))
        mat = np.array(matrix, dtype=float)
        m = len(states)
        if mat.shape != (m, m):
            raise ValueError(
                f"transition matrix shape {mat.shape} does not match "
                f"{m} states"
            )
        if np.any(mat < 0) or np.any(mat > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        bad = np.flatnonzero(np.abs(mat.sum(axis=1) - 1.0) > _ROW_SUM_TOL)
        if bad.size:
            raise ValueError(
                f"row for state {states.token(int(bad[0]))!r} sums to "
                f"{mat[bad[0]].sum():.12f}, not 1"
            )
        mat.setflags(write=False)
        self.states = states
        self.matrix = mat
        self.initial = states.index(initial) if isinstance(initial, str) else int(initial)
        if not 0 <= self.initial < m:
            raise ValueError(f"initial state index {self.initial} out of range")
        self._successors: list[tuple[int, ...]] = [
            tuple(int(j) for j in np.flatnonzero(mat[i] > 0)) for i in range(m)
        ]
        self._successor_sets = [frozenset(s) for s in self._successors]
        self._suffix_cache: dict[tuple[int, ...], list[list[list[int]]]] = {}
        self._offline_cache: dict = {}

    # -- basic structure ----------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def initial_token(self) -> str:
        return self.states.token(self.initial)

    def successors(self, state: int) -> tuple[int, ...]:
        """Indices with positive transition probability, ascending."""
        return self._successors[state]

    def n_successors(self, state: int) -> int:
        return len(self._successors[state])

    def can_follow(self, state: int, previous: int) -> bool:
        return state in self._successor_sets[previous]

    def with_initial(self, initial: int | str) -> "MarkovChain":
        return MarkovChain(self.states, self.matrix, initial)

    def word(self, tokens: Sequence[str]) -> Word:
        return encode_word(tokens, self.states)

    # -- feasibility ---------------------------------------------------------

    def first_infeasible_step(
        self, word: Word
    ) -> tuple[int, str, str] | None:
        """First zero-probability transition in ``word``, if any.

        Position 0 refers to the step from the initial state to the first
        symbol.
        """
        if word.alphabet != self.states:
            raise ValueError("word is not over this chain's state set")
        prev = self.initial
        for pos, sym in enumerate(word.symbols):
            if not self.can_follow(sym, prev):
                return (pos, self.states.token(prev), self.states.token(sym))
            prev = sym
        return None

    def is_feasible(self, word: Word) -> bool:
        return self.first_infeasible_step(word) is None

    def require_feasible(self, word: Word) -> None:
        bad = self.first_infeasible_step(word)
        if bad is not None:
            raise InfeasibleWordError(*bad)

    def count_feasible_words(self, n: int) -> int:
        """Exact number of feasible words of length ``n``."""
        if n < 1:
            raise ValueError("word length must be at least 1")
        counts = [0] * self.n_states
        for s in self.successors(self.initial):
            counts[s] += 1
        for _ in range(n - 1):
            nxt = [0] * self.n_states
            for s, c in enumerate(counts):
                if c:
                    for t in self.successors(s):
                        nxt[t] += c
            counts = nxt
        return sum(counts)

    def feasible_words(self, n: int) -> Iterator[Word]:
        """Enumerate feasible words of length ``n`` in successor order."""
        if self.count_feasible_words(n) > _ENUMERATION_LIMIT:
            raise ValueError(
                f"more than {_ENUMERATION_LIMIT} feasible words; refusing "
                "to enumerate"
            )
        def rec(prev: int, prefix: list[int]) -> Iterator[Word]:
            if len(prefix) == n:
                yield Word(tuple(prefix), self.states)
                return
            for s in self.successors(prev):
                yield from rec(s, prefix + [s])
        yield from rec(self.initial, [])

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        transitions = []
        for i in range(self.n_states):
            for j in self.successors(i):
                transitions.append(
                    {
                        "from": self.states.token(i),
                        "to": self.states.token(j),
                        "p": float(self.matrix[i, j]),
                    }
                )
        return {
            "states": list(self.states.tokens),
            "initial": self.initial_token,
            "transitions": transitions,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2) + "\n", encoding="utf-8"
        )

    @classmethod
    def from_json_dict(cls, data: dict) -> "MarkovChain":
        for key in ("states", "initial", "transitions"):
            if key not in data:
                raise ValueError(f"chain JSON is missing the {key!r} field")
        states = Alphabet(tuple(data["states"]))
        matrix = np.zeros((len(states), len(states)))
        seen = set()
        for entry in data["transitions"]:
            src, dst, p = entry["from"], entry["to"], float(entry["p"])
            if src not in states or dst not in states:
                raise ValueError(
                    f"transition references unknown state: {src!r} -> {dst!r}"
                )
            pair = (states.index(src), states.index(dst))
            if pair in seen:
                raise ValueError(f"duplicate transition {src!r} -> {dst!r}")
            seen.add(pair)
            if not 0.0 <= p <= 1.0:
                raise ValueError(
                    f"transition {src!r} -> {dst!r} has probability {p} "
                    "outside [0, 1]"
                )
            matrix[pair] = p
        if data["initial"] not in states:
            raise ValueError(f"initial state {data['initial']!r} is unknown")
        return cls(states, matrix, data["initial"])

    @classmethod
    def load(cls, path: str | Path) -> "MarkovChain":
        return cls.from_json_dict(
            json.loads(Path(path).read_text(encoding="utf-8"))
        )


def tokenize(text: str, lowercase: bool = False) -> list[str]:
    """Whitespace tokenizer that strips surrounding punctuation."""
    tokens = []
    for raw in text.split():
        tok = raw.strip(string.punctuation)
        if not tok:
            continue
        tokens.append(tok.lower() if lowercase else tok)
    return tokens


def build_bigram(
    text: str,
    *,
    lowercase: bool = False,
    sink: str = "self-loop",
    initial: str | None = None,
) -> MarkovChain:
    """Estimate a bigram chain from running text.

    Transition probabilities are adjacent-pair counts normalized per
    predecessor.  A token that never has a successor (only possible for the
    final token of the text) is closed off according to ``sink``: a
    ``"self-loop"`` keeps it absorbing, ``"wrap"`` sends it to the first
    token.  The initial state defaults to the first token.
    """
    if sink not in ("self-loop", "wrap"):
        raise ValueError("sink policy must be 'self-loop' or 'wrap'")
    tokens = tokenize(text, lowercase=lowercase)
    if not tokens:
        raise ValueError("corpus contains no tokens")
    order: dict[str, int] = {}
    for tok in tokens:
        order.setdefault(tok, len(order))
    states = Alphabet(tuple(order))
    m = len(states)
    counts = np.zeros((m, m))
    for a, b in zip(tokens, tokens[1:]):
        counts[order[a], order[b]] += 1
    for i in range(m):
        if counts[i].sum() == 0:
            j = i if sink == "self-loop" else order[tokens[0]]
            counts[i, j] = 1
    matrix = counts / counts.sum(axis=1, keepdims=True)
    start = initial if initial is not None else tokens[0]
    if start not in states:
        raise ValueError(f"initial token {start!r} does not occur in the corpus")
    return MarkovChain(states, matrix, start)


# -- feasible distance classes -------------------------------------------------


@dataclass(frozen=True)
class DistanceCounts:
    """Number of feasible words at each Hamming distance from a reference."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if len(self.counts) == 0 or any(c < 0 for c in self.counts):
            raise ValueError("counts must be a nonempty nonnegative vector")

    @property
    def n(self) -> int:
        return len(self.counts) - 1

    def __getitem__(self, distance: int) -> int:
        return self.counts[distance]

    def total(self) -> int:
        return sum(self.counts)

    def support(self) -> tuple[int, ...]:
        return tuple(l for l, c in enumerate(self.counts) if c > 0)


def _suffix_counts(
    chain: MarkovChain, word: Word
) -> list[list[list[int]]]:
    """Suffix table ``W[i][s][r]``: feasible completions from position ``i``
    in state ``s`` that mismatch the reference suffix in exactly ``r``
    places.  Computed once per (chain, word) and cached on the chain."""
    key = word.symbols
    cached = chain._suffix_cache.get(key)
    if cached is not None:
        return cached
    if word.alphabet != chain.states:
        raise ValueError("word is not over this chain's state set")
    n = len(word)
    m = chain.n_states
    table: list[list[list[int]]] = [
        [[0] * (n - i + 1) for _ in range(m)] for i in range(n + 1)
    ]
    for s in range(m):
        table[n][s][0] = 1
    for i in range(n - 1, -1, -1):
        target = word.symbols[i]
        for s in range(m):
            row = table[i][s]
            for succ in chain.successors(s):
                nxt = table[i + 1][succ]
                if succ == target:
                    for r in range(n - i):
                        row[r] += nxt[r]
                else:
                    for r in range(1, n - i + 1):
                        row[r] += nxt[r - 1]
    chain._suffix_cache[key] = table
    return table


def feasible_distance_counts(chain: MarkovChain, word: Word) -> DistanceCounts:
    """Count feasible words at every exact distance from ``word``.

    One dynamic program over (position, state) pairs yields the whole
    distance profile; counts are exact integers.
    """
    table = _suffix_counts(chain, word)
    return DistanceCounts(tuple(table[0][chain.initial]))


class ProductDistanceAutomaton:
    """Distance automaton intersected with the chain's transition support.

    States are ``(i, e, s)``: position, mismatches so far, and the chain
    state just emitted.  Accepting runs are the feasible words at Hamming
    distance exactly ``j`` from the reference; successor-proportional
    sampling makes every such word equally likely.
    """

    def __init__(self, chain: MarkovChain, word: Word, distance: int):
        n = len(word)
        if not 0 <= distance <= n:
            raise ValueError(
                f"target distance {distance} must lie in [0, {n}]"
            )
        self.chain = chain
        self.word = word
        self.distance = distance
        self._n = n
        self._table = _suffix_counts(chain, word)
        if self.language_size == 0:
            raise ValueError(
                f"no feasible word lies at distance exactly {distance} "
                "from the reference"
            )
        self._step_cache: dict[
            tuple[int, int, int], tuple[tuple[int, ...], np.ndarray]
        ] = {}

    def path_count(self, i: int, e: int, state: int) -> int:
        """Accepting paths below product state ``(i, e, state)``."""
        r = self.distance - e
        if not 0 <= r <= self._n - i:
            return 0
        return self._table[i][state][r]

    @property
    def language_size(self) -> int:
        return self.path_count(0, 0, self.chain.initial)

    def transition_probability(
        self, i: int, e: int, state: int, successor: int
    ) -> float:
        here = self.path_count(i, e, state)
        if here == 0 or not self.chain.can_follow(successor, state):
            return 0.0
        e_next = e if successor == self.word.symbols[i] else e + 1
        return self.path_count(i + 1, e_next, successor) / here

    def _step(
        self, i: int, e: int, state: int
    ) -> tuple[tuple[int, ...], np.ndarray]:
        key = (i, e, state)
        hit = self._step_cache.get(key)
        if hit is not None:
            return hit
        here = self.path_count(i, e, state)
        succs = []
        weights = []
        target = self.word.symbols[i]
        for s in self.chain.successors(state):
            w = self.path_count(i + 1, e if s == target else e + 1, s)
            if w > 0:
                succs.append(s)
                weights.append(w / here)
        entry = (tuple(succs), np.cumsum(weights))
        self._step_cache[key] = entry
        return entry

    def sample(self, rng: np.random.Generator) -> Word:
        """Uniform draw from the accepted language; one uniform per step."""
        state = self.chain.initial
        e = 0
        symbols = []
        for i in range(self._n):
            succs, cdf = self._step(i, e, state)
            choice = int(np.searchsorted(cdf, rng.random(), side="right"))
            choice = min(choice, len(succs) - 1)
            nxt = succs[choice]
            if nxt != self.word.symbols[i]:
                e += 1
            symbols.append(nxt)
            state = nxt
        return Word(tuple(symbols), self.chain.states)

    def accepts(self, candidate: Word) -> bool:
        if candidate.alphabet != self.chain.states or len(candidate) != self._n:
            return False
        if not self.chain.is_feasible(candidate):
            return False
        mism = sum(
            a != b for a, b in zip(candidate.symbols, self.word.symbols)
        )
        return mism == self.distance

    def run_fraction(self, candidate: Word) -> Fraction:
        if not self.accepts(candidate):
            return Fraction(0)
        prob = Fraction(1)
        state = self.chain.initial
        e = 0
        for i, sym in enumerate(candidate.symbols):
            here = self.path_count(i, e, state)
            if sym != self.word.symbols[i]:
                e += 1
            prob *= Fraction(self.path_count(i + 1, e, sym), here)
            state = sym
        return prob

    def run_probability(self, candidate: Word) -> float:
        return float(self.run_fraction(candidate))

    def iter_language(self) -> Iterator[Word]:
        if self.language_size > _ENUMERATION_LIMIT:
            raise ValueError(
                f"language has {self.language_size} words; refusing to "
                f"enumerate more than {_ENUMERATION_LIMIT}"
            )
        def rec(i: int, e: int, state: int, prefix: list[int]) -> Iterator[Word]:
            if i == self._n:
                yield Word(tuple(prefix), self.chain.states)
                return
            target = self.word.symbols[i]
            for s in self.chain.successors(state):
                e_next = e if s == target else e + 1
                if self.path_count(i + 1, e_next, s) > 0:
                    yield from rec(i + 1, e_next, s, prefix + [s])
        yield from rec(0, 0, self.chain.initial, [])


def _offline_plan(
    chain: MarkovChain, word: Word, epsilon: float, k: int
) -> DistanceDistribution:
    key = ("distance-law", word.symbols, epsilon, k)
    hit = chain._offline_cache.get(key)
    if hit is not None:
        return hit
    counts = feasible_distance_counts(chain, word)
    support = counts.support()
    if support == (0,):
        logger.warning(
            "chain admits no feasible word other than the input; the "
            "whole-word mechanism degenerates to the identity and provides "
            "no privacy"
        )
    log_weights = np.full(counts.n + 1, -np.inf)
    for l in support:
        # log of an exact integer count; safe for counts beyond float range
        log_weights[l] = log(counts[l]) - epsilon * l / (2.0 * k)
    probs = np.exp(log_weights - logsumexp(log_weights))
    dist = DistanceDistribution(probs / probs.sum())
    chain._offline_cache[key] = dist
    return dist


def _product_automaton(
    chain: MarkovChain, word: Word, distance: int
) -> ProductDistanceAutomaton:
    key = ("automaton", word.symbols, distance)
    hit = chain._offline_cache.get(key)
    if hit is None:
        hit = ProductDistanceAutomaton(chain, word, distance)
        chain._offline_cache[key] = hit
    return hit


def privatize_markov_offline(
    chain: MarkovChain,
    word: Word,
    config: MechanismConfig,
    rng: np.random.Generator | None = None,
) -> Word:
    """Release a feasible privatized word for a feasible input.

    Draws the output distance from the feasibility-weighted law (one
    uniform), then walks the product automaton for that distance.  Raises
    :class:`InfeasibleWordError` for inputs the chain cannot generate.
    """
    chain.require_feasible(word)
    if rng is None:
        rng = config.rng()
    dist = _offline_plan(chain, word, config.epsilon, config.k)
    target = dist.sample(rng)
    return _product_automaton(chain, word, target).sample(rng)


# -- per-symbol mechanism ------------------------------------------------------


class MarkovOnlinePolicy:
    """Per-step release rule conditioned on the previously released state.

    From previous output ``s_prev`` with ``N`` successors, the true next
    state is kept with probability ``tau = 1/((N-1)*exp(-epsilon/k) + 1)``
    when it is reachable; otherwise the ``N`` successors share the mass
    uniformly.  Every output continues a feasible path.
    """

    def __init__(self, chain: MarkovChain, epsilon: float, k: int):
        if epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if k < 1:
            raise ValueError("adjacency level k must be at least 1")
        self.chain = chain
        self.epsilon = epsilon
        self.k = k
        self._decay = exp(-epsilon / k)
        self._sample_cache: dict[
            tuple[int, int], tuple[tuple[int, ...], np.ndarray]
        ] = {}

    def tau(self, previous_output: int) -> float:
        """Retention probability of a reachable true state."""
        n_succ = self.chain.n_successors(previous_output)
        return 1.0 / ((n_succ - 1) * self._decay + 1.0)

    def probability(
        self, output: int, true_state: int, previous_output: int
    ) -> float:
        """Conditional probability of releasing ``output``."""
        chain = self.chain
        if not chain.can_follow(output, previous_output):
            return 0.0
        n_succ = chain.n_successors(previous_output)
        if chain.can_follow(true_state, previous_output):
            tau = self.tau(previous_output)
            if output == true_state:
                return tau
            return (1.0 - tau) / (n_succ - 1)
        return 1.0 / n_succ

    def probabilities(self, true_state: int, previous_output: int) -> np.ndarray:
        """Full conditional row over the state set."""
        row = np.zeros(self.chain.n_states)
        for s in self.chain.successors(previous_output):
            row[s] = self.probability(s, true_state, previous_output)
        return row

    def _step(
        self, true_state: int, previous_output: int
    ) -> tuple[tuple[int, ...], np.ndarray]:
        key = (true_state, previous_output)
        hit = self._sample_cache.get(key)
        if hit is not None:
            return hit
        succs = self.chain.successors(previous_output)
        probs = [self.probability(s, true_state, previous_output) for s in succs]
        entry = (succs, np.cumsum(probs))
        self._sample_cache[key] = entry
        return entry

    def sample(
        self, true_state: int, previous_output: int, rng: np.random.Generator
    ) -> int:
        """Draw the released state; consumes exactly one uniform."""
        succs, cdf = self._step(true_state, previous_output)
        choice = int(np.searchsorted(cdf, rng.random(), side="right"))
        return succs[min(choice, len(succs) - 1)]


def markov_online_policy(
    chain: MarkovChain, epsilon: float, k: int
) -> MarkovOnlinePolicy:
    return MarkovOnlinePolicy(chain, epsilon, k)


def privatize_markov_online_step(
    state: int,
    previous_output: int,
    policy: MarkovOnlinePolicy,
    rng: np.random.Generator,
) -> int:
    """Release one state given the previously released one."""
    m = policy.chain.n_states
    if not 0 <= state < m:
        raise ValueError(f"state index {state} out of range")
    if not 0 <= previous_output < m:
        raise ValueError(f"previous output index {previous_output} out of range")
    return policy.sample(state, previous_output, rng)


def privatize_markov_online(
    chain: MarkovChain,
    word: Word,
    config: MechanismConfig,
    *,
    initial_output: int | str | None = None,
    rng: np.random.Generator | None = None,
) -> Word:
    """Privatize a word state by state along the chain.

    The starting point of the released path, ``initial_output``, is public;
    it defaults to the chain's initial state.  The input word itself need
    not be feasible: unreachable true states simply get no retention bonus.
    Output equals stepping manually with the same generator.
    """
    if word.alphabet != chain.states:
        raise ValueError("word is not over this chain's state set")
    if rng is None:
        rng = config.rng()
    policy = markov_online_policy(chain, config.epsilon, config.k)
    if initial_output is None:
        prev = chain.initial
    elif isinstance(initial_output, str):
        prev = chain.states.index(initial_output)
    else:
        prev = int(initial_output)
    symbols = []
    for s in word.symbols:
        prev = privatize_markov_online_step(s, prev, policy, rng)
        symbols.append(prev)
    return Word(tuple(symbols), chain.states)
