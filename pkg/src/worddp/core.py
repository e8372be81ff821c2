"""Alphabets, fixed-length words, Hamming adjacency, and randomness plumbing.

Symbols are dense integer indices into an :class:`Alphabet`; a :class:`Word`
is an immutable tuple of such indices.  Two words of equal length are
*adjacent* at level ``k`` when their Hamming distance is at most ``k``.

Randomness convention: every sampling routine takes an explicit
``numpy.random.Generator``.  Reproducibility follows from the seed alone;
:func:`split_rngs` derives independent child streams for parallel work.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Alphabet",
    "Word",
    "MechanismConfig",
    "hamming_distance",
    "is_adjacent",
    "encode_word",
    "make_rng",
    "split_rngs",
]


@dataclass(frozen=True)
class Alphabet:
    """Ordered collection of distinct symbol tokens.

    Order is significant: it fixes the integer index of each token, the
    serialization layout, and the tie-breaking order used by samplers.
    """

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if len(self.tokens) == 0:
            raise ValueError("alphabet must contain at least one token")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("alphabet tokens must be distinct")

    @cached_property
    def _index(self) -> dict[str, int]:
        return {tok: i for i, tok in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    def __contains__(self, token: object) -> bool:
        return token in self._index

    def index(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise KeyError(f"token {token!r} is not in the alphabet") from None

    def token(self, index: int) -> str:
        return self.tokens[index]

    def to_json(self) -> str:
        return json.dumps(list(self.tokens))

    @classmethod
    def from_json(cls, text: str) -> "Alphabet":
        data = json.loads(text)
        if not isinstance(data, list) or not all(isinstance(t, str) for t in data):
            raise ValueError("alphabet JSON must be an array of token strings")
        return cls(tuple(data))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Alphabet":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class Word:
    """Fixed-length sequence of symbol indices over a concrete alphabet."""

    symbols: tuple[int, ...]
    alphabet: Alphabet

    def __post_init__(self) -> None:
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if len(self.symbols) == 0:
            raise ValueError("words must have length at least 1")
        m = len(self.alphabet)
        for pos, s in enumerate(self.symbols):
            if not 0 <= s < m:
                raise ValueError(
                    f"symbol index {s} at position {pos} is outside the alphabet "
                    f"(size {m})"
                )

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[int]:
        return iter(self.symbols)

    def tokens(self) -> tuple[str, ...]:
        return tuple(self.alphabet.token(s) for s in self.symbols)

    def text(self) -> str:
        return " ".join(self.tokens())


def encode_word(tokens: Sequence[str], alphabet: Alphabet) -> Word:
    """Map a token sequence to a :class:`Word`, validating every token."""
    if len(tokens) == 0:
        raise ValueError("cannot encode an empty token sequence")
    symbols = []
    for pos, tok in enumerate(tokens):
        if tok not in alphabet:
            raise ValueError(f"unknown token {tok!r} at position {pos}")
        symbols.append(alphabet.index(tok))
    return Word(tuple(symbols), alphabet)


def _check_comparable(a: Word, b: Word) -> None:
    if a.alphabet != b.alphabet:
        raise ValueError("words are over different alphabets")
    if len(a) != len(b):
        raise ValueError(f"words have different lengths ({len(a)} vs {len(b)})")


def hamming_distance(a: Word, b: Word) -> int:
    """Number of positions where the two words disagree."""
    _check_comparable(a, b)
    return sum(x != y for x, y in zip(a.symbols, b.symbols))


def is_adjacent(a: Word, b: Word, k: int) -> bool:
    """True when the words are within Hamming distance ``k`` of each other."""
    if k < 0:
        raise ValueError("adjacency level k must be nonnegative")
    return hamming_distance(a, b) <= k


_SEED_BOUND = 2**64


@dataclass(frozen=True)
class MechanismConfig:
    """Shared privatization parameters.

    ``epsilon`` is the privacy budget (0 gives maximal noise), ``k`` the
    adjacency level bounding the Hamming distance between neighboring
    inputs, and ``seed`` the root of the randomness stream.
    """

    epsilon: float
    k: int
    seed: int = 0

    def __post_init__(self) -> None:
        if not np.isfinite(self.epsilon) or self.epsilon < 0:
            raise ValueError("epsilon must be finite and nonnegative")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("adjacency level k must be an integer >= 1")
        object.__setattr__(self, "k", int(self.k))
        if not 0 <= self.seed < _SEED_BOUND:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    def rng(self) -> np.random.Generator:
        return make_rng(self.seed)

    def split(self, n: int) -> list[np.random.Generator]:
        return split_rngs(self.seed, n)


def make_rng(seed: int) -> np.random.Generator:
    """Fresh generator deterministically derived from ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed))


def split_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """``n`` independent child generators for deterministic parallel fan-out."""
    if n < 0:
        raise ValueError("cannot split into a negative number of streams")
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.default_rng(c) for c in children]
