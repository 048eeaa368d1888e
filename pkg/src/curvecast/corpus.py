"""Tagged corpora, sentence alignment, and learning schemes.

Training subsets never cut a sentence: every nominal size is rounded up to
the next sentence end, so word positions handed to the fitter are always
sentence boundaries.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from curvecast.errors import DomainError, FormatError, OutOfRangeError


@dataclass(frozen=True)
class Corpus:
    tokens: tuple[tuple[str, str], ...]
    sentence_ends: tuple[int, ...]

    def __post_init__(self) -> None:
        ends = self.sentence_ends
        if not ends:
            raise DomainError("corpus has no sentences")
        if any(b <= a for a, b in zip(ends, ends[1:])) or ends[0] < 1:
            raise DomainError("sentence ends must be strictly increasing positive positions")
        if self.tokens and ends[-1] != len(self.tokens):
            raise DomainError(
                f"last sentence ends at {ends[-1]} but corpus has {len(self.tokens)} tokens"
            )

    @classmethod
    def from_boundaries(cls, sentence_ends: list[int] | tuple[int, ...]) -> "Corpus":
        """Corpus known only by its sentence boundaries (no token text)."""
        return cls(tokens=(), sentence_ends=tuple(int(e) for e in sentence_ends))

    @classmethod
    def from_sentence_lengths(cls, lengths: list[int]) -> "Corpus":
        ends, total = [], 0
        for n in lengths:
            total += int(n)
            ends.append(total)
        return cls.from_boundaries(ends)

    @property
    def size(self) -> int:
        return self.sentence_ends[-1]


def read_corpus(path: str | Path) -> Corpus:
    """Read a token-per-line ``word<TAB>tag`` file; blank lines end sentences."""
    tokens: list[tuple[str, str]] = []
    ends: list[int] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                if tokens and (not ends or ends[-1] != len(tokens)):
                    ends.append(len(tokens))
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected 'word<TAB>tag'")
            tokens.append((parts[0], parts[1]))
    if tokens and (not ends or ends[-1] != len(tokens)):
        ends.append(len(tokens))
    if not tokens:
        raise FormatError(f"{path}: corpus is empty")
    return Corpus(tuple(tokens), tuple(ends))


def sentence_ceiling(corpus: Corpus, ell: int) -> int:
    """Position of the first sentence end at or beyond word ``ell``."""
    if ell < 1:
        raise DomainError(f"word position must be positive, got {ell}")
    if ell > corpus.size:
        raise OutOfRangeError(f"word {ell} lies beyond the corpus end ({corpus.size})")
    return corpus.sentence_ends[bisect.bisect_left(corpus.sentence_ends, ell)]


def constant_step(words: int) -> Callable[[int], int]:
    if words < 1:
        raise DomainError(f"step must be positive, got {words}")
    return lambda level: words


@dataclass(frozen=True)
class LearningScheme:
    """Kernel size plus a step schedule growing nested training subsets.

    ``step(i)`` gives the number of words added at level ``i >= 2``.
    """

    kernel_size: int
    step: Callable[[int], int] = field(compare=False)
    corpus_size: int

    def __post_init__(self) -> None:
        if self.kernel_size < 1:
            raise DomainError("kernel size must be positive")
        if self.kernel_size >= self.corpus_size:
            raise DomainError("kernel must be a proper subset of the corpus")

    @classmethod
    def constant(cls, kernel_size: int, step: int, corpus_size: int) -> "LearningScheme":
        return cls(kernel_size, constant_step(step), corpus_size)

    def raw_sizes(self) -> Iterator[int]:
        """Nominal cumulative sizes before sentence alignment."""
        size, level = self.kernel_size, 1
        while size <= self.corpus_size:
            yield size
            level += 1
            inc = self.step(level)
            if inc < 1:
                raise DomainError(f"step at level {level} must be positive, got {inc}")
            size += inc


def build_individuals(corpus: Corpus, scheme: LearningScheme) -> list[int]:
    """Sentence-aligned word positions of the nested training subsets.

    When a long sentence swallows several nominal sizes, the repeated
    position is kept once so positions strictly increase.
    """
    if scheme.corpus_size != corpus.size:
        raise DomainError(
            f"scheme is for a corpus of {scheme.corpus_size} words, corpus has {corpus.size}"
        )
    positions: list[int] = []
    for raw in scheme.raw_sizes():
        pos = sentence_ceiling(corpus, raw)
        if not positions or pos > positions[-1]:
            positions.append(pos)
    return positions
