"""Synthetic learners with known power-law learning curves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import brentq

from curvecast.corpus import Corpus
from curvecast.errors import AlignmentError, DomainError
from curvecast.model import PowerLawParams
from curvecast.observations import Observation


@dataclass(frozen=True)
class SyntheticLearner:
    truth: PowerLawParams
    x_grid: tuple[int, ...]
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.noise_sigma < 0:
            raise DomainError("noise_sigma must be non-negative")
        if not self.x_grid:
            raise DomainError("x_grid is empty")
        if any(b <= a for a, b in zip(self.x_grid, self.x_grid[1:])) or self.x_grid[0] < 1:
            raise DomainError("x_grid must be strictly increasing positive word positions")


def generate(learner: SyntheticLearner, folds: int | None = None) -> list[Observation]:
    """Noisy samples of the true curve, clipped to [0, 100].

    With ``folds`` set, each fold receives independent noise and carries its
    fold label; the stream is ordered fold by fold.
    """
    rng = np.random.default_rng(learner.seed)
    x = np.asarray(learner.x_grid, dtype=float)
    clean = np.asarray(learner.truth.evaluate(x), dtype=float)

    def draw() -> np.ndarray:
        noise = rng.normal(0.0, learner.noise_sigma, x.size) if learner.noise_sigma > 0 else 0.0
        return np.clip(clean + noise, 0.0, 100.0)

    if folds is None:
        return [
            Observation(level=i + 1, x=int(xi), accuracy=float(yi))
            for i, (xi, yi) in enumerate(zip(learner.x_grid, draw()))
        ]
    if folds < 1:
        raise DomainError("folds must be positive")
    out = []
    for fold in range(1, folds + 1):
        out.extend(
            Observation(level=i + 1, x=int(xi), accuracy=float(yi), fold=fold)
            for i, (xi, yi) in enumerate(zip(learner.x_grid, draw()))
        )
    return out


def make_fleet(specs: Mapping[str, SyntheticLearner]) -> dict[str, list[Observation]]:
    """Generate every learner; all must share one word-position grid."""
    grids = {learner.x_grid for learner in specs.values()}
    if len(grids) > 1:
        raise AlignmentError("fleet learners must share the same x_grid")
    return {name: generate(learner) for name, learner in specs.items()}


def synthetic_corpus(n_words: int, mean_sentence: float = 25.0, seed: int = 0) -> Corpus:
    """Corpus boundaries with geometric sentence lengths (mean ``mean_sentence``)."""
    if n_words < 1:
        raise DomainError("corpus needs at least one word")
    rng = np.random.default_rng(seed)
    lengths: list[int] = []
    total = 0
    while total < n_words:
        n = int(min(rng.geometric(1.0 / mean_sentence), n_words - total))
        lengths.append(n)
        total += n
    return Corpus.from_sentence_lengths(lengths)


def crossing_point(first: PowerLawParams, second: PowerLawParams, lo: float, hi: float) -> float:
    """Word position in ``[lo, hi]`` where two curves intersect.

    Curves sharing ``a`` but not ``b`` meet either never or twice on x > 1,
    so the bracket must isolate one crossing; raises when the curves keep
    their order across it.
    """
    if not 0 < lo < hi:
        raise DomainError("bracket must satisfy 0 < lo < hi")

    def gap(logx: float) -> float:
        x = np.exp(logx)
        return float(first.evaluate(x) - second.evaluate(x))

    a, b = np.log(lo), np.log(hi)
    if gap(a) * gap(b) > 0:
        raise DomainError(f"curves do not change order on [{lo}, {hi}]")
    return float(np.exp(brentq(gap, a, b, xtol=1e-14, rtol=1e-15)))
