"""Learning traces: one power-law trend per level over an observation stream."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from curvecast.errors import DomainError, InsufficientDataError
from curvecast.fitter import DEFAULT_FIT, MIN_LEVEL, FitConfig, PowerLawTrend, fit_trend
from curvecast.observations import Observation, check_stream, kfold_average


@dataclass(frozen=True)
class LearningTrace:
    """Trends for levels ``MIN_LEVEL .. max_level`` of one learner.

    ``xs[i]`` is the word position of the observation at level ``i + 1``, so
    the stream positions are available for every level including 1 and 2,
    which carry no trend.
    """

    trends: tuple[PowerLawTrend, ...]
    xs: tuple[int, ...]

    def __post_init__(self) -> None:
        for offset, trend in enumerate(self.trends):
            if trend.level != MIN_LEVEL + offset:
                raise DomainError("trends must be contiguous from level 3")
        if len(self.xs) < self.max_level:
            raise DomainError("trace needs a word position for every level")

    @property
    def min_level(self) -> int:
        return MIN_LEVEL

    @property
    def max_level(self) -> int:
        return MIN_LEVEL + len(self.trends) - 1

    @property
    def levels(self) -> range:
        return range(MIN_LEVEL, self.max_level + 1)

    def __len__(self) -> int:
        return len(self.trends)

    def trend(self, level: int) -> PowerLawTrend:
        if level not in self.levels:
            raise IndexError(f"no trend at level {level} (trace covers {MIN_LEVEL}..{self.max_level})")
        return self.trends[level - MIN_LEVEL]

    def x(self, level: int) -> int:
        return self.xs[level - 1]

    def asymptote(self, level: int) -> float:
        return self.trend(level).asymptote

    @property
    def backbone(self) -> np.ndarray:
        """Asymptotes aligned with ``levels``."""
        return np.array([t.asymptote for t in self.trends], dtype=float)


def build_trace(
    observations: Sequence[Observation],
    config: FitConfig = DEFAULT_FIT,
    max_level: int | None = None,
) -> LearningTrace:
    """Fit every level from 3 up to ``max_level`` (default: all observations).

    Each level is fitted from scratch, so a trend never depends on which
    other levels were computed. Fold-labelled observations are averaged first.
    """
    stream = list(observations)
    if any(o.fold is not None for o in stream):
        stream = kfold_average(stream)
    check_stream(stream)
    if len(stream) < MIN_LEVEL:
        raise InsufficientDataError(f"a trace needs at least {MIN_LEVEL} observations, got {len(stream)}")
    top = len(stream) if max_level is None else max_level
    if not MIN_LEVEL <= top <= len(stream):
        raise InsufficientDataError(f"max_level {top} outside {MIN_LEVEL}..{len(stream)}")
    trends = tuple(fit_trend(stream, level, config) for level in range(MIN_LEVEL, top + 1))
    return LearningTrace(trends=trends, xs=tuple(o.x for o in stream[:top]))
