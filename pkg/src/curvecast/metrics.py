"""Reliability and robustness metrics for collections of runs.

All accuracies are percentages. ``CurvePair`` couples a run's observed
accuracies (Ac) with the estimates of its frozen trend (EAc) on the control
levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from curvecast.errors import DomainError


@dataclass(frozen=True)
class ControlSequence:
    levels: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.levels:
            raise DomainError("control sequence is empty")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise DomainError("control levels must strictly increase")

    def __iter__(self):
        return iter(self.levels)

    def __len__(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class CurvePair:
    actual: Mapping[int, float]
    estimated: Mapping[int, float]

    @classmethod
    def from_lists(cls, levels: Sequence[int], actual: Sequence[float], estimated: Sequence[float]) -> "CurvePair":
        if not len(levels) == len(actual) == len(estimated):
            raise DomainError("levels, actual and estimated must have equal length")
        return cls(dict(zip(levels, map(float, actual))), dict(zip(levels, map(float, estimated))))

    def at(self, i: int) -> tuple[float, float]:
        try:
            return self.actual[i], self.estimated[i]
        except KeyError:
            raise DomainError(f"curve pair is not defined at word position {i}") from None


def _levels(s: ControlSequence | Iterable[int]) -> tuple[int, ...]:
    levels = tuple(s.levels if isinstance(s, ControlSequence) else s)
    if not levels:
        raise DomainError("control sequence is empty")
    return levels


def pe(pair: CurvePair, i: int) -> float:
    """Signed percentage error of the estimate at ``i``; positive on overshoot."""
    actual, estimated = pair.at(i)
    if actual == 0:
        raise ZeroDivisionError(f"actual accuracy is zero at word position {i}")
    return 100.0 * (estimated - actual) / actual


def mape(pair: CurvePair, s: ControlSequence | Iterable[int]) -> float:
    """Mean of ``|pe|`` over the control levels.

    ``pe`` is already a percentage, so no further factor of 100 is applied.
    """
    levels = _levels(s)
    return float(np.mean([abs(pe(pair, i)) for i in levels]))


def re(e: CurvePair, f: CurvePair, i: int) -> int:
    """1 when the estimates keep the observed order of the two runs at ``i``.

    A tie on either side counts as agreement.
    """
    ae, ee = e.at(i)
    af, ef = f.at(i)
    return 1 if (ae - af) * (ee - ef) >= 0 else 0


def rer(e: CurvePair, f: CurvePair, s: ControlSequence | Iterable[int]) -> float:
    levels = _levels(s)
    return 100.0 * sum(re(e, f, i) for i in levels) / len(levels)


def dmr(
    e: str,
    h: Iterable[str],
    s: ControlSequence | Iterable[int],
    pairs: Mapping[str, CurvePair],
) -> float:
    """Share of peers ``h`` against which run ``e`` has a perfect RER.

    The denominator is the number of peers.
    """
    peers = list(h)
    if not peers:
        raise DomainError("decision-making reliability needs at least one peer run")
    if e in peers:
        raise DomainError(f"run {e!r} cannot be its own peer")
    levels = _levels(s)
    perfect = sum(1 for k in peers if rer(pairs[e], pairs[k], levels) == 100.0)
    return 100.0 * perfect / len(peers)


def dmr_from_rer(rer_row: Mapping[str, float]) -> float:
    """DMR given the RER of one run against each of its peers."""
    if not rer_row:
        raise DomainError("decision-making reliability needs at least one peer run")
    return 100.0 * sum(1 for v in rer_row.values() if v == 100.0) / len(rer_row)


def longest_monotone_run(values: Sequence[float]) -> int:
    """Length of the longest contiguous non-increasing or non-decreasing stretch.

    Equal neighbours extend both kinds of stretch.
    """
    n = len(values)
    if n == 0:
        return 0
    best = up = down = 1
    for prev, cur in zip(values, values[1:]):
        up = up + 1 if cur >= prev else 1
        down = down + 1 if cur <= prev else 1
        best = max(best, up, down)
    return best


def rr(backbone: Sequence[float]) -> float:
    """Robustness rate of the backbone restricted to [wlevel, clevel]."""
    values = list(backbone)
    if not values:
        raise DomainError("robustness rate needs a non-empty backbone interval")
    return 100.0 * longest_monotone_run(values) / len(values)
