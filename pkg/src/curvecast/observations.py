"""Observation streams and their CSV representation.

An observation file is a CSV with header ``level,x_words,accuracy,fold``;
the ``fold`` column is optional and may be left blank.
"""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from curvecast.errors import AlignmentError, DomainError, FormatError

CSV_FIELDS = ("level", "x_words", "accuracy", "fold")


@dataclass(frozen=True)
class Observation:
    """Accuracy measured after training on the first ``x`` words."""

    level: int
    x: int
    accuracy: float
    fold: int | None = None

    def __post_init__(self) -> None:
        if self.level < 1:
            raise DomainError(f"level must be positive, got {self.level}")
        if self.x < 1:
            raise DomainError(f"word position must be positive, got {self.x}")
        if not 0.0 <= self.accuracy <= 100.0:
            raise DomainError(f"accuracy must lie in [0, 100], got {self.accuracy}")
        if self.fold is not None and self.fold < 1:
            raise DomainError(f"fold must be positive, got {self.fold}")


def as_arrays(observations: Sequence[Observation]) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(x, accuracy)`` as float arrays."""
    x = np.array([o.x for o in observations], dtype=float)
    y = np.array([o.accuracy for o in observations], dtype=float)
    return x, y


def check_stream(observations: Sequence[Observation]) -> None:
    """Raise unless word positions strictly increase along the stream."""
    for prev, cur in zip(observations, observations[1:]):
        if cur.x <= prev.x:
            raise DomainError(
                f"word positions must strictly increase: level {cur.level} has x={cur.x} "
                f"after x={prev.x}"
            )


def split_folds(observations: Iterable[Observation]) -> dict[int | None, list[Observation]]:
    folds: dict[int | None, list[Observation]] = defaultdict(list)
    for obs in observations:
        folds[obs.fold].append(obs)
    return dict(folds)


def kfold_average(observations: Iterable[Observation], k: int | None = None) -> list[Observation]:
    """Collapse per-fold streams into one stream of per-position mean accuracies.

    Unlabelled observations are treated as a single fold. When ``k`` is given
    the number of distinct folds must equal it. Every fold must cover exactly
    the same word positions.
    """
    folds = split_folds(observations)
    if not folds:
        return []
    if None in folds and len(folds) > 1:
        raise AlignmentError("stream mixes fold-labelled and unlabelled observations")
    if k is not None and None not in folds and len(folds) != k:
        raise AlignmentError(f"expected {k} folds, found {len(folds)}")

    grids = {fold: [o.x for o in stream] for fold, stream in folds.items()}
    reference_fold, reference = next(iter(grids.items()))
    for fold, grid in grids.items():
        if grid != reference:
            raise AlignmentError(
                f"fold {fold} does not share the word-position grid of fold {reference_fold}"
            )
        if len(set(grid)) != len(grid):
            raise AlignmentError(f"fold {fold} repeats a word position")

    by_x = [{o.x: o.accuracy for o in stream} for stream in folds.values()]
    averaged = []
    for idx, x in enumerate(sorted(reference)):
        mean = float(np.mean([fold[x] for fold in by_x]))
        averaged.append(Observation(level=idx + 1, x=x, accuracy=mean))
    return averaged


def read_observations(source: str | Path | TextIO) -> list[Observation]:
    """Parse an observation CSV. Errors name the offending line."""
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return _parse(fh, str(source))
    return _parse(source, getattr(source, "name", "<stream>"))


def _parse(fh: TextIO, name: str) -> list[Observation]:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError(f"{name}: empty observation file") from None
    header = [h.strip() for h in header]
    missing = [f for f in CSV_FIELDS[:3] if f not in header]
    if missing:
        raise FormatError(f"{name}:1: header lacks column(s) {', '.join(missing)}")
    col = {f: header.index(f) for f in CSV_FIELDS if f in header}

    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            fold_cell = row[col["fold"]].strip() if "fold" in col and col["fold"] < len(row) else ""
            out.append(
                Observation(
                    level=int(row[col["level"]]),
                    x=int(row[col["x_words"]]),
                    accuracy=float(row[col["accuracy"]]),
                    fold=int(fold_cell) if fold_cell else None,
                )
            )
        except (ValueError, IndexError) as exc:
            raise FormatError(f"{name}:{lineno}: {exc}") from exc
    return out


def write_observations(observations: Iterable[Observation], dest: str | Path | TextIO) -> None:
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            write_observations(observations, fh)
        return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for o in observations:
        writer.writerow([o.level, o.x, repr(float(o.accuracy)), "" if o.fold is None else o.fold])


def observations_to_csv(observations: Iterable[Observation]) -> str:
    buf = io.StringIO()
    write_observations(observations, buf)
    return buf.getvalue()
