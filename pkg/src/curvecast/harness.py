"""Evaluate a collection of runs along a common control sequence.

A run either comes from an observation stream (the full pipeline: fold
averaging, trace, levels, frozen predictor) or replays previously measured
Ac/EAc values. Runs that never reach a convergence level are still reported
with their observed accuracies, but take no part in any metric.
"""

from __future__ import annotations

import configparser
import csv
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from curvecast.corpus import Corpus, read_corpus, sentence_ceiling
from curvecast.errors import CurvecastError, DomainError, FormatError
from curvecast.fitter import DEFAULT_FIT, FitConfig
from curvecast.levels import DEFAULT_LEVELS, LevelConfig, Run, detect_levels
from curvecast.metrics import CurvePair, mape, rer, rr
from curvecast.observations import Observation, kfold_average, read_observations
from curvecast.trace import build_trace

log = logging.getLogger(__name__)

CONFIG_ENV = "CURVECAST_CONFIG"


@dataclass(frozen=True)
class RunSpec:
    """One learner in an experiment.

    Exactly one of ``observations`` and ``replay`` is set. Replay files carry
    ``x_words,ac,eac`` columns; the levels of a replayed run are given as word
    positions since there is no trace to detect them from.
    """

    name: str
    observations: Path | None = None
    replay: Path | None = None
    tau: float | None = None
    wlevel_words: int | None = None
    plevel_words: int | None = None
    clevel_words: int | None = None

    def __post_init__(self) -> None:
        if (self.observations is None) == (self.replay is None):
            raise DomainError(f"run {self.name!r} needs exactly one of 'observations' or 'replay'")


@dataclass(frozen=True)
class ExperimentConfig:
    kernel: int = 5_000
    step: int = 5_000
    fit: FitConfig = DEFAULT_FIT
    levels: LevelConfig = DEFAULT_LEVELS
    controls: tuple[int, int, int] = (300_000, 700_000, 100_000)
    folds: int | None = None
    corpus: Path | None = None
    runs: tuple[RunSpec, ...] = ()

    def __post_init__(self) -> None:
        lo, hi, step = self.controls
        if not (0 < lo <= hi and step > 0):
            raise DomainError(f"control levels must be lo:hi:step with 0 < lo <= hi, step > 0; got {self.controls}")
        if hi > self.levels.window[1]:
            raise DomainError("control levels must not pass the sampling window's upper bound")
        if self.folds is not None and self.folds < 1:
            raise DomainError("folds must be at least 1")
        names = [r.name for r in self.runs]
        if len(set(names)) != len(names):
            raise DomainError("run names must be unique")

    @property
    def nominal_controls(self) -> list[int]:
        lo, hi, step = self.controls
        return list(range(lo, hi + 1, step))


@dataclass
class RunRow:
    name: str
    tau: float
    controls: tuple[int, ...]
    ac: tuple[float | None, ...]
    eac: tuple[float | None, ...] | None = None
    interpolated: tuple[bool, ...] = ()
    wlevel_words: int | None = None
    plevel_words: int | None = None
    clevel_words: int | None = None
    predictor: tuple[float, float, float] | None = None
    mape: float | None = None
    dmr: float | None = None
    rr: float | None = None
    error: str | None = None

    @property
    def predicts(self) -> bool:
        return self.error is None and self.eac is not None and all(v is not None for v in self.eac)


@dataclass
class EvaluationReport:
    controls: tuple[int, ...]
    rows: list[RunRow] = field(default_factory=list)
    rer: dict[str, dict[str, float]] = field(default_factory=dict)

    def row(self, name: str) -> RunRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def resolve_controls(config: ExperimentConfig, corpus: Corpus | None) -> tuple[int, ...]:
    nominal = config.nominal_controls
    if corpus is None:
        return tuple(nominal)
    return tuple(sorted({sentence_ceiling(corpus, v) for v in nominal}))


def resolve_window(levels: LevelConfig, corpus: Corpus | None) -> LevelConfig:
    if corpus is None:
        return levels
    lo, hi = levels.window
    hi = min(hi, corpus.size)
    return replace(levels, window=(sentence_ceiling(corpus, lo), sentence_ceiling(corpus, hi)))


def actual_at(stream: Sequence[Observation], positions: Sequence[int]) -> tuple[list[float], list[bool]]:
    """Observed accuracy at each position, interpolating linearly when absent."""
    xs = np.array([o.x for o in stream], dtype=float)
    ys = np.array([o.accuracy for o in stream], dtype=float)
    exact = {o.x: o.accuracy for o in stream}
    values, flags = [], []
    for pos in positions:
        if pos in exact:
            values.append(exact[pos])
            flags.append(False)
        elif xs.size and xs[0] <= pos <= xs[-1]:
            values.append(float(np.interp(pos, xs, ys)))
            flags.append(True)
        else:
            raise DomainError(f"control level {pos} lies outside the observed range")
    return values, flags


def evaluate_stream(
    name: str,
    stream: Sequence[Observation],
    controls: Sequence[int],
    levels: LevelConfig,
    fit: FitConfig = DEFAULT_FIT,
) -> tuple[RunRow, Run]:
    """Run the full pipeline on one fold-averaged stream."""
    trace = build_trace(stream, fit)
    run = detect_levels(trace, levels)
    ac, flags = actual_at(stream, controls)
    row = RunRow(
        name=name,
        tau=levels.tau,
        controls=tuple(controls),
        ac=tuple(ac),
        interpolated=tuple(flags),
        wlevel_words=run.word_position(run.wlevel),
        plevel_words=run.word_position(run.plevel),
        clevel_words=run.word_position(run.clevel),
    )
    predictor = run.predictor
    if predictor is not None:
        row.eac = tuple(float(v) for v in predictor(np.asarray(controls, dtype=float)))
        row.predictor = predictor.params.as_tuple()
        row.rr = rr(trace.backbone[run.wlevel - trace.min_level : run.clevel - trace.min_level + 1])
    return row, run


def read_replay(path: str | Path) -> dict[int, tuple[float, float | None]]:
    """``x_words -> (ac, eac)``; a blank or ``--`` EAc means no estimate."""
    out: dict[int, tuple[float, float | None]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"x_words", "ac", "eac"} <= set(reader.fieldnames):
            raise FormatError(f"{path}:1: replay header must contain x_words,ac,eac")
        for lineno, rec in enumerate(reader, start=2):
            try:
                eac_cell = (rec["eac"] or "").strip()
                eac = None if eac_cell in ("", "--") else float(eac_cell)
                out[int(rec["x_words"])] = (float(rec["ac"]), eac)
            except (TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
    return out


def _replay_row(spec: RunSpec, controls: Sequence[int], tau: float) -> RunRow:
    table = read_replay(spec.replay)
    missing = [c for c in controls if c not in table]
    if missing:
        raise DomainError(f"replay lacks control level(s) {missing}")
    ac = tuple(table[c][0] for c in controls)
    eac_values = [table[c][1] for c in controls]
    if any(v is None for v in eac_values) or spec.clevel_words is None:
        eac = None
    else:
        eac = tuple(eac_values)
    return RunRow(
        name=spec.name,
        tau=tau,
        controls=tuple(controls),
        ac=ac,
        eac=eac,
        interpolated=(False,) * len(controls),
        wlevel_words=spec.wlevel_words,
        plevel_words=spec.plevel_words,
        clevel_words=spec.clevel_words if eac is not None else None,
    )


def _load_stream(spec: RunSpec, folds: int | None) -> list[Observation]:
    raw = read_observations(spec.observations)
    labelled = any(o.fold is not None for o in raw)
    return kfold_average(raw, folds if labelled else None)


def score_rows(rows: list[RunRow]) -> dict[str, dict[str, float]]:
    """Fill MAPE and DMR on every predicting row; return the RER matrix."""
    pool = [r for r in rows if r.predicts]
    pairs = {r.name: CurvePair.from_lists(r.controls, r.ac, r.eac) for r in pool}
    matrix: dict[str, dict[str, float]] = {r.name: {} for r in pool}
    for r in pool:
        r.mape = mape(pairs[r.name], r.controls)
        for other in pool:
            if other.name != r.name:
                matrix[r.name][other.name] = rer(pairs[r.name], pairs[other.name], r.controls)
    for r in pool:
        peers = matrix[r.name]
        r.dmr = 100.0 * sum(1 for v in peers.values() if v == 100.0) / len(peers) if peers else None
    return matrix


def evaluate_collection(config: ExperimentConfig) -> EvaluationReport:
    """Evaluate every run and assemble the report, rows ordered by name.

    A failing run yields a row carrying its error; the report is always built.
    """
    corpus = read_corpus(config.corpus) if config.corpus is not None else None
    controls = resolve_controls(config, corpus)
    levels = resolve_window(config.levels, corpus)
    rows: list[RunRow] = []
    for spec in sorted(config.runs, key=lambda s: (s.name.casefold(), s.name)):
        run_levels = levels if spec.tau is None else levels.with_tau(spec.tau)
        try:
            if spec.replay is not None:
                row = _replay_row(spec, controls, run_levels.tau)
            else:
                stream = _load_stream(spec, config.folds)
                row, _ = evaluate_stream(spec.name, stream, controls, run_levels, config.fit)
        except (CurvecastError, OSError) as exc:
            log.warning("run %s failed: %s", spec.name, exc)
            row = RunRow(name=spec.name, tau=run_levels.tau, controls=controls, ac=(None,) * len(controls), error=str(exc))
        rows.append(row)
    matrix = score_rows(rows)
    return EvaluationReport(controls=controls, rows=rows, rer=matrix)


def _parse_range(text: str, parts: int, key: str) -> tuple[int, ...]:
    pieces = text.split(":")
    if len(pieces) != parts:
        raise FormatError(f"{key} must have {parts} ':'-separated integers, got {text!r}")
    try:
        return tuple(int(float(p)) for p in pieces)
    except ValueError:
        raise FormatError(f"{key}: {text!r} is not a list of integers") from None


def _optional_int(text: str | None) -> int | None:
    if text is None or text.strip() in ("", "--"):
        return None
    return int(text)


_LEVEL_KEYS = {
    "nu": ("nu", float),
    "slowdown": ("sigma_slowdown", int),
    "sigma_slowdown": ("sigma_slowdown", int),
    "lookahead": ("lambda_lookahead", int),
    "lambda": ("lambda_lookahead", int),
    "tau": ("tau", float),
    "window_grid": ("window_grid", int),
    "layer_scale": ("layer_scale", float),
}
_FIT_KEYS = {
    "max_iterations": int,
    "residual_tolerance": float,
    "step_tolerance": float,
    "initial_trust_radius": float,
    "parameter_floor": float,
}


def build_config(values: dict[str, str], runs: Sequence[RunSpec] = (), base: Path | None = None) -> ExperimentConfig:
    """Experiment settings from flat string key/values (file keys or CLI flags)."""
    level_kw: dict = {}
    fit_kw: dict = {}
    kw: dict = {}
    for key, raw in values.items():
        key = key.strip().lower().replace("-", "_")
        try:
            if key in _LEVEL_KEYS:
                name, conv = _LEVEL_KEYS[key]
                level_kw[name] = conv(raw)
            elif key in _FIT_KEYS:
                fit_kw[key] = _FIT_KEYS[key](raw)
            elif key == "window":
                level_kw["window"] = _parse_range(raw, 2, key)
            elif key in ("controls", "control_levels"):
                kw["controls"] = _parse_range(raw, 3, key)
            elif key in ("kernel", "step"):
                kw[key] = int(raw)
            elif key == "folds":
                kw["folds"] = int(raw)
            elif key == "corpus":
                kw["corpus"] = _resolve(raw, base)
            else:
                raise FormatError(f"unknown experiment key {key!r}")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{key}: {exc}") from exc
    return ExperimentConfig(
        fit=FitConfig(**fit_kw), levels=LevelConfig(**level_kw), runs=tuple(runs), **kw
    )


def _resolve(path: str, base: Path | None) -> Path:
    p = Path(path).expanduser()
    return p if p.is_absolute() or base is None else base / p


def read_experiment_values(path: str | Path) -> tuple[dict[str, str], list[RunSpec]]:
    """Parse an experiment file into flat settings and run specs.

    The file has an ``[experiment]`` section of settings and one
    ``[run NAME]`` section per learner. Relative paths are taken from the
    file's directory.
    """
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise FormatError(f"{path}: {exc}") from exc
    base = path.parent
    values = dict(parser["experiment"]) if parser.has_section("experiment") else {}
    if "corpus" in values:
        values["corpus"] = str(_resolve(values["corpus"], base))
    runs = []
    for section in parser.sections():
        if section == "experiment":
            continue
        if not section.startswith("run "):
            raise FormatError(f"{path}: unknown section [{section}]")
        sec = parser[section]
        unknown = set(sec) - {"observations", "replay", "tau", "wlevel", "plevel", "clevel"}
        if unknown:
            raise FormatError(f"{path}: [{section}] has unknown key(s) {sorted(unknown)}")
        try:
            runs.append(
                RunSpec(
                    name=section[4:].strip(),
                    observations=_resolve(sec["observations"], base) if "observations" in sec else None,
                    replay=_resolve(sec["replay"], base) if "replay" in sec else None,
                    tau=float(sec["tau"]) if "tau" in sec else None,
                    wlevel_words=_optional_int(sec.get("wlevel")),
                    plevel_words=_optional_int(sec.get("plevel")),
                    clevel_words=_optional_int(sec.get("clevel")),
                )
            )
        except ValueError as exc:
            raise FormatError(f"{path}: [{section}]: {exc}") from exc
    return values, runs


def load_experiment(path: str | Path | None = None, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """Read an experiment file, falling back to ``$CURVECAST_CONFIG``; ``overrides``
    (for instance command-line flags) win over file values."""
    if path is None:
        path = os.environ.get(CONFIG_ENV)
    if path is None:
        raise FormatError(f"no experiment file given and {CONFIG_ENV} is unset")
    values, runs = read_experiment_values(path)
    values.update(overrides or {})
    return build_config(values, runs)
