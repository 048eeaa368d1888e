"""Command-line entry point: ``curvecast {fit,trace,levels,evaluate,simulate,report}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from curvecast.corpus import LearningScheme, build_individuals, read_corpus
from curvecast.errors import CurvecastError
from curvecast.fitter import FitConfig, fit_trend
from curvecast.harness import build_config, evaluate_collection, load_experiment, resolve_window
from curvecast.levels import detect_levels
from curvecast.model import PowerLawParams
from curvecast.observations import kfold_average, read_observations, write_observations
from curvecast.report import FORMATS, emit_report, report_from_json, report_to_json
from curvecast.simulator import SyntheticLearner, generate, synthetic_corpus
from curvecast.trace import build_trace

log = logging.getLogger("curvecast")

# flag dest -> experiment key
_LEVEL_FLAGS = {"nu": "nu", "slowdown": "slowdown", "lookahead": "lookahead", "tau": "tau", "window": "window"}
_EXPERIMENT_FLAGS = {**_LEVEL_FLAGS, "kernel": "kernel", "step": "step", "controls": "controls", "folds": "folds"}
_FIT_FLAGS = ("max_iterations", "residual_tolerance", "step_tolerance", "initial_trust_radius", "parameter_floor")


def _overrides(args: argparse.Namespace, keys: dict[str, str]) -> dict[str, str]:
    out = {}
    for dest, key in keys.items():
        value = getattr(args, dest, None)
        if value is not None:
            out[key] = str(value)
    for dest in _FIT_FLAGS:
        value = getattr(args, dest, None)
        if value is not None:
            out[dest] = str(value)
    return out


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("fitter")
    g.add_argument("--max-iterations", type=int)
    g.add_argument("--residual-tolerance", type=float)
    g.add_argument("--step-tolerance", type=float)
    g.add_argument("--initial-trust-radius", type=float)
    g.add_argument("--parameter-floor", type=float)


def _add_level_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("levels")
    g.add_argument("--nu", type=float, help="verticality threshold")
    g.add_argument("--slowdown", type=int, help="slowdown applied to nu")
    g.add_argument("--lookahead", type=int, help="levels the slope bound must keep holding")
    g.add_argument("--tau", type=float, help="convergence threshold")
    g.add_argument("--window", metavar="LO:HI", help="sampling window in words")


def _add_stream_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("observations", type=Path, help="observation CSV (level,x_words,accuracy[,fold])")
    p.add_argument("--folds", type=int, help="expected number of folds")
    _add_fit_flags(p)


def _stream(args: argparse.Namespace):
    raw = read_observations(args.observations)
    if any(o.fold is not None for o in raw):
        return kfold_average(raw, args.folds)
    return raw


def _fit_config(args: argparse.Namespace) -> FitConfig:
    return build_config(_overrides(args, {})).fit


def cmd_fit(args: argparse.Namespace) -> int:
    stream = _stream(args)
    level = args.level if args.level is not None else len(stream)
    trend = fit_trend(stream, level, _fit_config(args))
    a, b, c = trend.params.as_tuple()
    print(f"level     {trend.level}")
    print(f"a         {a:.6f}")
    print(f"b         {b:.6f}")
    print(f"c         {c:.6f}")
    print(f"rss       {trend.rss:.6f}")
    print(f"converged {str(trend.converged).lower()}")
    return 0


def cmd_trace(args: argparse.Namespace) -> int:
    trace = build_trace(_stream(args), _fit_config(args), args.max_level)
    print("level,x_words,a,b,c,rss,converged")
    for t in trace.trends:
        a, b, c = t.params.as_tuple()
        print(f"{t.level},{trace.x(t.level)},{a:.6f},{b:.6f},{c:.6f},{t.rss:.6f},{str(t.converged).lower()}")
    return 0


def cmd_levels(args: argparse.Namespace) -> int:
    config = build_config(_overrides(args, _LEVEL_FLAGS))
    corpus = read_corpus(args.corpus) if args.corpus else None
    levels = resolve_window(config.levels, corpus)
    trace = build_trace(_stream(args), config.fit)
    run = detect_levels(trace, levels)
    for label, level in (("wlevel", run.wlevel), ("plevel", run.plevel), ("clevel", run.clevel)):
        words = run.word_position(level)
        print(f"{label} {'--' if level is None else level} {'--' if words is None else words}")
    if run.predictor is not None:
        a, b, c = run.predictor.params.as_tuple()
        print(f"predictor a={a:.6f} b={b:.6f} c={c:.6f}")
    if args.layers:
        print("level,layer")
        for level, value in run.layers:
            print(f"{level},{value:.6f}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = load_experiment(args.config, _overrides(args, _EXPERIMENT_FLAGS))
    report = evaluate_collection(config)
    payload = emit_report(report, args.format)
    if args.output:
        Path(args.output).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    if args.json:
        Path(args.json).write_text(report_to_json(report), encoding="utf-8")
    summary = sys.stdout if args.output else sys.stderr
    failed = 0
    for row in report.rows:
        if row.error:
            failed += 1
            print(f"{row.name}: error: {row.error}", file=summary)
        elif row.predicts:
            print(
                f"{row.name}: clevel={row.clevel_words} mape={row.mape:.6f} "
                f"dmr={'--' if row.dmr is None else f'{row.dmr:.2f}'} rr={'--' if row.rr is None else f'{row.rr:.2f}'}",
                file=summary,
            )
        else:
            print(f"{row.name}: no prediction ({'no plevel' if row.plevel_words is None else 'no clevel'})", file=summary)
    return 1 if failed else 0


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.corpus:
        corpus = read_corpus(args.corpus)
    else:
        corpus = synthetic_corpus(args.corpus_size, args.sentence_length, args.corpus_seed)
    scheme = LearningScheme.constant(args.kernel, args.step, corpus.size)
    grid = tuple(build_individuals(corpus, scheme))
    learner = SyntheticLearner(PowerLawParams(args.a, args.b, args.c), grid, args.noise, args.seed)
    stream = generate(learner, args.folds)
    if args.output:
        write_observations(stream, args.output)
    else:
        write_observations(stream, sys.stdout)
    if args.corpus_out:
        _write_boundary_corpus(corpus.sentence_ends, args.corpus_out)
    return 0


def _write_boundary_corpus(ends: Sequence[int], path: str) -> None:
    """Placeholder tokens with the given sentence boundaries."""
    with open(path, "w", encoding="utf-8") as fh:
        start = 0
        for end in ends:
            fh.write("w\tX\n" * (end - start))
            fh.write("\n")
            start = end


def cmd_report(args: argparse.Namespace) -> int:
    report = report_from_json(Path(args.report).read_text(encoding="utf-8"))
    payload = emit_report(report, args.format)
    if args.output:
        Path(args.output).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvecast", description="Early learning-curve prediction and run evaluation.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one learning trend and print its parameters")
    _add_stream_args(p)
    p.add_argument("--level", type=int, help="number of leading observations to fit (default: all)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("trace", help="fit every level and print the learning trace as CSV")
    _add_stream_args(p)
    p.add_argument("--max-level", type=int)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("levels", help="detect working, prediction and convergence levels")
    _add_stream_args(p)
    _add_level_flags(p)
    p.add_argument("--corpus", type=Path, help="corpus used to align the sampling window")
    p.add_argument("--layers", action="store_true", help="also print the convergence layers")
    p.set_defaults(func=cmd_levels)

    p = sub.add_parser("evaluate", help="evaluate a collection of runs from an experiment file")
    p.add_argument("config", nargs="?", help="experiment file (default: $CURVECAST_CONFIG)")
    _add_level_flags(p)
    _add_fit_flags(p)
    p.add_argument("--kernel", type=int, help="kernel size in words")
    p.add_argument("--step", type=int, help="constant step in words")
    p.add_argument("--controls", metavar="LO:HI:STEP", help="nominal control levels")
    p.add_argument("--folds", type=int)
    p.add_argument("--format", choices=FORMATS, default="table")
    p.add_argument("-o", "--output", help="write the report here instead of stdout")
    p.add_argument("--json", help="also save the full-precision report as JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("simulate", help="write a synthetic learner's observation CSV")
    p.add_argument("--a", type=float, default=204.570017)
    p.add_argument("--b", type=float, default=0.307277)
    p.add_argument("--c", type=float, default=99.226727)
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma, accuracy points")
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.add_argument("--kernel", type=int, default=5_000)
    p.add_argument("--step", type=int, default=5_000)
    p.add_argument("--folds", type=int)
    p.add_argument("--corpus", type=Path, help="align positions to this corpus")
    p.add_argument("--corpus-size", type=int, default=750_000, help="size of the synthetic corpus")
    p.add_argument("--sentence-length", type=float, default=25.0, help="mean synthetic sentence length")
    p.add_argument("--corpus-seed", type=int, default=0, help="seed of the synthetic corpus, kept apart from --seed")
    p.add_argument("--corpus-out", help="also write the synthetic corpus")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="re-render a JSON report saved by 'evaluate --json'")
    p.add_argument("report")
    p.add_argument("--format", choices=FORMATS, default="table")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CurvecastError, OSError) as exc:
        print(f"curvecast {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
