"""Render evaluation reports as a fixed-width table, CSV, plot series or JSON.

Table and CSV share one number formatter (two decimals, half-to-even on the
shortest decimal representation) so both carry identical values; JSON keeps
full precision and is what ``curvecast report`` re-renders.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from decimal import ROUND_HALF_EVEN, Decimal

from curvecast.errors import FormatError
from curvecast.harness import EvaluationReport, RunRow

FORMATS = ("table", "csv", "plot-series")
MISSING = "--"


def fmt_number(value: float | None, places: int = 2) -> str:
    if value is None:
        return MISSING
    quantum = Decimal(1).scaleb(-places)
    return str(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_EVEN))


def fmt_threshold(value: float) -> str:
    """Two decimals unless more are needed to show the value, up to six."""
    exact = Decimal(repr(float(value)))
    for places in range(2, 7):
        if exact == exact.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN):
            return fmt_number(value, places)
    return fmt_number(value, 6)


def fmt_position(value: int | None) -> str:
    return MISSING if value is None else str(int(value))


def _row_cells(row: RunRow, n_controls: int) -> list[str]:
    cells = [row.name, fmt_position(row.plevel_words), fmt_threshold(row.tau), fmt_position(row.clevel_words)]
    eac = row.eac if row.predicts else (None,) * n_controls
    ac = row.ac if row.ac else (None,) * n_controls
    for i in range(n_controls):
        mark = "*" if row.interpolated and row.interpolated[i] else ""
        cells.append(fmt_number(ac[i]) + mark)
        cells.append(fmt_number(eac[i]))
    cells += [fmt_number(row.mape), fmt_number(row.dmr), fmt_number(row.rr)]
    return cells


def _header(controls: tuple[int, ...]) -> list[str]:
    head = ["Run", "PLevel", "tau", "CLevel"]
    for c in controls:
        head += [f"Ac@{c}", f"EAc@{c}"]
    return head + ["MAPE", "DMR", "RR"]


def render_table(report: EvaluationReport) -> str:
    head = _header(report.controls)
    body = [_row_cells(r, len(report.controls)) for r in report.rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(head)]

    def line(cells: list[str]) -> str:
        first = cells[0].ljust(widths[0])
        rest = (c.rjust(w) for c, w in zip(cells[1:], widths[1:]))
        return "  ".join([first, *rest]).rstrip()

    out = [line(head), "  ".join("-" * w for w in widths)]
    out += [line(b) for b in body]
    notes = []
    if any(any(r.interpolated) for r in report.rows):
        notes.append("* Ac interpolated between neighbouring observations")
    if any(not r.predicts and r.error is None for r in report.rows):
        notes.append(f"{MISSING} no prediction level reached (no estimate, excluded from metrics)")
    if body:
        notes.append("DMR: percentage of the other predicting runs with RER = 100")
    for r in report.rows:
        if r.error:
            notes.append(f"{r.name}: {r.error}")
    if notes:
        out.append("")
        out += notes
    return "\n".join(out) + "\n"


def render_csv(report: EvaluationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([h.lower().replace("@", "_") for h in _header(report.controls)] + ["error"])
    for r in report.rows:
        cells = [c.rstrip("*") for c in _row_cells(r, len(report.controls))]
        writer.writerow(cells + [r.error or ""])
    return buf.getvalue()


def render_plot_series(report: EvaluationReport) -> str:
    """Long-format ``run,series,x_words,accuracy`` rows for external plotting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["run", "series", "x_words", "accuracy"])
    for r in report.rows:
        for x, v in zip(r.controls, r.ac):
            if v is not None:
                writer.writerow([r.name, "Ac", x, repr(float(v))])
        if r.predicts:
            for x, v in zip(r.controls, r.eac):
                writer.writerow([r.name, "EAc", x, repr(float(v))])
    return buf.getvalue()


def emit_report(report: EvaluationReport, format: str = "table") -> bytes:
    if format == "table":
        text = render_table(report)
    elif format == "csv":
        text = render_csv(report)
    elif format == "plot-series":
        text = render_plot_series(report)
    else:
        raise FormatError(f"unknown report format {format!r}; choose from {', '.join(FORMATS)}")
    return text.encode("utf-8")


def report_to_json(report: EvaluationReport) -> str:
    return json.dumps(asdict(report), indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> EvaluationReport:
    try:
        data = json.loads(text)
        rows = []
        for raw in data["rows"]:
            for key in ("controls", "ac", "eac", "interpolated", "predictor"):
                if raw.get(key) is not None:
                    raw[key] = tuple(raw[key])
            rows.append(RunRow(**raw))
        return EvaluationReport(controls=tuple(data["controls"]), rows=rows, rer=data.get("rer", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"not a curvecast report: {exc}") from exc
