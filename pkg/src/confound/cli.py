"""Command-line surface: CSV ingestion, analysis reports, SVG plotting.

Subcommands: ``analyze``, ``scan``, ``standardize``, ``decompose``,
``generate``, ``plot``. Reports go to stdout as text (default) or as JSON
conforming to ``report.schema.json``; diagnostics and errors go to stderr,
errors as one-line ``error:<code>: message``. Exit codes: 0 success,
2 malformed input, 3 analysis precondition failure.

Table CSVs use the fixed header ``stratum,group,total,positive`` (comma
separated, double-quote escaping, no comment lines) so golden files are
bit-exact. Record CSVs have a free-form header; schema flags decide which
columns are numeric and which hold a boolean outcome.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

from .detector import (
    Column,
    Finding,
    RecordTable,
    ScanConfig,
    detect_reversal,
    scan,
)
from .ecological import decompose, sign_divergence_report
from .errors import (
    BadCount,
    BadHeader,
    BadOutcomeValue,
    ConfoundError,
    DuplicateCell,
    EmptyData,
    InputError,
    MissingCell,
    MissingColumn,
    NonNumeric,
    NotTwoGroups,
    RaggedRow,
    ValidationError,
)
from .geometry import RenderOptions, render_svg, to_vectors
from .standardize import reference_weights, standardized_comparison
from .synth import generate_reversal
from .tables import Counts, StratifiedComparison, Stratum, aggregate, rate

TABLE_HEADER = ("stratum", "group", "total", "positive")
FORMAT_VERSION = "1"
DEFAULT_TRUE_VALUES = ("1", "true", "yes")
DEFAULT_FALSE_VALUES = ("0", "false", "no")


# ---------------------------------------------------------------------------
# CSV ingestion


def _parse_count(field: str, name: str, line: int) -> int:
    try:
        value = int(field)
    except ValueError:
        raise BadCount(f"{name} {field!r} is not an integer", line) from None
    if value < 0:
        raise BadCount(f"{name} must be >= 0, got {value}", line)
    return value


def parse_table_csv(text: str) -> StratifiedComparison:
    """Parse an aggregated table CSV into a StratifiedComparison.

    Strata and groups keep their order of first appearance. Every
    (stratum, group) pair must appear exactly once and there must be
    exactly two group values.
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise EmptyData("file is empty")
    if tuple(header) != TABLE_HEADER:
        raise BadHeader(
            f"expected header {','.join(TABLE_HEADER)!r}, got {','.join(header)!r}",
            line=1,
        )

    cells: dict[tuple[str, str], Counts] = {}
    strata_order: list[str] = []
    groups_order: list[str] = []
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) != 4:
            raise RaggedRow(f"expected 4 fields, got {len(row)}", line)
        stratum, group, total_s, positive_s = row
        total = _parse_count(total_s, "total", line)
        positive = _parse_count(positive_s, "positive", line)
        if positive > total:
            raise BadCount(f"positive {positive} exceeds total {total}", line)
        key = (stratum, group)
        if key in cells:
            raise DuplicateCell(
                f"duplicate cell for stratum {stratum!r}, group {group!r}", line
            )
        cells[key] = Counts(total, positive)
        if stratum not in strata_order:
            strata_order.append(stratum)
        if group not in groups_order:
            groups_order.append(group)

    if not cells:
        raise EmptyData("no data rows after the header")
    if len(groups_order) != 2:
        raise NotTwoGroups(
            f"expected exactly two group values, found {len(groups_order)}: "
            f"{groups_order}"
        )
    first, second = groups_order
    for stratum in strata_order:
        for group in (first, second):
            if (stratum, group) not in cells:
                raise MissingCell(
                    f"stratum {stratum!r} has no row for group {group!r}"
                )
    return StratifiedComparison(
        first,
        second,
        tuple(
            Stratum(lbl, cells[(lbl, first)], cells[(lbl, second)])
            for lbl in strata_order
        ),
    )


def serialize_table_csv(sc: StratifiedComparison) -> str:
    """Inverse of :func:`parse_table_csv` (parse -> serialize -> parse is id)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_HEADER)
    for s in sc.strata:
        writer.writerow([s.label, sc.group_first_label, s.first.total, s.first.positive])
        writer.writerow(
            [s.label, sc.group_second_label, s.second.total, s.second.positive]
        )
    return buf.getvalue()


def parse_records_csv(
    text: str,
    *,
    numeric_columns: Sequence[str] = (),
    boolean_columns: Sequence[str] = (),
    true_values: Sequence[str] = DEFAULT_TRUE_VALUES,
    false_values: Sequence[str] = DEFAULT_FALSE_VALUES,
) -> RecordTable:
    """Parse row-level records; undeclared columns are categorical text.

    Boolean cells are matched case-insensitively against the true/false
    lexicons (default 1/0, true/false, yes/no).
    """
    truthy = {v.lower() for v in true_values}
    falsy = {v.lower() for v in false_values}
    if truthy & falsy:
        raise ValidationError(
            f"true/false lexicons overlap: {sorted(truthy & falsy)}"
        )

    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise EmptyData("file is empty")
    if len(set(header)) != len(header) or any(not h for h in header):
        raise BadHeader(f"column names must be unique and non-empty: {header}", line=1)
    for name in (*numeric_columns, *boolean_columns):
        if name not in header:
            raise MissingColumn(f"declared column {name!r} is not in the header")
    if set(numeric_columns) & set(boolean_columns):
        raise ValidationError(
            f"columns declared both numeric and boolean: "
            f"{sorted(set(numeric_columns) & set(boolean_columns))}"
        )

    columns = tuple(
        Column(
            name,
            "numeric"
            if name in numeric_columns
            else "boolean"
            if name in boolean_columns
            else "categorical",
        )
        for name in header
    )

    rows = []
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) != len(header):
            raise RaggedRow(
                f"expected {len(header)} fields, got {len(row)}", line
            )
        values: list[object] = []
        for col, cell in zip(columns, row):
            if col.kind == "numeric":
                try:
                    v = float(cell)
                except ValueError:
                    raise NonNumeric(
                        f"column {col.name!r}: {cell!r} is not a number", line
                    ) from None
                if not math.isfinite(v):
                    raise NonNumeric(
                        f"column {col.name!r}: {cell!r} is not finite", line
                    )
                values.append(v)
            elif col.kind == "boolean":
                low = cell.lower()
                if low in truthy:
                    values.append(True)
                elif low in falsy:
                    values.append(False)
                else:
                    raise BadOutcomeValue(
                        f"column {col.name!r}: {cell!r} is not in the "
                        f"true/false lexicon", line
                    )
            else:
                values.append(cell)
        rows.append(tuple(values))
    if not rows:
        raise EmptyData("no data rows after the header")
    return RecordTable(columns, tuple(rows))


# ---------------------------------------------------------------------------
# Report documents (shared by the text and JSON emitters, so both always
# carry the same classification)


def _cell_json(c: Counts) -> dict:
    return {
        "total": c.total,
        "positive": c.positive,
        "percent": rate(c).percent() if c.total > 0 else None,
    }


def _reversal_json(report) -> dict:
    return {
        "classification": report.classification.value,
        "aggregate_direction": report.aggregate_direction.value,
        "majority_direction": report.majority_direction.value,
        "stratum_directions": [
            [label, d.value] for label, d in report.stratum_directions
        ],
    }


def _standardized_json(sc: StratifiedComparison, reference: str) -> dict:
    weights = reference_weights(sc, reference)
    comp = standardized_comparison(sc, reference)
    return {
        "reference": reference,
        "weights": [[label, w] for label, w in weights.weights],
        "rate_first": comp.rate_first,
        "rate_second": comp.rate_second,
        "direction": comp.direction.value,
    }


def build_analyze_report(
    sc: StratifiedComparison,
    *,
    standardize_ref: str | None = None,
    allow_tied_strata: bool = False,
) -> dict:
    report = detect_reversal(sc, allow_tied_strata=allow_tied_strata)
    agg_first = aggregate(sc.counts("first"))
    agg_second = aggregate(sc.counts("second"))
    doc = {
        "format_version": FORMAT_VERSION,
        "command": "analyze",
        "input": {
            "strata": len(sc.strata),
            "cells": 2 * len(sc.strata),
            "subjects": agg_first.total + agg_second.total,
        },
        "groups": {
            "first": sc.group_first_label,
            "second": sc.group_second_label,
        },
        "rates": {
            "strata": [
                {
                    "stratum": s.label,
                    "first": _cell_json(s.first),
                    "second": _cell_json(s.second),
                    "direction": d.value,
                }
                for s, (_, d) in zip(sc.strata, report.stratum_directions)
            ],
            "aggregate": {
                "first": _cell_json(agg_first),
                "second": _cell_json(agg_second),
                "direction": report.aggregate_direction.value,
            },
        },
        "reversal": _reversal_json(report),
        "standardized": (
            _standardized_json(sc, standardize_ref) if standardize_ref else None
        ),
    }
    return doc


def build_standardize_report(sc: StratifiedComparison, reference: str) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "command": "standardize",
        "groups": {
            "first": sc.group_first_label,
            "second": sc.group_second_label,
        },
        "pooled": {
            "first": _cell_json(aggregate(sc.counts("first"))),
            "second": _cell_json(aggregate(sc.counts("second"))),
        },
        "standardized": _standardized_json(sc, reference),
    }


def build_scan_report(records: RecordTable, candidates: Sequence[str], results) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "command": "scan",
        "input": {"rows": records.n_rows, "candidates": list(candidates)},
        "findings": [
            {
                "covariate": r.covariate,
                "binning": r.binning,
                "stratum_sizes": list(r.stratum_sizes),
                "report": _reversal_json(r.report),
            }
            for r in results
            if isinstance(r, Finding)
        ],
        "skipped": [
            {"covariate": r.covariate, "reason": r.reason, "detail": r.detail}
            for r in results
            if not isinstance(r, Finding)
        ],
    }


def build_decompose_report(records: RecordTable, group_col, x_col, y_col) -> dict:
    d = decompose(records, group_col, x_col, y_col)
    divergence = None
    if d.between_corr is not None and d.within_corr is not None:
        rep = sign_divergence_report(d)
        divergence = {
            "verdict": rep.verdict,
            "between_corr": rep.between_corr,
            "within_corr": rep.within_corr,
        }
    return {
        "format_version": FORMAT_VERSION,
        "command": "decompose",
        "convention": "population",
        "input": {"rows": records.n_rows, "groups": len(d.group_summaries)},
        "covariance": {
            "total": d.total_cov,
            "between": d.between_cov,
            "within": d.within_cov,
        },
        "correlation": {
            "total": d.total_corr,
            "between": d.between_corr,
            "within": d.within_corr,
        },
        "groups": [
            {"label": g.label, "n": g.n, "mean_x": g.mean_x, "mean_y": g.mean_y}
            for g in d.group_summaries
        ],
        "divergence": divergence,
    }


def build_generate_report(sc: StratifiedComparison, k: int, scale: int, seed: int) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "command": "generate",
        "seed": seed,
        "strata": k,
        "scale": scale,
        "table": {
            "group_first": sc.group_first_label,
            "group_second": sc.group_second_label,
            "strata": [
                {
                    "label": s.label,
                    "first": {"total": s.first.total, "positive": s.first.positive},
                    "second": {"total": s.second.total, "positive": s.second.positive},
                }
                for s in sc.strata
            ],
        },
        "table_csv": serialize_table_csv(sc),
    }


# ---------------------------------------------------------------------------
# Text rendering


def _color_enabled() -> bool:
    return sys.stdout.isatty() and not os.environ.get("NO_COLOR")


def _bold(s: str, color: bool) -> str:
    return f"\033[1m{s}\033[0m" if color else s


def _dir_text(direction: str, first: str, second: str) -> str:
    if direction == "TIE":
        return "tie"
    return f"{first} higher" if direction == "FIRST_HIGHER" else f"{second} higher"


def _cell_text(cell: dict) -> str:
    if cell["percent"] is None:
        return f"{cell['positive']}/{cell['total']} (-)"
    return f"{cell['positive']}/{cell['total']} ({cell['percent']})"


def _columns(rows: list[tuple[str, ...]]) -> list[str]:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return [
        "  ".join(field.ljust(w) for field, w in zip(row, widths)).rstrip()
        for row in rows
    ]


def _pct(v: float) -> str:
    return f"{100.0 * v:.3f}%"


def render_analyze_text(doc: dict, color: bool = False) -> str:
    g1 = doc["groups"]["first"]
    g2 = doc["groups"]["second"]
    lines = [
        f"table: {doc['input']['strata']} strata x 2 groups, "
        f"{doc['input']['subjects']} subjects",
        f"groups: first={g1}  second={g2}",
        "",
    ]
    rows = [("stratum", g1, g2, "direction")]
    for r in doc["rates"]["strata"]:
        rows.append(
            (
                r["stratum"],
                _cell_text(r["first"]),
                _cell_text(r["second"]),
                _dir_text(r["direction"], g1, g2),
            )
        )
    agg = doc["rates"]["aggregate"]
    rows.append(
        (
            "aggregate",
            _cell_text(agg["first"]),
            _cell_text(agg["second"]),
            _dir_text(agg["direction"], g1, g2),
        )
    )
    lines.extend(_columns(rows))
    lines.append("")
    lines.append(
        f"classification: {_bold(doc['reversal']['classification'], color)}"
    )
    lines.append(
        "majority stratum direction: "
        f"{_dir_text(doc['reversal']['majority_direction'], g1, g2)}"
    )
    if doc.get("standardized"):
        lines.append("")
        lines.append(_standardized_text(doc["standardized"], g1, g2))
    return "\n".join(lines) + "\n"


def _standardized_text(s: dict, g1: str, g2: str) -> str:
    return (
        f"standardized (reference={s['reference']}): "
        f"{g1} {_pct(s['rate_first'])}  {g2} {_pct(s['rate_second'])}  "
        f"-> {_dir_text(s['direction'], g1, g2)}"
    )


def render_standardize_text(doc: dict, color: bool = False) -> str:
    g1 = doc["groups"]["first"]
    g2 = doc["groups"]["second"]
    pooled = doc["pooled"]
    s = doc["standardized"]
    lines = [
        f"groups: first={g1}  second={g2}",
        f"pooled: {g1} {_cell_text(pooled['first'])}  "
        f"{g2} {_cell_text(pooled['second'])}",
        _standardized_text(s, g1, g2),
        "weights: " + "  ".join(f"{label}={w:.6f}" for label, w in s["weights"]),
    ]
    return "\n".join(lines) + "\n"


def render_scan_text(doc: dict, color: bool = False) -> str:
    lines = [
        f"scanned {len(doc['input']['candidates'])} candidates over "
        f"{doc['input']['rows']} rows"
    ]
    if doc["findings"]:
        rows = [("covariate", "classification", "strata", "sizes", "binning")]
        for f in doc["findings"]:
            rows.append(
                (
                    f["covariate"],
                    f["report"]["classification"],
                    str(len(f["stratum_sizes"])),
                    ",".join(str(n) for n in f["stratum_sizes"]),
                    f["binning"],
                )
            )
        lines.append("")
        lines.extend(_columns(rows))
    for s in doc["skipped"]:
        lines.append(f"skipped: {s['covariate']} ({s['reason']}): {s['detail']}")
    return "\n".join(lines) + "\n"


def render_decompose_text(doc: dict, color: bool = False) -> str:
    def corr(v):
        return "undefined" if v is None else f"{v:+.4f}"

    cov = doc["covariance"]
    cor = doc["correlation"]
    lines = [
        f"ecological decomposition ({doc['convention']} convention), "
        f"{doc['input']['rows']} rows in {doc['input']['groups']} groups",
        "",
    ]
    rows = [("group", "n", "mean_x", "mean_y")]
    for g in doc["groups"]:
        rows.append((g["label"], str(g["n"]), f"{g['mean_x']:.6f}", f"{g['mean_y']:.6f}"))
    lines.extend(_columns(rows))
    lines.append("")
    lines.append(
        f"covariance: total {cov['total']:+.6f} = "
        f"between {cov['between']:+.6f} + within {cov['within']:+.6f}"
    )
    lines.append(
        f"correlation: total {corr(cor['total'])}  between {corr(cor['between'])}  "
        f"within {corr(cor['within'])}"
    )
    if doc["divergence"] is None:
        lines.append("divergence: undefined (a correlation has zero variance)")
    else:
        lines.append(f"divergence: {_bold(doc['divergence']['verdict'], color)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Subcommands


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8-sig")


def _emit(ns: argparse.Namespace, doc: dict, text_renderer) -> int:
    if ns.format == "json":
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        sys.stdout.write(text_renderer(doc, color=_color_enabled()))
    return 0


def _split_list(raw: str | None) -> list[str]:
    if not raw:
        return []
    return [part.strip() for part in raw.split(",") if part.strip()]


def _cmd_analyze(ns: argparse.Namespace) -> int:
    sc = parse_table_csv(_read_text(ns.table))
    doc = build_analyze_report(
        sc,
        standardize_ref=ns.standardize,
        allow_tied_strata=ns.allow_tied_strata,
    )
    return _emit(ns, doc, render_analyze_text)


def _cmd_standardize(ns: argparse.Namespace) -> int:
    sc = parse_table_csv(_read_text(ns.table))
    doc = build_standardize_report(sc, ns.reference)
    return _emit(ns, doc, render_standardize_text)


def _cmd_scan(ns: argparse.Namespace) -> int:
    candidates = _split_list(ns.candidates)
    records = parse_records_csv(
        _read_text(ns.records),
        numeric_columns=_split_list(ns.numeric),
        boolean_columns=(ns.outcome_col,),
    )
    if ns.groups:
        pair = _split_list(ns.groups)
        if len(pair) != 2:
            raise NotTwoGroups(f"--groups needs exactly two labels, got {pair}")
        gi = records.column_index(ns.group_col)
        records = RecordTable(
            records.columns,
            tuple(row for row in records.rows if row[gi] in pair),
        )
    config = ScanConfig(
        binning=ns.binning,
        bins=ns.bins,
        min_stratum_size=ns.min_stratum_size,
        allow_tied_strata=ns.allow_tied_strata,
    )
    results = scan(records, ns.group_col, ns.outcome_col, candidates, config)
    return _emit(ns, build_scan_report(records, candidates, results), render_scan_text)


def _cmd_decompose(ns: argparse.Namespace) -> int:
    records = parse_records_csv(
        _read_text(ns.records), numeric_columns=(ns.x, ns.y)
    )
    doc = build_decompose_report(records, ns.group_col, ns.x, ns.y)
    return _emit(ns, doc, render_decompose_text)


def _cmd_generate(ns: argparse.Namespace) -> int:
    sc = generate_reversal(ns.strata, ns.scale, ns.seed)
    if ns.format == "json":
        doc = build_generate_report(sc, ns.strata, ns.scale, ns.seed)
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        sys.stdout.write(serialize_table_csv(sc))
    return 0


def _cmd_plot(ns: argparse.Namespace) -> int:
    sc = parse_table_csv(_read_text(ns.table))
    options = RenderOptions(
        width=ns.width,
        height=ns.height,
        parallelogram=not ns.fan_only,
    )
    svg = render_svg(to_vectors(sc), options)
    Path(ns.out).write_text(svg, encoding="utf-8")
    print(f"wrote {ns.out}", file=sys.stderr)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confound",
        description=(
            "Detect aggregation reversals in stratified two-group comparisons, "
            "scan records for confounders, standardize rates, decompose "
            "ecological associations, and plot the vector diagram."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--format", choices=("text", "json"), default="text",
            help="report format (default: text)",
        )

    p = sub.add_parser("analyze", help="classify a table CSV for reversal")
    p.add_argument("table", help="table CSV (stratum,group,total,positive)")
    p.add_argument(
        "--standardize", choices=("combined", "first", "second", "equal"),
        default=None, metavar="REF",
        help="also report the standardized comparison under this reference",
    )
    p.add_argument("--allow-tied-strata", action="store_true")
    add_format(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("standardize", help="reference-weighted comparison of a table CSV")
    p.add_argument("table")
    p.add_argument(
        "--reference", choices=("combined", "first", "second", "equal"),
        default="combined",
    )
    add_format(p)
    p.set_defaults(func=_cmd_standardize)

    p = sub.add_parser("scan", help="scan record-level data for reversal-inducing covariates")
    p.add_argument("records", help="records CSV with a header row")
    p.add_argument("--group-col", required=True)
    p.add_argument("--outcome-col", required=True)
    p.add_argument(
        "--candidates", required=True,
        help="comma-separated covariate column names",
    )
    p.add_argument(
        "--numeric", default=None,
        help="comma-separated columns to parse as numbers",
    )
    p.add_argument("--binning", choices=("quantile", "equal_width"), default="quantile")
    p.add_argument("--bins", type=int, default=4)
    p.add_argument("--min-stratum-size", type=int, default=1)
    p.add_argument(
        "--groups", default=None, metavar="G1,G2",
        help="restrict to these two group values when the column has more",
    )
    p.add_argument("--allow-tied-strata", action="store_true")
    add_format(p)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("decompose", help="between/within association decomposition")
    p.add_argument("records")
    p.add_argument("--group-col", required=True)
    p.add_argument("--x", required=True, help="numeric x column")
    p.add_argument("--y", required=True, help="numeric y column")
    add_format(p)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("generate", help="emit a synthetic full-reversal table")
    p.add_argument("--strata", type=int, default=2)
    p.add_argument("--scale", type=int, default=80)
    p.add_argument("--seed", type=int, default=0)
    add_format(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("plot", help="render the vector diagram of a table CSV to SVG")
    p.add_argument("table")
    p.add_argument("--out", required=True, help="output SVG path")
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    p.add_argument(
        "--fan-only", action="store_true",
        help="draw stratum chords from the origin only, without the "
        "terminal-anchored copies",
    )
    p.set_defaults(func=_cmd_plot)

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand; returns the exit code instead of raising."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already reported to stderr
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return ns.func(ns)
    except ConfoundError as exc:
        print(f"error:{exc.code}: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, InputError) else 3
    except OSError as exc:
        print(f"error:io: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))
