"""Reversal classification and record-level confounder scanning.

A reversal (the aggregation paradox) is a *strict*-inequality phenomenon:
every stratum favors one group while the amalgamated table favors the
other. Classification therefore runs on exact comparisons from
:mod:`confound.tables`. By default a tied stratum blocks the
``FULL_REVERSAL`` verdict; ``allow_tied_strata=True`` relaxes that to
"all non-tie stratum directions unanimous and opposed by the aggregate".

The scan half of the module takes row-level records, stratifies them by
each candidate covariate (categorical passthrough or numeric binning), and
reports which candidates induce a reversal. Candidate failures become skip
records instead of aborting the scan, and the result order is deterministic
regardless of evaluation order.
"""

from __future__ import annotations

import math
import statistics
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Literal, Sequence, Union

from .errors import (
    AllStrataFiltered,
    ConfoundError,
    EmptyCandidates,
    EmptyStratumSide,
    NotTwoGroups,
    TooFewDistinctValues,
    UnknownColumn,
    ValidationError,
    ZeroTotal,
)
from .tables import (
    Counts,
    Direction,
    StratifiedComparison,
    Stratum,
    compare,
    pooled_rate,
    rate,
)


class Classification(Enum):
    """Verdict over a stratified comparison."""

    FULL_REVERSAL = "FULL_REVERSAL"
    CONSISTENT = "CONSISTENT"
    MIXED = "MIXED"


@dataclass(frozen=True)
class ReversalReport:
    """Per-stratum directions plus the aggregate direction and verdict.

    ``majority_direction`` is the mode of the non-tie stratum directions,
    ``TIE`` when there is no mode.
    """

    stratum_directions: tuple[tuple[str, Direction], ...]
    aggregate_direction: Direction
    classification: Classification
    majority_direction: Direction


def _classify(
    stratum_dirs: Sequence[Direction],
    aggregate_dir: Direction,
    allow_tied_strata: bool,
) -> Classification:
    non_tie = [d for d in stratum_dirs if d is not Direction.TIE]
    if non_tie and len(set(non_tie)) == 1:
        if aggregate_dir is non_tie[0].flipped() and (
            allow_tied_strata or len(non_tie) == len(stratum_dirs)
        ):
            return Classification.FULL_REVERSAL
    if all(d is aggregate_dir for d in non_tie):
        return Classification.CONSISTENT
    return Classification.MIXED


def _majority(stratum_dirs: Sequence[Direction]) -> Direction:
    counts = Counter(d for d in stratum_dirs if d is not Direction.TIE)
    first = counts[Direction.FIRST_HIGHER]
    second = counts[Direction.SECOND_HIGHER]
    if first > second:
        return Direction.FIRST_HIGHER
    if second > first:
        return Direction.SECOND_HIGHER
    return Direction.TIE


def detect_reversal(
    sc: StratifiedComparison, *, allow_tied_strata: bool = False
) -> ReversalReport:
    """Classify a stratified comparison.

    Every stratum must have subjects on both sides; an empty side is
    rejected with :class:`ZeroTotal`, never silently dropped.
    """
    directions: list[tuple[str, Direction]] = []
    for s in sc.strata:
        if s.first.total == 0 or s.second.total == 0:
            side = sc.group_first_label if s.first.total == 0 else sc.group_second_label
            raise ZeroTotal(f"stratum {s.label!r} has no {side!r} subjects")
        directions.append((s.label, compare(rate(s.first), rate(s.second))))
    aggregate_dir = compare(pooled_rate(sc, "first"), pooled_rate(sc, "second"))
    dirs = [d for _, d in directions]
    return ReversalReport(
        stratum_directions=tuple(directions),
        aggregate_direction=aggregate_dir,
        classification=_classify(dirs, aggregate_dir, allow_tied_strata),
        majority_direction=_majority(dirs),
    )


# ---------------------------------------------------------------------------
# Record-level data


ColumnKind = Literal["categorical", "numeric", "boolean"]


@dataclass(frozen=True)
class Column:
    name: str
    kind: ColumnKind


@dataclass(frozen=True)
class RecordTable:
    """Row-level data with a declared column schema.

    Categorical cells are text, numeric cells are finite reals, boolean
    cells are bools (outcome columns). Every row carries exactly the
    declared columns, in declaration order.
    """

    columns: tuple[Column, ...]
    rows: tuple[tuple[object, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate column names: {names}")
        for c in self.columns:
            if c.kind not in ("categorical", "numeric", "boolean"):
                raise ValidationError(f"unknown column kind {c.kind!r}")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValidationError(
                    f"row {i} has {len(row)} cells, expected {len(self.columns)}"
                )
            for c, v in zip(self.columns, row):
                if c.kind == "categorical" and not isinstance(v, str):
                    raise ValidationError(
                        f"row {i}, column {c.name!r}: expected text, got {v!r}"
                    )
                if c.kind == "boolean" and not isinstance(v, bool):
                    raise ValidationError(
                        f"row {i}, column {c.name!r}: expected bool, got {v!r}"
                    )
                if c.kind == "numeric":
                    if isinstance(v, bool) or not isinstance(v, (int, float)):
                        raise ValidationError(
                            f"row {i}, column {c.name!r}: expected a number, got {v!r}"
                        )
                    if not math.isfinite(v):
                        raise ValidationError(
                            f"row {i}, column {c.name!r}: non-finite value"
                        )

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise UnknownColumn(f"no column named {name!r}")

    def kind(self, name: str) -> ColumnKind:
        return self.columns[self.column_index(name)].kind

    def values(self, name: str) -> list:
        i = self.column_index(name)
        return [row[i] for row in self.rows]


BinStrategy = Literal["quantile", "equal_width"]


def bin_numeric(
    values: Sequence[float], strategy: BinStrategy = "quantile", k: int = 4
) -> list[float]:
    """Interior edges (k-1 of them) splitting ``values`` into k bins.

    Bins are left-closed and right-open except the last, which is closed.
    Quantile edges use linear interpolation on the sorted data and require
    at least k distinct values; equal-width edges require a non-degenerate
    range.
    """
    if k < 2:
        raise ValidationError(f"bin count must be >= 2, got {k}")
    vals = [float(v) for v in values]
    if not all(math.isfinite(v) for v in vals):
        raise ValidationError("values must be finite")
    if strategy == "quantile":
        if len(set(vals)) < k:
            raise TooFewDistinctValues(
                f"quantile binning into {k} bins needs at least {k} distinct "
                f"values, got {len(set(vals))}"
            )
        return statistics.quantiles(vals, n=k, method="inclusive")
    if strategy == "equal_width":
        lo, hi = min(vals), max(vals)
        if lo == hi:
            raise TooFewDistinctValues("all values are identical")
        return [lo + (hi - lo) * j / k for j in range(1, k)]
    raise ValidationError(f"unknown binning strategy {strategy!r}")


def _bin_label(i: int, lo: float, hi: float, last: bool) -> str:
    close = "]" if last else ")"
    return f"bin{i:02d} [{lo:.6g}, {hi:.6g}{close}"


def _tally(
    records: RecordTable,
    group_col: str,
    outcome_col: str,
    covariate: str,
    binning: str | None,
    bins: int,
) -> tuple[list[tuple[str, list[int], list[int]]], str]:
    """Per-stratum [total, positive] tallies for both groups, plus a
    binning description. Strata with no rows at all are dropped (numeric
    bins can be empty); strata empty on one side are kept for the caller
    to judge."""
    gi = records.column_index(group_col)
    oi = records.column_index(outcome_col)
    ci = records.column_index(covariate)
    if records.columns[gi].kind != "categorical":
        raise ValidationError(f"group column {group_col!r} must be categorical")
    if records.columns[oi].kind != "boolean":
        raise ValidationError(f"outcome column {outcome_col!r} must be boolean")

    groups = sorted({row[gi] for row in records.rows})
    if len(groups) != 2:
        raise NotTwoGroups(
            f"group column {group_col!r} must take exactly two values, "
            f"found {len(groups)}: {groups}"
        )

    kind = records.columns[ci].kind
    if binning is None:
        binning = "categorical" if kind == "categorical" else "quantile"

    if binning == "categorical":
        if kind != "categorical":
            raise ValidationError(
                f"covariate {covariate!r} is {kind}; pick a numeric binning"
            )
        labels = sorted({row[ci] for row in records.rows})
        assign = {row_i: row[ci] for row_i, row in enumerate(records.rows)}
        description = "categorical"
    elif binning in ("quantile", "equal_width"):
        if kind != "numeric":
            raise ValidationError(
                f"covariate {covariate!r} is {kind}; numeric binning needs a "
                "numeric column"
            )
        col = [row[ci] for row in records.rows]
        edges = bin_numeric(col, binning, bins)
        lo, hi = min(col), max(col)
        bounds = [lo, *edges, hi]
        all_labels = [
            _bin_label(i, bounds[i], bounds[i + 1], i == bins - 1)
            for i in range(bins)
        ]
        assign = {
            row_i: all_labels[bisect_right(edges, v)]
            for row_i, v in enumerate(col)
        }
        labels = [l for l in all_labels if l in set(assign.values())]
        description = f"{binning} k={bins} edges={[round(e, 6) for e in edges]}"
    else:
        raise ValidationError(f"unknown binning {binning!r}")

    tallies = {label: ([0, 0], [0, 0]) for label in labels}
    for row_i, row in enumerate(records.rows):
        cell = tallies[assign[row_i]][0 if row[gi] == groups[0] else 1]
        cell[0] += 1
        if row[oi]:
            cell[1] += 1
    return [(label, *tallies[label]) for label in labels], description


def stratify(
    records: RecordTable,
    group_col: str,
    outcome_col: str,
    covariate: str,
    *,
    binning: str | None = None,
    bins: int = 4,
) -> StratifiedComparison:
    """Build a StratifiedComparison from records, stratified by a covariate.

    ``binning=None`` picks categorical passthrough for categorical
    covariates and quantile binning (default k=4) for numeric ones.
    Categorical strata are ordered lexicographically, numeric strata in bin
    order; the two group labels are ordered lexicographically. A stratum
    with rows on only one side is an error here (scans downgrade it to a
    per-candidate skip).
    """
    tallies, _ = _tally(records, group_col, outcome_col, covariate, binning, bins)
    gi = records.column_index(group_col)
    groups = sorted({row[gi] for row in records.rows})
    strata = []
    for label, first_cell, second_cell in tallies:
        if first_cell[0] == 0 or second_cell[0] == 0:
            empty = groups[0] if first_cell[0] == 0 else groups[1]
            raise EmptyStratumSide(
                f"stratum {label!r} has no rows for group {empty!r}"
            )
        strata.append(
            Stratum(label, Counts(*first_cell), Counts(*second_cell))
        )
    return StratifiedComparison(groups[0], groups[1], tuple(strata))


# ---------------------------------------------------------------------------
# Covariate scan


@dataclass(frozen=True)
class ScanConfig:
    binning: BinStrategy = "quantile"
    bins: int = 4
    min_stratum_size: int = 1
    allow_tied_strata: bool = False


@dataclass(frozen=True)
class Finding:
    """One candidate covariate that supported a full classification."""

    covariate: str
    binning: str
    report: ReversalReport
    stratum_sizes: tuple[int, ...]


@dataclass(frozen=True)
class SkippedCandidate:
    """One candidate covariate that could not be classified, and why."""

    covariate: str
    reason: str
    detail: str


ScanResult = Union[Finding, SkippedCandidate]

_CLASS_ORDER = {
    Classification.FULL_REVERSAL: 0,
    Classification.MIXED: 1,
    Classification.CONSISTENT: 2,
}


def scan(
    records: RecordTable,
    group_col: str,
    outcome_col: str,
    candidates: Sequence[str],
    config: ScanConfig = ScanConfig(),
) -> list[ScanResult]:
    """Try every candidate covariate and rank what it does to the verdict.

    Strata smaller than ``config.min_stratum_size`` (row count over both
    groups) are dropped before detection. Per-candidate failures become
    :class:`SkippedCandidate` records; the scan itself never aborts on one.
    Findings come first — FULL_REVERSAL, then MIXED, then CONSISTENT, ties
    broken by covariate name — followed by skips sorted by name, so any
    evaluation schedule yields the same list.
    """
    if not candidates:
        raise EmptyCandidates("no candidate covariates given")
    if len(set(candidates)) != len(candidates):
        raise ValidationError(f"duplicate candidates in {list(candidates)}")
    # group/outcome problems are global: validate once, outside the loop
    gi = records.column_index(group_col)
    records.column_index(outcome_col)
    groups = sorted({row[gi] for row in records.rows})
    if len(groups) != 2:
        raise NotTwoGroups(
            f"group column {group_col!r} must take exactly two values, "
            f"found {len(groups)}: {groups}"
        )

    results: list[ScanResult] = []
    for cand in candidates:
        try:
            results.append(_scan_one(records, group_col, outcome_col, cand, config))
        except ConfoundError as exc:
            results.append(SkippedCandidate(cand, exc.code, str(exc)))

    findings = sorted(
        (r for r in results if isinstance(r, Finding)),
        key=lambda f: (_CLASS_ORDER[f.report.classification], f.covariate),
    )
    skips = sorted(
        (r for r in results if isinstance(r, SkippedCandidate)),
        key=lambda s: s.covariate,
    )
    return [*findings, *skips]


def _scan_one(
    records: RecordTable,
    group_col: str,
    outcome_col: str,
    covariate: str,
    config: ScanConfig,
) -> Finding:
    kind = records.kind(covariate)
    binning = "categorical" if kind == "categorical" else config.binning
    tallies, description = _tally(
        records, group_col, outcome_col, covariate, binning, config.bins
    )

    kept = [
        (label, f, s)
        for label, f, s in tallies
        if f[0] + s[0] >= config.min_stratum_size
    ]
    if not kept:
        raise AllStrataFiltered(
            f"every stratum of {covariate!r} is smaller than "
            f"{config.min_stratum_size}"
        )
    gi = records.column_index(group_col)
    groups = sorted({row[gi] for row in records.rows})
    for label, f, s in kept:
        if f[0] == 0 or s[0] == 0:
            empty = groups[0] if f[0] == 0 else groups[1]
            raise EmptyStratumSide(
                f"stratum {label!r} has no rows for group {empty!r}"
            )
    sc = StratifiedComparison(
        groups[0],
        groups[1],
        tuple(Stratum(label, Counts(*f), Counts(*s)) for label, f, s in kept),
    )
    report = detect_reversal(sc, allow_tied_strata=config.allow_tied_strata)
    sizes = tuple(f[0] + s[0] for _, f, s in kept)
    return Finding(covariate, description, report, sizes)
