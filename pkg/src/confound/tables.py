"""Exact-arithmetic contingency primitives: counts, rates, pooling, comparison.

Counts are plain integers. Rates stay as unreduced ``positive/total`` pairs
so the provenance of every figure survives, and every ordering decision is
made by integer cross-multiplication — never by floating point, so there is
no tolerance parameter at this layer. Percent strings round half-up to one
decimal, which is purely a display concern.

All values are immutable after construction and every operation is a pure
function, so unrestricted concurrent use is safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Literal, Sequence

from .errors import EmptyInput, ValidationError, ZeroTotal

Side = Literal["first", "second"]


class Direction(Enum):
    """Outcome of an exact two-rate comparison."""

    FIRST_HIGHER = "FIRST_HIGHER"
    SECOND_HIGHER = "SECOND_HIGHER"
    TIE = "TIE"

    def flipped(self) -> "Direction":
        """The direction seen after swapping the two sides."""
        if self is Direction.FIRST_HIGHER:
            return Direction.SECOND_HIGHER
        if self is Direction.SECOND_HIGHER:
            return Direction.FIRST_HIGHER
        return Direction.TIE


def _require_side(side: str) -> None:
    if side not in ("first", "second"):
        raise ValidationError(f"side must be 'first' or 'second', got {side!r}")


@dataclass(frozen=True)
class Counts:
    """Subjects and outcome events for one group within one stratum.

    ``total`` is the number of subjects, ``positive`` the number of outcome
    events (deaths, admissions, ...). Both are non-negative and
    ``positive <= total``.
    """

    total: int
    positive: int

    def __post_init__(self):
        for name in ("total", "positive"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValidationError(f"{name} must be an integer, got {v!r}")
            if v < 0:
                raise ValidationError(f"{name} must be >= 0, got {v}")
        if self.positive > self.total:
            raise ValidationError(
                f"positive ({self.positive}) exceeds total ({self.total})"
            )


@dataclass(frozen=True)
class Rate:
    """An event proportion kept as an unreduced numerator/denominator pair.

    Reduction is deliberately not performed: ``Rate(36, 60)`` and
    ``Rate(3, 5)`` compare as equal in value but remember different
    provenance. Use :func:`compare` for ordering; ``value`` is a float
    approximation for display and weighting only.
    """

    numerator: int
    denominator: int

    def __post_init__(self):
        for name in ("numerator", "denominator"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValidationError(f"{name} must be an integer, got {v!r}")
        if self.denominator <= 0:
            raise ValidationError(f"denominator must be > 0, got {self.denominator}")
        if not 0 <= self.numerator <= self.denominator:
            raise ValidationError(
                f"numerator must lie in [0, denominator], got "
                f"{self.numerator}/{self.denominator}"
            )

    @property
    def value(self) -> float:
        return self.numerator / self.denominator

    def percent(self) -> str:
        """Percent display rounded half-up to one decimal, e.g. ``'62.1%'``."""
        # integer half-up: floor((1000 * num / den) + 1/2) in tenths of a percent
        tenths = (2000 * self.numerator + self.denominator) // (2 * self.denominator)
        return f"{tenths // 10}.{tenths % 10}%"

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


@dataclass(frozen=True)
class Stratum:
    """One stratum's counts for both groups."""

    label: str
    first: Counts
    second: Counts


@dataclass(frozen=True)
class StratifiedComparison:
    """Two named groups observed across one or more named strata.

    Invariants enforced here: at least one stratum, unique stratum labels,
    distinct group labels, and no stratum that is empty on both sides.
    A stratum empty on a *single* side is representable; operations that
    need subjects on that side reject it with :class:`ZeroTotal`.
    """

    group_first_label: str
    group_second_label: str
    strata: tuple[Stratum, ...]

    def __post_init__(self):
        object.__setattr__(self, "strata", tuple(self.strata))
        if not self.strata:
            raise ValidationError("a comparison needs at least one stratum")
        if self.group_first_label == self.group_second_label:
            raise ValidationError(
                f"group labels must differ, both are {self.group_first_label!r}"
            )
        labels = [s.label for s in self.strata]
        if len(set(labels)) != len(labels):
            dupes = sorted({l for l in labels if labels.count(l) > 1})
            raise ValidationError(f"duplicate stratum labels: {dupes}")
        for s in self.strata:
            if s.first.total == 0 and s.second.total == 0:
                raise ValidationError(
                    f"stratum {s.label!r} has no subjects on either side"
                )

    @classmethod
    def from_pairs(
        cls,
        group_first_label: str,
        group_second_label: str,
        rows: Sequence[tuple[str, tuple[int, int], tuple[int, int]]],
    ) -> "StratifiedComparison":
        """Build from ``(label, (total, positive), (total, positive))`` rows."""
        strata = tuple(
            Stratum(label, Counts(*first), Counts(*second))
            for label, first, second in rows
        )
        return cls(group_first_label, group_second_label, strata)

    def stratum_labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.strata)

    def group_label(self, side: Side) -> str:
        _require_side(side)
        return self.group_first_label if side == "first" else self.group_second_label

    def counts(self, side: Side) -> tuple[Counts, ...]:
        """All strata's counts for one side, in stratum order."""
        _require_side(side)
        if side == "first":
            return tuple(s.first for s in self.strata)
        return tuple(s.second for s in self.strata)


def rate(c: Counts) -> Rate:
    """The event rate of one cell as an unreduced Rate."""
    if c.total == 0:
        raise ZeroTotal("cannot take a rate over zero subjects")
    return Rate(c.positive, c.total)


def aggregate(cells: Iterable[Counts]) -> Counts:
    """Componentwise sum of count cells (the amalgamated table row).

    Python integers are arbitrary precision, so the sum is exact for any
    representable input.
    """
    cells = list(cells)
    if not cells:
        raise EmptyInput("nothing to aggregate")
    return Counts(sum(c.total for c in cells), sum(c.positive for c in cells))


def compare(r1: Rate, r2: Rate) -> Direction:
    """Order two rates exactly by integer cross-multiplication."""
    lhs = r1.numerator * r2.denominator
    rhs = r2.numerator * r1.denominator
    if lhs > rhs:
        return Direction.FIRST_HIGHER
    if lhs < rhs:
        return Direction.SECOND_HIGHER
    return Direction.TIE


def pooled_rate(sc: StratifiedComparison, side: Side) -> Rate:
    """Rate of one group after summing its counts across all strata."""
    return rate(aggregate(sc.counts(side)))


def unweighted_mean_rate(sc: StratifiedComparison, side: Side) -> float:
    """Arithmetic mean of one group's per-stratum rates.

    This is the naive "average of the ratios" that ignores stratum sizes;
    it generally differs from :func:`pooled_rate`.
    """
    _require_side(side)
    rates = []
    for s in sc.strata:
        c = s.first if side == "first" else s.second
        if c.total == 0:
            raise ZeroTotal(
                f"stratum {s.label!r} has no subjects on the {side} side"
            )
        rates.append(c.positive / c.total)
    return sum(rates) / len(rates)
