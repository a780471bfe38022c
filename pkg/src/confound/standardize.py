"""Reference-weighted pooling of stratum rates (direct standardization).

Amalgamation weights each group's stratum rates by that group's *own*
exposure structure, which is what lets the pooled comparison contradict
every stratum. Pooling both groups against one common weight vector removes
the artifact: if every stratum strictly favors the same group, any strictly
positive common weighting preserves that direction.

Standardized rates are real-valued (weights are reals), so the direction of
a standardized comparison uses a fixed tie tolerance instead of exact
arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

from .errors import ValidationError, WeightMismatch, ZeroTotal
from .tables import Direction, Side, StratifiedComparison

Reference = Literal["combined", "first", "second", "equal"]

TIE_TOLERANCE = 1e-12
_WEIGHT_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class WeightVector:
    """Non-negative per-stratum weights summing to one."""

    weights: tuple[tuple[str, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "weights", tuple((label, float(w)) for label, w in self.weights)
        )
        if not self.weights:
            raise ValidationError("a weight vector needs at least one stratum")
        for label, w in self.weights:
            if not w >= 0.0:  # also rejects NaN
                raise ValidationError(f"weight for {label!r} must be >= 0, got {w}")
        total = sum(w for _, w in self.weights)
        if abs(total - 1.0) > _WEIGHT_SUM_TOLERANCE:
            raise ValidationError(f"weights must sum to 1, got {total!r}")

    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.weights)


def reference_weights(
    sc: StratifiedComparison, reference: Reference = "combined"
) -> WeightVector:
    """Stratum weights for a chosen reference population.

    ``combined`` — each stratum's share of subjects over both groups
    (the default: symmetric between the groups and the usual direct-
    standardization convention). ``first``/``second`` — that group's own
    stratum shares, requiring subjects in every stratum on that side.
    ``equal`` — 1/K per stratum.
    """
    k = len(sc.strata)
    if reference == "equal":
        return WeightVector(tuple((s.label, 1.0 / k) for s in sc.strata))
    if reference == "combined":
        grand = sum(s.first.total + s.second.total for s in sc.strata)
        return WeightVector(
            tuple(
                (s.label, (s.first.total + s.second.total) / grand)
                for s in sc.strata
            )
        )
    if reference in ("first", "second"):
        cells = sc.counts(reference)
        for s, c in zip(sc.strata, cells):
            if c.total == 0:
                raise ZeroTotal(
                    f"stratum {s.label!r} has no subjects on the {reference} side"
                )
        grand = sum(c.total for c in cells)
        return WeightVector(
            tuple((s.label, c.total / grand) for s, c in zip(sc.strata, cells))
        )
    raise ValidationError(f"unknown reference {reference!r}")


def standardized_rate(
    sc: StratifiedComparison, side: Side, w: WeightVector
) -> float:
    """One group's stratum rates averaged under a common weight vector."""
    if w.labels() != sc.stratum_labels():
        raise WeightMismatch(
            f"weight labels {list(w.labels())} do not match strata "
            f"{list(sc.stratum_labels())}"
        )
    total = 0.0
    for s, (_, weight), c in zip(sc.strata, w.weights, sc.counts(side)):
        if c.total == 0:
            raise ZeroTotal(
                f"stratum {s.label!r} has no subjects on the {side} side"
            )
        total += weight * (c.positive / c.total)
    return total


class StandardizedComparison(NamedTuple):
    rate_first: float
    rate_second: float
    direction: Direction


def standardized_comparison(
    sc: StratifiedComparison, reference: Reference = "combined"
) -> StandardizedComparison:
    """Both groups' standardized rates under one reference, plus direction.

    Ties are declared within ``TIE_TOLERANCE`` (1e-12); everything else is
    a strict real comparison.
    """
    w = reference_weights(sc, reference)
    first = standardized_rate(sc, "first", w)
    second = standardized_rate(sc, "second", w)
    if abs(first - second) <= TIE_TOLERANCE:
        direction = Direction.TIE
    elif first > second:
        direction = Direction.FIRST_HIGHER
    else:
        direction = Direction.SECOND_HIGHER
    return StandardizedComparison(first, second, direction)
