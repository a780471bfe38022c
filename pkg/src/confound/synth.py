"""Reversal construction, exhaustive minimal search, and a brute-force oracle.

``generate_reversal`` builds tables that are guaranteed full reversals by a
constructive recipe (one group's exposure skewed toward the high-rate
strata, the other's toward the low-rate strata, with every stratum strictly
favoring the second group), retrying with fresh jitter until the detector
confirms.

``brute_force_classify`` re-derives the detector's whole report from
first principles with ``fractions.Fraction`` and longhand case analysis,
sharing no logic with the detector so the two can serve as differential
oracles for each other.

``minimal_reversal`` enumerates every two-stratum table up to a subject
bound and returns the canonical smallest reversal: fewest subjects, ties
broken lexicographically on (a, b, c, d, A, B, C, D) — group one's
(total, positive) per stratum, then group two's.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .detector import Classification, ReversalReport, detect_reversal
from .errors import GenerationFailed, NotFound, ValidationError, ZeroTotal
from .tables import Counts, Direction, StratifiedComparison, Stratum

GENERATION_BUDGET = 100_000


def _clamp(v: int, lo: int, hi: int) -> int:
    return max(lo, min(hi, v))


def _candidate(rng: random.Random, k: int, scale: int) -> StratifiedComparison:
    """One attempt: stratum rates fall from front to back, the first group's
    exposure is front-loaded and the second group's back-loaded, and the
    second group strictly leads inside every stratum."""
    low_exposure = max(1, scale // 5)
    top = rng.uniform(0.55, 0.85)
    bottom = rng.uniform(0.05, 0.35)
    gap = rng.uniform(0.06, 0.2)

    strata = []
    for i in range(k):
        frac = i / (k - 1)
        heavy = scale * (1 - frac) + low_exposure * frac
        light = scale * frac + low_exposure * (1 - frac)
        t1 = max(1, round(heavy * rng.uniform(0.8, 1.2)))
        t2 = max(1, round(light * rng.uniform(0.8, 1.2)))
        level = top * (1 - frac) + bottom * frac
        r1 = max(0.0, min(1.0, level - gap / 2))
        r2 = max(0.0, min(1.0, level + gap / 2))
        p1 = _clamp(round(r1 * t1), 0, t1)
        p2 = _clamp(round(r2 * t2), 0, t2)
        # integer rounding can break strictness; nudge until p1/t1 < p2/t2
        while p1 * t2 >= p2 * t1:
            if p2 < t2:
                p2 += 1
            else:
                p1 -= 1
        strata.append(Stratum(f"s{i + 1}", Counts(t1, p1), Counts(t2, p2)))
    return StratifiedComparison("g1", "g2", tuple(strata))


def generate_reversal(k: int, scale: int, seed: int) -> StratifiedComparison:
    """A k-stratum table whose verdict is FULL_REVERSAL, deterministic per seed."""
    if k < 2:
        raise ValidationError(
            f"reversal needs at least 2 strata, got {k} (a single stratum's "
            "pooled rate is its own rate)"
        )
    if scale < 10:
        raise ValidationError(f"scale must be >= 10, got {scale}")
    rng = random.Random(seed)
    for _ in range(GENERATION_BUDGET):
        sc = _candidate(rng, k, scale)
        report = detect_reversal(sc)
        if report.classification is Classification.FULL_REVERSAL:
            return sc
    raise GenerationFailed(
        f"no full reversal found in {GENERATION_BUDGET} attempts "
        f"(k={k}, scale={scale}, seed={seed})"
    )


def brute_force_classify(sc: StratifiedComparison) -> ReversalReport:
    """Same contract as the detector, independently derived with Fractions."""
    directions = []
    t1 = p1 = t2 = p2 = 0
    for s in sc.strata:
        if s.first.total == 0 or s.second.total == 0:
            side = (
                sc.group_first_label if s.first.total == 0 else sc.group_second_label
            )
            raise ZeroTotal(f"stratum {s.label!r} has no {side!r} subjects")
        f = Fraction(s.first.positive, s.first.total)
        g = Fraction(s.second.positive, s.second.total)
        if f > g:
            d = Direction.FIRST_HIGHER
        elif g > f:
            d = Direction.SECOND_HIGHER
        else:
            d = Direction.TIE
        directions.append((s.label, d))
        t1 += s.first.total
        p1 += s.first.positive
        t2 += s.second.total
        p2 += s.second.positive

    pooled1 = Fraction(p1, t1)
    pooled2 = Fraction(p2, t2)
    if pooled1 > pooled2:
        agg = Direction.FIRST_HIGHER
    elif pooled2 > pooled1:
        agg = Direction.SECOND_HIGHER
    else:
        agg = Direction.TIE

    n = len(directions)
    firsts = sum(1 for _, d in directions if d is Direction.FIRST_HIGHER)
    seconds = sum(1 for _, d in directions if d is Direction.SECOND_HIGHER)
    if firsts == n and agg is Direction.SECOND_HIGHER:
        verdict = Classification.FULL_REVERSAL
    elif seconds == n and agg is Direction.FIRST_HIGHER:
        verdict = Classification.FULL_REVERSAL
    elif firsts == 0 and seconds == 0:
        verdict = Classification.CONSISTENT
    elif agg is Direction.FIRST_HIGHER and seconds == 0:
        verdict = Classification.CONSISTENT
    elif agg is Direction.SECOND_HIGHER and firsts == 0:
        verdict = Classification.CONSISTENT
    else:
        verdict = Classification.MIXED

    if firsts > seconds:
        majority = Direction.FIRST_HIGHER
    elif seconds > firsts:
        majority = Direction.SECOND_HIGHER
    else:
        majority = Direction.TIE

    return ReversalReport(tuple(directions), agg, verdict, majority)


def _reverses(a, b, c, d, A, B, C, D) -> bool:
    s1 = b * A - B * a
    s2 = d * C - D * c
    ag = (b + d) * (A + C) - (B + D) * (a + c)
    return (s1 > 0 and s2 > 0 and ag < 0) or (s1 < 0 and s2 < 0 and ag > 0)


def minimal_reversal(max_total: int) -> StratifiedComparison:
    """Canonical smallest two-stratum full reversal within a subject bound.

    Enumerates exhaustively by ascending total subject count, then takes
    the lexicographically smallest (a, b, c, d, A, B, C, D); pure integer
    arithmetic, so the witness is stable across runs and platforms. Raises
    :class:`NotFound` when nothing reverses within the bound.
    """
    if max_total < 2:
        raise ValidationError(f"max_total must be >= 2, got {max_total}")
    for n in range(4, max_total + 1):
        best = None
        for a in range(1, n - 2):
            for c in range(1, n - a - 1):
                for A in range(1, n - a - c):
                    C = n - a - c - A
                    for b in range(a + 1):
                        for d in range(c + 1):
                            for B in range(A + 1):
                                for D in range(C + 1):
                                    if _reverses(a, b, c, d, A, B, C, D):
                                        tup = (a, b, c, d, A, B, C, D)
                                        if best is None or tup < best:
                                            best = tup
        if best is not None:
            a, b, c, d, A, B, C, D = best
            return StratifiedComparison(
                "g1",
                "g2",
                (
                    Stratum("s1", Counts(a, b), Counts(A, B)),
                    Stratum("s2", Counts(c, d), Counts(C, D)),
                ),
            )
    raise NotFound(f"no full reversal exists with at most {max_total} subjects")
