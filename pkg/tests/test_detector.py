"""Reversal classification, stratification, binning, and scanning."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confound.detector import (
    Classification,
    Finding,
    ScanConfig,
    SkippedCandidate,
    bin_numeric,
    detect_reversal,
    scan,
    stratify,
)
from confound.errors import (
    EmptyCandidates,
    EmptyStratumSide,
    NotTwoGroups,
    TooFewDistinctValues,
    UnknownColumn,
    ValidationError,
    ZeroTotal,
)
from confound.tables import Counts, Direction, StratifiedComparison, Stratum
from support import (
    BERKELEY,
    HOSPITAL,
    comparisons,
    hospital_records,
    records_from_columns,
)

F = Direction.FIRST_HIGHER
S = Direction.SECOND_HIGHER
T = Direction.TIE


def swap_groups(sc: StratifiedComparison) -> StratifiedComparison:
    return StratifiedComparison(
        sc.group_second_label,
        sc.group_first_label,
        tuple(Stratum(s.label, s.second, s.first) for s in sc.strata),
    )


def scale_counts(sc: StratifiedComparison, m: int) -> StratifiedComparison:
    return StratifiedComparison(
        sc.group_first_label,
        sc.group_second_label,
        tuple(
            Stratum(
                s.label,
                Counts(s.first.total * m, s.first.positive * m),
                Counts(s.second.total * m, s.second.positive * m),
            )
            for s in sc.strata
        ),
    )


class TestDetectReversal:
    def test_hospital_full_reversal(self):
        report = detect_reversal(HOSPITAL)
        assert [d for _, d in report.stratum_directions] == [S, S]
        assert report.aggregate_direction is F
        assert report.classification is Classification.FULL_REVERSAL
        assert report.majority_direction is S

    def test_berkeley_mixed(self):
        report = detect_reversal(BERKELEY)
        assert [d for _, d in report.stratum_directions] == [S, S, F, S, F, S]
        assert report.aggregate_direction is F
        assert report.classification is Classification.MIXED
        assert report.majority_direction is S

    def test_identical_groups_all_tie(self):
        sc = StratifiedComparison.from_pairs(
            "g1", "g2", [("a", (10, 4), (10, 4)), ("b", (6, 1), (6, 1))]
        )
        report = detect_reversal(sc)
        assert all(d is T for _, d in report.stratum_directions)
        assert report.aggregate_direction is T
        assert report.classification is Classification.CONSISTENT
        assert report.majority_direction is T

    def test_empty_side_rejected_not_dropped(self):
        sc = StratifiedComparison.from_pairs(
            "g1", "g2", [("ok", (5, 1), (5, 2)), ("gap", (0, 0), (5, 1))]
        )
        with pytest.raises(ZeroTotal, match="gap"):
            detect_reversal(sc)

    def test_tied_stratum_blocks_full_reversal_by_default(self):
        # strata: one tie (low rate, g2-heavy), one strict S (high rate,
        # g1-heavy); the aggregate flips to F
        sc = StratifiedComparison.from_pairs(
            "g1",
            "g2",
            [("even", (10, 2), (60, 12)), ("skew", (60, 36), (10, 7))],
        )
        report = detect_reversal(sc)
        assert [d for _, d in report.stratum_directions] == [T, S]
        assert report.aggregate_direction is F
        assert report.classification is Classification.MIXED
        relaxed = detect_reversal(sc, allow_tied_strata=True)
        assert relaxed.classification is Classification.FULL_REVERSAL

    def test_all_ties_with_unequal_weights_is_consistent(self):
        sc = StratifiedComparison.from_pairs(
            "g1",
            "g2",
            [("a", (2, 1), (100, 50)), ("b", (100, 0), (1, 0))],
        )
        report = detect_reversal(sc)
        assert all(d is T for _, d in report.stratum_directions)
        assert report.aggregate_direction is not T
        assert report.classification is Classification.CONSISTENT


class TestDetectorInvariances:
    @given(comparisons(min_total=1))
    def test_group_swap_flips_directions_keeps_class(self, sc):
        report = detect_reversal(sc)
        swapped = detect_reversal(swap_groups(sc))
        assert swapped.classification is report.classification
        assert swapped.aggregate_direction is report.aggregate_direction.flipped()
        assert swapped.majority_direction is report.majority_direction.flipped()
        assert [d for _, d in swapped.stratum_directions] == [
            d.flipped() for _, d in report.stratum_directions
        ]

    @given(comparisons(min_total=1), st.randoms())
    def test_stratum_permutation_keeps_class(self, sc, rnd):
        strata = list(sc.strata)
        rnd.shuffle(strata)
        permuted = StratifiedComparison(
            sc.group_first_label, sc.group_second_label, tuple(strata)
        )
        a = detect_reversal(sc)
        b = detect_reversal(permuted)
        assert a.classification is b.classification
        assert a.aggregate_direction is b.aggregate_direction
        assert a.majority_direction is b.majority_direction
        assert dict(a.stratum_directions) == dict(b.stratum_directions)

    @given(comparisons(min_total=1), st.integers(2, 50))
    def test_count_scaling_keeps_report(self, sc, m):
        assert detect_reversal(scale_counts(sc, m)) == detect_reversal(sc)

    @given(st.data())
    def test_equal_exposure_never_reverses(self, data):
        """Unanimous strict stratum directions with identical per-stratum
        totals on both sides must come out CONSISTENT."""
        k = data.draw(st.integers(1, 5))
        strata = []
        for i in range(k):
            t = data.draw(st.integers(2, 100))
            p2 = data.draw(st.integers(1, t))
            p1 = data.draw(st.integers(0, p2 - 1))
            strata.append(Stratum(f"s{i + 1}", Counts(t, p1), Counts(t, p2)))
        report = detect_reversal(
            StratifiedComparison("g1", "g2", tuple(strata))
        )
        assert report.classification is Classification.CONSISTENT
        assert report.aggregate_direction is S

    def test_k2_full_reversal_matches_inequality_system(self):
        from confound.synth import generate_reversal

        tables = [HOSPITAL] + [generate_reversal(2, 60, seed) for seed in range(50)]
        for sc in tables:
            assert (
                detect_reversal(sc).classification is Classification.FULL_REVERSAL
            )
            (a, b), (c, d) = [
                (s.first.total, s.first.positive) for s in sc.strata
            ]
            (A, B), (C, D) = [
                (s.second.total, s.second.positive) for s in sc.strata
            ]
            # every full reversal satisfies the strict two-stratum system
            # in one orientation or the other
            forward = (
                b * A < B * a
                and d * C < D * c
                and (b + d) * (A + C) > (B + D) * (a + c)
            )
            mirrored = (
                b * A > B * a
                and d * C > D * c
                and (b + d) * (A + C) < (B + D) * (a + c)
            )
            assert forward or mirrored


class TestStratify:
    def test_reconstructs_hospital_table(self):
        records = hospital_records()
        sc = stratify(records, "hospital", "death", "condition")
        assert sc.group_first_label == "A"
        assert sc.group_second_label == "B"
        # lexicographic stratum order: healthy before non-healthy
        assert sc.stratum_labels() == ("healthy", "non-healthy")
        by_label = {s.label: s for s in sc.strata}
        assert by_label["non-healthy"].first == Counts(60, 36)
        assert by_label["non-healthy"].second == Counts(20, 14)
        assert by_label["healthy"].first == Counts(20, 4)
        assert by_label["healthy"].second == Counts(60, 18)
        assert detect_reversal(sc).classification is Classification.FULL_REVERSAL

    def test_single_category_is_consistent_by_construction(self):
        records = records_from_columns(
            g=["a", "a", "b", "b"],
            out=[True, False, True, True],
            cov=["only"] * 4,
        )
        sc = stratify(records, "g", "out", "cov")
        assert len(sc.strata) == 1
        assert detect_reversal(sc).classification is Classification.CONSISTENT

    def test_quantile_bins_are_balanced(self):
        rng = random.Random(11)
        n = 1000
        records = records_from_columns(
            g=[rng.choice(["x", "y"]) for _ in range(n)],
            out=[rng.random() < 0.5 for _ in range(n)],
            age=[rng.random() for _ in range(n)],
        )
        sc = stratify(records, "g", "out", "age", binning="quantile", bins=4)
        sizes = [s.first.total + s.second.total for s in sc.strata]
        assert len(sizes) == 4
        assert all(abs(size - 250) <= 1 for size in sizes)
        assert sum(sizes) == n

    def test_unknown_column(self):
        with pytest.raises(UnknownColumn):
            stratify(hospital_records(), "hospital", "death", "nope")

    def test_not_two_groups(self):
        records = records_from_columns(
            g=["a", "b", "c"], out=[True, False, True], cov=["u", "u", "u"]
        )
        with pytest.raises(NotTwoGroups):
            stratify(records, "g", "out", "cov")

    def test_empty_stratum_side(self):
        records = records_from_columns(
            g=["a", "a", "b"],
            out=[True, False, True],
            cov=["u", "v", "u"],  # category v has no b rows
        )
        with pytest.raises(EmptyStratumSide, match="v"):
            stratify(records, "g", "out", "cov")


class TestBinNumeric:
    def test_equal_width_midpoint(self):
        assert bin_numeric([1, 2, 3, 4], "equal_width", 2) == [2.5]

    def test_quantile_matches_sort_based_oracle(self):
        rng = random.Random(3)
        values = [rng.random() for _ in range(1000)]

        def oracle(q: float) -> float:
            s = sorted(values)
            pos = (len(s) - 1) * q
            base = int(pos)
            nxt = min(base + 1, len(s) - 1)
            return s[base] + (s[nxt] - s[base]) * (pos - base)

        edges = bin_numeric(values, "quantile", 4)
        assert edges == pytest.approx([oracle(0.25), oracle(0.5), oracle(0.75)])
        for edge, q in zip(edges, (0.25, 0.5, 0.75)):
            assert abs(edge - q) < 0.05

    def test_constant_list_rejected(self):
        with pytest.raises(TooFewDistinctValues):
            bin_numeric([7.0] * 10, "equal_width", 2)
        with pytest.raises(TooFewDistinctValues):
            bin_numeric([7.0] * 10, "quantile", 2)

    def test_quantile_needs_k_distinct(self):
        with pytest.raises(TooFewDistinctValues):
            bin_numeric([1.0, 1.0, 2.0, 2.0], "quantile", 3)

    def test_k_below_two_rejected(self):
        with pytest.raises(ValidationError):
            bin_numeric([1.0, 2.0], "quantile", 1)


class TestScan:
    def test_condition_found_noise_consistent(self):
        records = hospital_records(noise_seed=5)
        results = scan(records, "hospital", "death", ["noise", "condition"])
        assert [type(r) for r in results] == [Finding, Finding]
        first, second = results
        assert first.covariate == "condition"
        assert first.report.classification is Classification.FULL_REVERSAL
        assert first.binning == "categorical"
        assert sum(first.stratum_sizes) == 160
        assert second.covariate == "noise"
        assert second.report.classification is Classification.CONSISTENT

    def test_order_is_deterministic_in_candidate_order(self):
        records = hospital_records(noise_seed=5)
        a = scan(records, "hospital", "death", ["noise", "condition"])
        b = scan(records, "hospital", "death", ["condition", "noise"])
        assert a == b

    def test_empty_candidates_rejected(self):
        with pytest.raises(EmptyCandidates):
            scan(hospital_records(), "hospital", "death", [])

    def test_min_stratum_size_filters_and_skips(self):
        records = hospital_records()
        config = ScanConfig(min_stratum_size=1000)
        results = scan(records, "hospital", "death", ["condition"], config)
        assert results == [
            SkippedCandidate(
                "condition",
                "all-strata-filtered",
                "every stratum of 'condition' is smaller than 1000",
            )
        ]

    def test_unknown_candidate_becomes_skip(self):
        records = hospital_records()
        results = scan(records, "hospital", "death", ["condition", "ghost"])
        kinds = {r.covariate: type(r) for r in results}
        assert kinds == {"condition": Finding, "ghost": SkippedCandidate}
        skip = [r for r in results if isinstance(r, SkippedCandidate)][0]
        assert skip.reason == "unknown-column"

    def test_filtering_can_restore_detectability(self):
        # one tiny stratum with an empty side; min size 2 drops it
        records = records_from_columns(
            g=["a", "a", "b", "b", "a"],
            out=[True, False, False, True, True],
            cov=["big", "big", "big", "big", "solo"],
        )
        bare = scan(records, "g", "out", ["cov"])
        assert isinstance(bare[0], SkippedCandidate)
        assert bare[0].reason == "empty-stratum-side"
        filtered = scan(
            records, "g", "out", ["cov"], ScanConfig(min_stratum_size=2)
        )
        assert isinstance(filtered[0], Finding)
        assert filtered[0].stratum_sizes == (4,)


@settings(max_examples=30)
@given(st.randoms(use_true_random=False))
def test_scan_is_schedule_independent(rnd):
    records = hospital_records(noise_seed=1)
    candidates = ["condition", "noise"]
    rnd.shuffle(candidates)
    results = scan(records, "hospital", "death", candidates)
    assert [r.covariate for r in results] == ["condition", "noise"]
