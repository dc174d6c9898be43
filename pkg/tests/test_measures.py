"""Tests for the three group-fairness measures, both evaluation routes."""

import itertools
import random
from fractions import Fraction

import pytest

from fairaudit.confusion import ConfusionMatrix, GroupedConfusion, to_joint
from fairaudit.distributions import FiniteJoint
from fairaudit.errors import InputError, PreconditionError
from fairaudit.generators import random_positive_grouped
from fairaudit.measures import (
    INDEPENDENCE,
    MEASURES,
    SEPARATION,
    evaluate_measure,
    independence,
    measure_via_distribution,
    separation,
    sufficiency,
)

BEFORE = {"p": ConfusionMatrix(10, 2, 3, 11), "q": ConfusionMatrix(20, 4, 6, 22)}
AFTER = {"p": ConfusionMatrix(11, 2, 2, 11), "q": ConfusionMatrix(21, 4, 5, 22)}


class TestIndependence:
    def test_before_tables_hold_with_zero_disparity(self):
        verdict = independence(GroupedConfusion(BEFORE))
        assert verdict.holds is True
        assert verdict.disparity == 0
        assert verdict.witnesses == ("p", "q")

    def test_after_tables_fail(self):
        verdict = independence(GroupedConfusion(AFTER))
        assert verdict.holds is False
        assert verdict.disparity == Fraction(1, 52)

    def test_identical_matrices_zero_disparity(self):
        g = GroupedConfusion(
            {"p": ConfusionMatrix(3, 1, 2, 4), "q": ConfusionMatrix(3, 1, 2, 4)}
        )
        assert independence(g).disparity == 0

    def test_single_group_rejected(self):
        with pytest.raises(PreconditionError, match="two groups"):
            independence(GroupedConfusion({"p": ConfusionMatrix(1, 1, 1, 1)}))


class TestSufficiency:
    def test_before_tables_hold(self):
        verdict = sufficiency(GroupedConfusion(BEFORE))
        assert verdict.holds is True
        assert verdict.component_gaps["ppv_gap"] == 0
        assert verdict.component_gaps["npv_gap"] == 0

    def test_after_tables_ppv_gap(self):
        verdict = sufficiency(GroupedConfusion(AFTER))
        assert verdict.holds is False
        assert verdict.component_gaps["ppv_gap"] == Fraction(2, 325)
        assert float(verdict.component_gaps["ppv_gap"]) == pytest.approx(0.006154, abs=1e-6)

    def test_undefined_ppv_not_comparable(self):
        g = GroupedConfusion(
            {"p": ConfusionMatrix(0, 0, 1, 1), "q": ConfusionMatrix(1, 1, 1, 1)}
        )
        verdict = sufficiency(g)
        assert verdict.holds is None
        assert verdict.disparity is None
        assert verdict.component_gaps["ppv_gap"] is None
        assert not verdict.comparable


class TestSeparation:
    def test_before_tables_hold(self):
        verdict = separation(GroupedConfusion(BEFORE))
        assert verdict.holds is True
        assert verdict.component_gaps["fpr_gap"] == 0
        assert verdict.component_gaps["fnr_gap"] == 0

    def test_after_tables_fnr_gap(self):
        verdict = separation(GroupedConfusion(AFTER))
        assert verdict.holds is False
        assert verdict.component_gaps["fnr_gap"] == Fraction(1, 26)
        assert verdict.component_gaps["fpr_gap"] == 0
        assert verdict.disparity == Fraction(1, 26)

    def test_perfect_predictor_zero_gaps(self):
        g = GroupedConfusion(
            {"p": ConfusionMatrix(5, 0, 0, 7), "q": ConfusionMatrix(3, 0, 0, 2)}
        )
        verdict = separation(g)
        assert verdict.component_gaps["fpr_gap"] == 0
        assert verdict.component_gaps["fnr_gap"] == 0
        assert verdict.holds is True


class TestMeasureViaDistribution:
    def test_before_joint_matches_confusion_route(self):
        g = GroupedConfusion(BEFORE)
        j = to_joint(g)
        for measure in MEASURES:
            dist = measure_via_distribution(j, measure)
            conf = evaluate_measure(g, measure)
            assert dist.holds == conf.holds is True

    def test_after_joint_matches_confusion_route(self):
        g = GroupedConfusion(AFTER)
        j = to_joint(g)
        for measure in MEASURES:
            dist = measure_via_distribution(j, measure)
            conf = evaluate_measure(g, measure)
            assert dist.holds == conf.holds is False

    def test_product_joint_satisfies_all_measures(self):
        # A independent of (Y, R) by construction.
        pa = {"p": 0.4, "q": 0.6}
        pyr = {("+", "+"): 0.3, ("-", "+"): 0.2, ("+", "-"): 0.1, ("-", "-"): 0.4}
        table = {
            (a, y, r): pa[a] * pyr[(y, r)]
            for a in pa
            for (y, r) in pyr
        }
        j = FiniteJoint(
            variables=(("A", ("p", "q")), ("Y", ("+", "-")), ("R", ("+", "-"))),
            table=table,
        )
        for measure in MEASURES:
            assert measure_via_distribution(j, measure).holds is True

    def test_correlated_group_and_prediction_fails_independence(self):
        table = {
            ("p", "+", "+"): 0.5,
            ("q", "+", "-"): 0.5,
        }
        j = FiniteJoint(
            variables=(("A", ("p", "q")), ("Y", ("+", "-")), ("R", ("+", "-"))),
            table=table,
        )
        assert measure_via_distribution(j, INDEPENDENCE).holds is False

    def test_wrong_variable_set_rejected(self):
        j = FiniteJoint(
            variables=(("A", ("p", "q")), ("Y", ("+", "-"))),
            table={("p", "+"): 1.0},
        )
        with pytest.raises(InputError, match="A, Y, R"):
            measure_via_distribution(j, INDEPENDENCE)

    def test_nonbinary_prediction_rejected(self):
        j = FiniteJoint(
            variables=(("A", ("p", "q")), ("Y", ("+", "-")), ("R", ("1", "2", "3"))),
            table={("p", "+", "1"): 1.0},
        )
        with pytest.raises(InputError, match="binary"):
            measure_via_distribution(j, SEPARATION)

    def test_unknown_measure_rejected(self):
        with pytest.raises(InputError, match="unknown measure"):
            evaluate_measure(GroupedConfusion(BEFORE), "parity")


class TestInvariances:
    def test_path_equivalence_sample(self):
        rng = random.Random(41)
        for _ in range(60):
            g = random_positive_grouped(rng)
            j = to_joint(g)
            for measure in MEASURES:
                assert (
                    measure_via_distribution(j, measure).holds
                    == evaluate_measure(g, measure).holds
                )

    def test_scaling_invariance(self):
        rng = random.Random(43)
        for _ in range(25):
            g = random_positive_grouped(rng)
            for k in (2, 3, 7):
                scaled = GroupedConfusion(
                    {group: g[group].scaled(k) for group in g.groups}
                )
                for measure in MEASURES:
                    original = evaluate_measure(g, measure)
                    rescaled = evaluate_measure(scaled, measure)
                    assert original.holds == rescaled.holds
                    assert original.component_gaps == rescaled.component_gaps

    def test_group_relabeling_invariance(self):
        rng = random.Random(47)
        for _ in range(25):
            g = random_positive_grouped(rng)
            for order in itertools.permutations(g.groups):
                reordered = GroupedConfusion({group: g[group] for group in order})
                for measure in MEASURES:
                    original = evaluate_measure(g, measure)
                    permuted = evaluate_measure(reordered, measure)
                    assert original.holds == permuted.holds
                    assert original.disparity == permuted.disparity
                    if original.witnesses is not None:
                        assert set(original.witnesses) == set(permuted.witnesses)

    def test_proportional_groups_hold_exactly(self):
        rng = random.Random(53)
        for _ in range(25):
            base = ConfusionMatrix(
                rng.randint(1, 9), rng.randint(1, 9), rng.randint(1, 9), rng.randint(1, 9)
            )
            g = GroupedConfusion({"p": base, "q": base.scaled(rng.randint(2, 5))})
            assert sufficiency(g).disparity == 0
            assert separation(g).disparity == 0
