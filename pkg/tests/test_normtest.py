"""Subset-normalization vs aggregation equisatisfiability checks."""

import math

import pytest

from asptoc.dlcheck import enumerate_dl_models
from asptoc.formulas import FormulaSet, ref_name
from asptoc.normtest import check_proposition, proposition_sides
from asptoc.parser import parse_program


def rule_of(src):
    return parse_program(src).rules[0]


class TestPropositionPass:
    def test_variant1_three_atoms(self):
        verdict = check_proposition(rule_of("a :- 1 <= { b1, b2, b3 }."), 1)
        assert verdict.passed and verdict.subset_rules == 3

    def test_variant2_two_of_four(self):
        verdict = check_proposition(rule_of("a :- 2 <= { b1, b2, b3, b4 }."), 2)
        assert verdict.passed and verdict.subset_rules == math.comb(4, 2)

    def test_variant3_minimal_weighted_subsets(self):
        rule = rule_of("a :- 7 <= { b1=7, b2=5, b3=3, b4=2, b5=1 }.")
        verdict = check_proposition(rule, 3)
        assert verdict.passed and verdict.subset_rules == 3

    def test_unreachable_bound_still_agrees(self):
        verdict = check_proposition(rule_of("a :- 19 <= { b1=2, b2=3 }."), 3)
        assert verdict.passed and verdict.subset_rules == 0


class TestValidation:
    def test_variant1_requires_bound_one(self):
        with pytest.raises(ValueError):
            check_proposition(rule_of("a :- 2 <= { b1, b2 }."), 1)

    def test_variant2_rejects_weights(self):
        with pytest.raises(ValueError):
            check_proposition(rule_of("a :- 2 <= { b1=2, b2=3 }."), 2)

    def test_negative_body_rejected(self):
        with pytest.raises(ValueError):
            check_proposition(rule_of("a :- 1 <= { b1, not b2 }."), 2)

    def test_body_cap(self):
        with pytest.raises(ValueError):
            check_proposition(
                rule_of("a :- 1 <= { b1, b2, b3, b4, b5, b6 }."), 2)


class TestStrongConstraintsMatter:
    def test_dropping_one_side_breaks_agreement(self):
        rule = rule_of("a :- 2 <= { b1, b2, b3 }.")
        assert check_proposition(rule, 2).passed
        assert not check_proposition(rule, 2, drop_strong_side="a").passed
        assert not check_proposition(rule, 2, drop_strong_side="b").passed


class TestSizes:
    def test_subset_count_binomial_aggregate_linear(self):
        for n in (3, 4, 5):
            rule = rule_of(
                f"a :- {n // 2} <= {{ {', '.join(f'b{i}' for i in range(1, n + 1))} }}.")
            verdict = check_proposition(rule, 2)
            assert verdict.subset_rules == math.comb(n, n // 2)
            # aggregated side: bounds, dep/gap pairs, one app/strong/def
            assert verdict.aggregate_formula_count == 3 * (n + 1) + 2 * n + 3


def joint_projection_check(rule):
    """Reference check by full enumeration: the side sets and the connected
    union must agree after projection."""
    side_a, side_b, connecting, _ = proposition_sides(rule)
    joint = FormulaSet()
    joint.merge(side_a)
    joint.merge(side_b)
    joint.add("connect", connecting)

    def model_set(fs, keep_atoms):
        cap = len(fs.base_atoms) + len(fs.aux_atoms)
        out = set()
        for m in enumerate_dl_models(fs, max_atoms=cap):
            props = tuple(sorted((k, v) for k, v in m.props if k in keep_atoms))
            out.add((props, m.ints))
        return out

    vocab_a = set(side_a.base_atoms) | {ref_name(x) for x in side_a.aux_atoms}
    vocab_b = set(side_b.base_atoms) | {ref_name(x) for x in side_b.aux_atoms}
    return (model_set(joint, vocab_a) == model_set(side_a, vocab_a)
            and model_set(joint, vocab_b) == model_set(side_b, vocab_b))


class TestCrossValidation:
    @pytest.mark.parametrize("src,variant", [
        ("a :- 1 <= { b1, b2 }.", 1),
        ("a :- 2 <= { b1, b2, b3 }.", 2),
        ("a :- 3 <= { b1=2, b2=2, b3=1 }.", 3),
    ])
    def test_classed_enumeration_matches_full(self, src, variant):
        rule = rule_of(src)
        assert check_proposition(rule, variant).passed == \
            joint_projection_check(rule)

    def test_full_check_detects_missing_strong(self):
        rule = rule_of("a :- 1 <= { b1, b2 }.")
        side_a, side_b, connecting, _ = proposition_sides(rule)
        weakened = side_a.without("strong:")
        joint = FormulaSet()
        joint.merge(weakened)
        joint.merge(side_b)
        joint.add("connect", connecting)

        def count(fs):
            cap = len(fs.base_atoms) + len(fs.aux_atoms)
            return len(enumerate_dl_models(fs, max_atoms=cap))

        assert count(weakened) > count(joint)
