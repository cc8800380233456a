"""Equisatisfiability harness for the subset-normalized completions.

For a positive in-scope rule, the completion can be written with one
applicability atom per bound-reaching subset of the body, or with a
single applicability atom over a weighted sum of ``dep`` atoms.  A
connecting formula ties the subset atoms' disjunction to the aggregated
atom; the two formula sets must then constrain the shared vocabulary
identically.

The check enumerates the shared vocabulary exactly.  Ranking variables
enter the formulas only through ``dep``/``gap`` atoms and the range
bounds, so assignments are enumerated as realizability classes: a body
atom that is false fixes both atoms false; a true one admits
(dep, gap) in {(F,F), (T,F), (T,T)} gated by the head rank (the (T,F)
case needs rank at least two, (T,T) at least three).  Each class is
realized by concrete rank values, and every realizable combination is
covered, so the classed enumeration equals the full one; a test
cross-checks this against full enumeration on small bodies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .formulas import (
    Aux,
    Base,
    FalseF,
    FormulaSet,
    Iff,
    Var,
    disj,
    eval_formula,
    ref_name,
)
from .program import Origin, Polarity, Rule, program_of
from .toc import normalize_subsets, toc_module


@dataclass(frozen=True)
class Verdict:
    passed: bool
    instances_checked: int
    subset_rules: int
    subset_formula_count: int
    aggregate_formula_count: int
    counterexample: dict | None = None


def _validate(rule: Rule, variant: int) -> None:
    if variant not in (1, 2, 3):
        raise ValueError(f"unknown proposition variant {variant}")
    if rule.head is None or rule.literals(Polarity.NEGATIVE, Polarity.DOUBLE_NEGATED):
        raise ValueError("proposition checks expect a positive headed rule")
    if rule.upper is not None:
        raise ValueError("proposition checks expect lower bounds only")
    if not rule.body or len(rule.body) > 5:
        raise ValueError("proposition checks cover 1 to 5 body atoms")
    if rule.lower < 1:
        raise ValueError("proposition checks expect a positive bound")
    unit = all(wl.weight == 1 for wl in rule.body)
    if variant == 1 and not (unit and rule.lower == 1):
        raise ValueError("variant 1 expects a cardinality rule with bound 1")
    if variant == 2 and not unit:
        raise ValueError("variant 2 expects a cardinality rule")
    if variant == 3 and unit and rule.origin is Origin.CARDINALITY:
        raise ValueError("variant 3 expects a weight rule")


def proposition_sides(rule: Rule):
    """Subset-form set, aggregated set, connecting formula, subset count."""
    head = rule.head
    scope = frozenset({head, *rule.pos_atoms()})
    normalized = normalize_subsets(rule)
    side_a = toc_module(normalized, scope, ranked=True, aux_ns="n")
    side_b = toc_module(program_of([rule], extra_atoms=[head, *rule.pos_atoms()]),
                        scope, ranked=True)
    k = len(normalized.rules)
    if k == 0:
        # an unreachable bound normalizes to no rules at all; the head then
        # keeps its empty completion instead of becoming an input atom
        side_a.add(f"def:{head}", Iff(Var(Base(head)), FalseF()))
    connecting = Iff(disj(*(Var(Aux("app", head, i, "n")) for i in range(1, k + 1))),
                     Var(Aux("app", head, 1)))
    return side_a, side_b, connecting, k


def _shared_assignments(head: str, body: list[str], scope_size: int):
    """All realizable valuations of bases plus dep/gap atoms."""
    for head_true in (False, True):
        # Only the thresholds 2 and 3 on the head rank matter; a false
        # head pins the rank to the maximum, which sits in the top class.
        rank_classes = (1, 2, 3) if head_true else (scope_size + 1,)
        for head_rank in rank_classes:
            per_atom = []
            for b in body:
                cases = [(False, False, False)]  # atom false
                cases.append((True, False, False))
                if head_rank >= 2:
                    cases.append((True, True, False))
                if head_rank >= 3:
                    cases.append((True, True, True))
                per_atom.append(cases)
            for combo in itertools.product(*per_atom):
                env = {head: head_true}
                for b, (value, dep, gap) in zip(body, combo):
                    env[b] = value
                    env[ref_name(Aux("dep", head, b))] = dep
                    env[ref_name(Aux("gap", head, b))] = gap
                yield env


def _derive_and_check(fs: FormulaSet, env: dict) -> bool:
    """Derive applicability atoms from their definitions, then evaluate the
    completion and strong formulas; range and dep/gap definitions hold by
    construction of the assignment stream."""
    ok = True
    for name, formula in fs.formulas:
        if name.startswith(("bounds:", "dep:", "gap:", "reset:")):
            continue
        if name.startswith("app:"):
            assert isinstance(formula, Iff) and isinstance(formula.left, Var)
            env[ref_name(formula.left.atom)] = eval_formula(formula.right, env, {})
            continue
        if not eval_formula(formula, env, {}):
            ok = False
    return ok


def check_proposition(rule: Rule, variant: int, *,
                      drop_strong_side: str | None = None) -> Verdict:
    """PASS when the subset and aggregated formula sets agree on every
    realizable shared assignment, linked by the connecting formula.

    ``drop_strong_side`` removes the strong formulas from one side; the
    harness self-test uses it to confirm they are not vacuous.
    """
    _validate(rule, variant)
    side_a, side_b, connecting, k = proposition_sides(rule)
    if drop_strong_side == "a":
        side_a = side_a.without("strong:")
    elif drop_strong_side == "b":
        side_b = side_b.without("strong:")

    head = rule.head
    body = sorted(rule.pos_atoms())
    scope_size = len(body) + 1
    checked = 0
    for env in _shared_assignments(head, body, scope_size):
        checked += 1
        env_a = dict(env)
        env_b = dict(env)
        sat_a = _derive_and_check(side_a, env_a)
        sat_b = _derive_and_check(side_b, env_b)
        joint = {**env_a, **env_b}
        link = eval_formula(connecting, joint, {})
        if sat_a != sat_b or (sat_a and sat_b and not link):
            shared = dict(env)
            return Verdict(False, checked, k,
                           len(side_a.formulas), len(side_b.formulas),
                           counterexample={"assignment": shared,
                                           "subset_sat": sat_a,
                                           "aggregate_sat": sat_b,
                                           "connecting": link})
    return Verdict(True, checked, k,
                   len(side_a.formulas), len(side_b.formulas))
