"""Ground-truth semantics by brute force.

Stable models are found by guess-and-check over all interpretations: a
candidate is stable when it equals the least model of its reduct, seeded
with the candidate's input atoms (atoms without defining rules vary
freely, as if defined by choice rules).  No solver shortcuts are taken;
this module is the oracle everything else is measured against.

Reduct construction follows the standard definition.  Rules with both
bounds are kept only when the candidate satisfies the whole body, and
their reduct body is the monotone upward closure of the aggregate with
the negative part frozen: an interpretation satisfies it when some
subset of its true body atoms has a weight sum inside the original
window.  That subset-sum reading keeps satisfaction monotone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .program import (
    INFINITY,
    Origin,
    Polarity,
    Program,
    Rule,
    weight_sum,
)


class ResourceError(Exception):
    pass


class ContractError(Exception):
    pass


@dataclass(frozen=True)
class LevelRanking:
    """Rank of each atom: 0 for inputs, the derivation stage for derived
    atoms, infinity for false atoms."""

    ranks: dict

    def rank(self, atom: str):
        return self.ranks.get(atom, INFINITY)


@dataclass(frozen=True)
class PositiveRule:
    """Reduct rule: plain weight body (``window=None``) or upward-closure
    body with a fixed subset-sum window."""

    head: str
    terms: tuple[tuple[str, int], ...]
    lower: int = 0
    window: Optional[tuple[int, int]] = None

    def body_satisfied(self, interp: frozenset) -> bool:
        if self.window is None:
            return sum(w for a, w in self.terms if a in interp) >= self.lower
        lo, hi = self.window
        lo = max(lo, 0)
        if hi < lo:
            return False
        sums = 1
        for a, w in self.terms:
            if a in interp:
                sums |= sums << w
        mask = ((1 << (hi - lo + 1)) - 1) << lo
        return bool(sums & mask)


def aggregate_reduct(rule: Rule, interp: frozenset) -> PositiveRule:
    """Closure form of a both-bounds rule whose body ``interp`` satisfies."""
    if rule.upper is None:
        raise ValueError("rule carries no upper bound")
    if not rule.body_satisfied(interp):
        raise ValueError("body not satisfied; the rule is omitted from the reduct")
    fixed = weight_sum(interp, rule.literals(Polarity.NEGATIVE, Polarity.DOUBLE_NEGATED))
    terms = tuple((wl.literal.atom, wl.weight) for wl in rule.literals(Polarity.POSITIVE))
    return PositiveRule(rule.head, terms, window=(rule.lower - fixed, rule.upper - fixed))


def reduct(program: Program, interp: frozenset) -> list[PositiveRule]:
    """Positive program relative to ``interp``; constraints are dropped and
    checked separately."""
    out = []
    for rule in program.rules:
        if rule.head is None:
            continue
        if rule.upper is not None:
            if rule.body_satisfied(interp):
                out.append(aggregate_reduct(rule, interp))
            continue
        nonpos = rule.literals(Polarity.NEGATIVE, Polarity.DOUBLE_NEGATED)
        fixed = weight_sum(interp, nonpos)
        if rule.origin in (Origin.NORMAL, Origin.CHOICE, Origin.FACT):
            # conjunctive reading: the rule is deleted outright unless every
            # negative (and double-negated) condition holds
            if any(not wl.literal.satisfied(interp) for wl in nonpos):
                continue
        terms = tuple((wl.literal.atom, wl.weight)
                      for wl in rule.literals(Polarity.POSITIVE))
        out.append(PositiveRule(rule.head, terms, lower=max(0, rule.lower - fixed)))
    return out


def _as_positive(rules: Iterable) -> list[PositiveRule]:
    converted = []
    for r in rules:
        if isinstance(r, PositiveRule):
            converted.append(r)
            continue
        if r.literals(Polarity.NEGATIVE, Polarity.DOUBLE_NEGATED) or r.head is None:
            raise ContractError(f"non-positive rule in positive program: {r}")
        if r.upper is not None:
            raise ContractError("both-bounds rules must be reduced to closure form first")
        terms = tuple((wl.literal.atom, wl.weight)
                      for wl in r.literals(Polarity.POSITIVE))
        converted.append(PositiveRule(r.head, terms, lower=r.lower))
    return converted


def tp_step(rules: Iterable, interp: frozenset) -> frozenset:
    """Heads of rules immediately applicable under ``interp``."""
    pos = _as_positive(rules)
    return frozenset(r.head for r in pos if r.body_satisfied(interp))


def least_model(rules: Iterable, input_atoms: frozenset = frozenset()):
    """Least fixed point seeded with the input atoms, plus the stage each
    atom first appeared at (inputs get stage 0)."""
    pos = _as_positive(rules)
    heads = {r.head for r in pos}
    clash = set(input_atoms) & heads
    if clash:
        raise ValueError(f"input atoms with defining rules: {sorted(clash)}")
    current = frozenset(input_atoms)
    ranks = {a: 0 for a in input_atoms}
    stage = 0
    while True:
        stage += 1
        new = tp_step(pos, current) - current
        if not new:
            break
        for a in new:
            ranks[a] = stage
        current |= new
    return current, ranks


def _interpretations(atoms: tuple[str, ...]):
    order = sorted(atoms)
    for k in range(len(order) + 1):
        for combo in itertools.combinations(order, k):
            yield frozenset(combo)


def _ranking_for(program: Program, model: frozenset, ranks: dict) -> LevelRanking:
    full = dict(ranks)
    for a in program.atom_names:
        if a not in model:
            full[a] = INFINITY
    return LevelRanking(full)


def _check_cap(program: Program, cap: int):
    if len(program.signature) > cap:
        raise ResourceError(
            f"signature has {len(program.signature)} atoms, cap is {cap}")


def stable_models(program: Program, cap: int = 20):
    """All stable models with their level rankings, sorted by atom set."""
    _check_cap(program, cap)
    inputs = program.input_atoms()
    found = []
    for candidate in _interpretations(program.atom_names):
        if not all(c.satisfied(candidate) for c in program.constraints()):
            continue
        lm, ranks = least_model(reduct(program, candidate), candidate & inputs)
        if lm == candidate:
            found.append((candidate, _ranking_for(program, candidate, ranks)))
    found.sort(key=lambda pair: tuple(sorted(pair[0])))
    return found


def supported_models(program: Program, cap: int = 20):
    """Fixed points of the one-step operator on the reduct; a superset of
    the stable models."""
    _check_cap(program, cap)
    inputs = program.input_atoms()
    found = []
    for candidate in _interpretations(program.atom_names):
        if not all(c.satisfied(candidate) for c in program.constraints()):
            continue
        step = tp_step(reduct(program, candidate), candidate) | (candidate & inputs)
        if step == candidate:
            found.append(candidate)
    found.sort(key=lambda m: tuple(sorted(m)))
    return found


@dataclass(frozen=True)
class LevelNumbering:
    atoms: dict
    rules: dict = field(default_factory=dict)  # program rule index -> level


def _stages(reduct_rules, input_atoms):
    stages = [frozenset(input_atoms)]
    while True:
        nxt = stages[-1] | tp_step(reduct_rules, stages[-1])
        if nxt == stages[-1]:
            return stages
        stages.append(nxt)


def level_numbering(program: Program, model: frozenset) -> LevelNumbering:
    """Levels of atoms and rules under a stable model.

    A supporting rule's level is one past the first stage at which its
    reduct body holds, which reduces to max over positive body levels
    plus one for plain conjunctive rules.
    """
    inputs = program.input_atoms()
    red = reduct(program, model)
    lm, ranks = least_model(red, model & inputs)
    if lm != model:
        raise ValueError("interpretation is not a stable model")
    atom_levels = _ranking_for(program, model, ranks).ranks

    stages = _stages(red, model & inputs)
    rule_levels = {}
    for idx, rule in enumerate(program.rules):
        if rule.head is None:
            continue
        if not rule.body_satisfied(model):
            rule_levels[idx] = INFINITY
            continue
        if rule.upper is not None:
            positive = aggregate_reduct(rule, model)
        else:
            fixed = weight_sum(model, rule.literals(Polarity.NEGATIVE,
                                                    Polarity.DOUBLE_NEGATED))
            terms = tuple((wl.literal.atom, wl.weight)
                          for wl in rule.literals(Polarity.POSITIVE))
            positive = PositiveRule(rule.head, terms, lower=max(0, rule.lower - fixed))
        level = INFINITY
        for j, stage in enumerate(stages):
            if positive.body_satisfied(stage):
                level = j + 1
                break
        rule_levels[idx] = level
    return LevelNumbering(atom_levels, rule_levels)


def module_ranking(program: Program, scope: frozenset, model: frozenset) -> dict:
    """Module-local derivation stages for the scope atoms of a stable model;
    these are the values the ranking variables must take."""
    from .depgraph import module_program

    sub = module_program(program, scope)
    restricted = model & frozenset(sub.atom_names)
    lm, ranks = least_model(reduct(sub, restricted),
                            restricted & sub.input_atoms())
    if lm != restricted:
        raise ValueError("model is not stable for the module")
    out = {}
    for atom in scope:
        out[atom] = ranks.get(atom, INFINITY) if atom in restricted else INFINITY
    return out
