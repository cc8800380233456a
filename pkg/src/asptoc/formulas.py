"""Target formula language.

Formulas mix propositional structure over base and auxiliary atoms with
two theory atoms: difference atoms ``x - y <= k`` over ranking variables
and pseudo-Boolean atoms bounding a weighted sum of literals.  All
integer comparisons are kept in the ``<=`` form, and sums carry only
positive coefficients: a subtracted literal is rewritten as its classical
negation with the bound shifted accordingly, so the emitted constants
stay aligned with the adjusted rule bounds.

Single-variable range constraints are expressed against the distinguished
variable ``z``, which every complete translation pins to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union


# ---------------------------------------------------------------------------
# atom and variable references

@dataclass(frozen=True, order=True)
class Base:
    name: str


@dataclass(frozen=True, order=True)
class Aux:
    """Generated atom: app/int/ext/vub carry a rule ordinal, dep/gap a body
    atom; ``ns`` namespaces harness-only copies."""

    kind: str
    head: str
    arg: Union[str, int]
    ns: str = ""

    KINDS = ("app", "dep", "gap", "int", "ext", "vub")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown aux kind {self.kind!r}")


AtomRef = Union[Base, Aux]


@dataclass(frozen=True, order=True)
class LevelVar:
    owner: str


class ZVar:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Z"


Z = ZVar()
IntRef = Union[LevelVar, ZVar]


def ref_name(ref: AtomRef) -> str:
    """Symbol naming contract shared by the emitter, the checker and the
    model reader."""
    if isinstance(ref, Base):
        return ref.name
    tag = f"{ref.ns}_{ref.kind}" if ref.ns else ref.kind
    if ref.kind in ("dep", "gap"):
        return f"__{tag}_{ref.head}__{ref.arg}"
    return f"__{tag}_{ref.head}_{ref.arg}"


def var_name(var: IntRef) -> str:
    if isinstance(var, ZVar):
        return "__z"
    return f"__x_{var.owner}"


# ---------------------------------------------------------------------------
# formulas

@dataclass(frozen=True)
class Var:
    atom: AtomRef


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    subs: tuple


@dataclass(frozen=True)
class Or:
    subs: tuple


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class FalseF:
    pass


@dataclass(frozen=True)
class Diff:
    """lhs - rhs <= k; a self difference is legal and constant."""

    lhs: IntRef
    rhs: IntRef
    k: int


@dataclass(frozen=True)
class PBTerm:
    coef: int
    atom: AtomRef
    negated: bool = False

    def __post_init__(self):
        if self.coef <= 0:
            raise ValueError("pseudo-Boolean coefficients must be positive")


@dataclass(frozen=True)
class PB:
    """lower <= sum of satisfied terms <= upper (either bound optional)."""

    terms: tuple
    lower: Optional[int] = None
    upper: Optional[int] = None

    def __post_init__(self):
        if self.lower is None and self.upper is None:
            raise ValueError("pseudo-Boolean atom needs at least one bound")


@dataclass(frozen=True)
class ZPin:
    """z = 0; the anchor making ranking values absolute."""


Formula = Union[Var, Not, And, Or, Implies, Iff, TrueF, FalseF, Diff, PB, ZPin]


def make_pb(terms: Iterable[PBTerm], lower: Optional[int] = None,
            upper: Optional[int] = None) -> Formula:
    """PB constructor with empty-sum constant folding."""
    terms = tuple(terms)
    if not terms:
        ok = (lower is None or lower <= 0) and (upper is None or upper >= 0)
        return TrueF() if ok else FalseF()
    return PB(terms, lower, upper)


def conj(*subs: Formula) -> Formula:
    flat = [s for s in subs if not isinstance(s, TrueF)]
    if any(isinstance(s, FalseF) for s in flat):
        return FalseF()
    if not flat:
        return TrueF()
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*subs: Formula) -> Formula:
    flat = [s for s in subs if not isinstance(s, FalseF)]
    if any(isinstance(s, TrueF) for s in flat):
        return TrueF()
    if not flat:
        return FalseF()
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


# ---------------------------------------------------------------------------
# ranking scaffolding

def mk_bounds(atom: str, scope_size: int):
    """Range formulas for one ranking variable: positive, at most
    ``scope_size + 1``, and pinned to the maximum when the atom is false."""
    x = LevelVar(atom)
    cap = scope_size + 1
    return [
        (f"bounds:{atom}:min", Diff(Z, x, -1)),
        (f"bounds:{atom}:max", Diff(x, Z, cap)),
        (f"bounds:{atom}:false", Implies(Not(Var(Base(atom))), Diff(Z, x, -cap))),
    ]


def mk_dep_gap(head: str, body_atom: str):
    """dep: the body atom holds and was derived strictly before the head;
    gap: it was derived at least two stages before."""
    xa, xb = LevelVar(head), LevelVar(body_atom)
    dep = Var(Aux("dep", head, body_atom))
    gap = Var(Aux("gap", head, body_atom))
    return [
        (f"dep:{head}:{body_atom}",
         Iff(dep, conj(Var(Base(body_atom)), Diff(xb, xa, -1)))),
        (f"gap:{head}:{body_atom}",
         Iff(gap, conj(Var(Base(body_atom)), Diff(xb, xa, -2)))),
    ]


# ---------------------------------------------------------------------------
# formula sets

class ValidationError(Exception):
    pass


def _collect(formula: Formula, atoms: set, ints: set):
    if isinstance(formula, Var):
        atoms.add(formula.atom)
    elif isinstance(formula, Not):
        _collect(formula.sub, atoms, ints)
    elif isinstance(formula, (And, Or)):
        for s in formula.subs:
            _collect(s, atoms, ints)
    elif isinstance(formula, (Implies, Iff)):
        _collect(formula.left, atoms, ints)
        _collect(formula.right, atoms, ints)
    elif isinstance(formula, Diff):
        ints.add(formula.lhs)
        ints.add(formula.rhs)
    elif isinstance(formula, PB):
        for t in formula.terms:
            atoms.add(t.atom)
    elif isinstance(formula, ZPin):
        ints.add(Z)


@dataclass
class FormulaSet:
    formulas: list = field(default_factory=list)  # (name, Formula) pairs
    base_atoms: list = field(default_factory=list)
    aux_atoms: list = field(default_factory=list)
    level_bounds: dict = field(default_factory=dict)  # owner -> (lo, hi)

    def declare_base(self, *names: str):
        for n in names:
            if n not in self.base_atoms:
                self.base_atoms.append(n)

    def declare_aux(self, *refs: Aux):
        for r in refs:
            if r not in self.aux_atoms:
                self.aux_atoms.append(r)

    def declare_level(self, owner: str, lo: int, hi: int):
        self.level_bounds[owner] = (lo, hi)

    def add(self, name: str, formula: Formula):
        self.formulas.append((name, formula))

    def extend(self, pairs):
        self.formulas.extend(pairs)

    def merge(self, other: "FormulaSet"):
        self.extend(other.formulas)
        self.declare_base(*other.base_atoms)
        self.declare_aux(*other.aux_atoms)
        self.level_bounds.update(other.level_bounds)

    def atom_refs(self) -> list:
        return [Base(n) for n in self.base_atoms] + list(self.aux_atoms)

    def validate(self):
        declared_atoms = set(self.atom_refs())
        declared_ints = {LevelVar(o) for o in self.level_bounds} | {Z}
        atoms: set = set()
        ints: set = set()
        for _, f in self.formulas:
            _collect(f, atoms, ints)
        bad_atoms = atoms - declared_atoms
        if bad_atoms:
            raise ValidationError(f"undeclared atoms: {sorted(map(ref_name, bad_atoms))}")
        bad_ints = ints - declared_ints
        if bad_ints:
            raise ValidationError(f"undeclared variables: {sorted(map(var_name, bad_ints))}")

    def without(self, prefix: str) -> "FormulaSet":
        """Copy dropping all formulas whose name starts with ``prefix``."""
        out = FormulaSet(base_atoms=list(self.base_atoms),
                         aux_atoms=list(self.aux_atoms),
                         level_bounds=dict(self.level_bounds))
        out.formulas = [(n, f) for (n, f) in self.formulas
                        if not n.startswith(prefix)]
        return out


# ---------------------------------------------------------------------------
# reference evaluator (kept naive on purpose; the checker cross-validates
# its compiled evaluation against this one)

def eval_formula(formula: Formula, bools: dict, ints: dict) -> bool:
    if isinstance(formula, Var):
        return bools[ref_name(formula.atom)]
    if isinstance(formula, Not):
        return not eval_formula(formula.sub, bools, ints)
    if isinstance(formula, And):
        return all(eval_formula(s, bools, ints) for s in formula.subs)
    if isinstance(formula, Or):
        return any(eval_formula(s, bools, ints) for s in formula.subs)
    if isinstance(formula, Implies):
        return (not eval_formula(formula.left, bools, ints)
                or eval_formula(formula.right, bools, ints))
    if isinstance(formula, Iff):
        return eval_formula(formula.left, bools, ints) == eval_formula(formula.right, bools, ints)
    if isinstance(formula, TrueF):
        return True
    if isinstance(formula, FalseF):
        return False
    if isinstance(formula, Diff):
        return ints[var_name(formula.lhs)] - ints[var_name(formula.rhs)] <= formula.k
    if isinstance(formula, PB):
        total = 0
        for t in formula.terms:
            value = bools[ref_name(t.atom)]
            if t.negated:
                value = not value
            if value:
                total += t.coef
        if formula.lower is not None and total < formula.lower:
            return False
        return formula.upper is None or total <= formula.upper
    if isinstance(formula, ZPin):
        return ints[var_name(Z)] == 0
    raise TypeError(f"not a formula: {formula!r}")
