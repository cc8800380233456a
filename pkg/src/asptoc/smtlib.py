"""SMT-LIB2 serialization (QF_LIA) and solver-response parsing.

Propositional atoms become Bool constants under the fixed naming scheme
of :func:`asptoc.formulas.ref_name`; ranking variables become Int
constants with ``__z`` asserted to zero.  Pseudo-Boolean sums turn into
sums of conditional terms, so any linear-integer-arithmetic solver can
consume the output; difference atoms keep their subtraction shape for
solvers that specialize them.  Output is byte-deterministic for a given
formula set and option choice.
"""

from __future__ import annotations

import re
import subprocess
import warnings

from .dlcheck import DLModel
from .formulas import (
    And,
    Diff,
    FalseF,
    FormulaSet,
    Iff,
    Implies,
    LevelVar,
    Not,
    Or,
    PB,
    TrueF,
    Var,
    Z,
    ZPin,
    ref_name,
    var_name,
)


class EmissionError(Exception):
    pass


class SolverResponseError(Exception):
    def __init__(self, message: str, line: str = ""):
        super().__init__(f"{message}: {line!r}" if line else message)
        self.line = line


def _int(k: int) -> str:
    return str(k) if k >= 0 else f"(- {-k})"


def _sum_text(terms) -> str:
    parts = []
    for t in terms:
        lit = ref_name(t.atom)
        if t.negated:
            lit = f"(not {lit})"
        parts.append(f"(ite {lit} {t.coef} 0)")
    if not parts:
        return "0"
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def _pb_bounds(pb: PB, sum_text: str) -> list[str]:
    out = []
    if pb.lower is not None:
        out.append(f"(<= {_int(pb.lower)} {sum_text})")
    if pb.upper is not None:
        out.append(f"(<= {sum_text} {_int(pb.upper)})")
    return out


def to_sexpr(formula) -> str:
    if isinstance(formula, Var):
        return ref_name(formula.atom)
    if isinstance(formula, Not):
        return f"(not {to_sexpr(formula.sub)})"
    if isinstance(formula, And):
        return "(and " + " ".join(to_sexpr(s) for s in formula.subs) + ")"
    if isinstance(formula, Or):
        return "(or " + " ".join(to_sexpr(s) for s in formula.subs) + ")"
    if isinstance(formula, Implies):
        return f"(=> {to_sexpr(formula.left)} {to_sexpr(formula.right)})"
    if isinstance(formula, Iff):
        return f"(= {to_sexpr(formula.left)} {to_sexpr(formula.right)})"
    if isinstance(formula, TrueF):
        return "true"
    if isinstance(formula, FalseF):
        return "false"
    if isinstance(formula, Diff):
        return f"(<= (- {var_name(formula.lhs)} {var_name(formula.rhs)}) {_int(formula.k)})"
    if isinstance(formula, PB):
        checks = _pb_bounds(formula, _sum_text(formula.terms))
        return checks[0] if len(checks) == 1 else "(and " + " ".join(checks) + ")"
    if isinstance(formula, ZPin):
        return f"(= {var_name(Z)} 0)"
    raise EmissionError(f"cannot serialize {formula!r}")


def _needs_z(fs: FormulaSet) -> bool:
    if fs.level_bounds:
        return True
    return any(isinstance(f, ZPin) for _, f in fs.formulas)


def emit_smtlib(fs: FormulaSet, *, model: bool = False) -> str:
    """Serialize the formula set; ``model`` appends ``(get-model)``."""
    try:
        fs.validate()
    except Exception as exc:
        raise EmissionError(str(exc)) from exc
    lines = ["(set-logic QF_LIA)"]
    for name in sorted(fs.base_atoms):
        lines.append(f"(declare-const {name} Bool)")
    for name in sorted(ref_name(a) for a in fs.aux_atoms):
        lines.append(f"(declare-const {name} Bool)")
    if _needs_z(fs):
        lines.append(f"(declare-const {var_name(Z)} Int)")
    for owner in sorted(fs.level_bounds):
        lines.append(f"(declare-const {var_name(LevelVar(owner))} Int)")
    if _needs_z(fs) and not any(isinstance(f, ZPin) for _, f in fs.formulas):
        lines.append(f"(assert (= {var_name(Z)} 0))")
    for name, formula in fs.formulas:
        lines.append(f"; {name}")
        if isinstance(formula, PB) and formula.lower is not None \
                and formula.upper is not None:
            # a top-level two-bound sum splits into two assertions
            for check in _pb_bounds(formula, _sum_text(formula.terms)):
                lines.append(f"(assert {check})")
        else:
            lines.append(f"(assert {to_sexpr(formula)})")
    lines.append("(check-sat)")
    if model:
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"


def debug_text(fs: FormulaSet) -> str:
    """Golden-file format: declarations, then one named formula per line."""
    fs.validate()
    lines = []
    for name in sorted(fs.base_atoms):
        lines.append(f"(base {name})")
    for name in sorted(ref_name(a) for a in fs.aux_atoms):
        lines.append(f"(aux {name})")
    for owner in sorted(fs.level_bounds):
        lo, hi = fs.level_bounds[owner]
        lines.append(f"(level {var_name(LevelVar(owner))} {lo} {hi})")
    for name, formula in fs.formulas:
        lines.append(f"(formula {name} {to_sexpr(formula)})")
    return "\n".join(lines) + "\n"


_DEFINE_RE = re.compile(
    r"\(\s*define-fun\s+([A-Za-z_][A-Za-z0-9_]*)\s*\(\s*\)\s*"
    r"(Bool|Int)\s+(true|false|\d+|\(\s*-\s*\d+\s*\))\s*\)")


def read_solver_model(text: str, fs: FormulaSet | None = None):
    """Parse a solver response; ``None`` for unsat.

    Accepts ``(define-fun name () Bool true|false)`` and the Int analogue
    with plain or ``(- n)`` literals.  With a formula set given, symbols
    outside its declarations are dropped with a warning and omitted
    declared Booleans default to false.
    """
    stripped = text.strip()
    if not stripped:
        raise SolverResponseError("empty solver response")
    first = stripped.split(None, 1)[0]
    if first == "unsat":
        return None
    if first != "sat":
        raise SolverResponseError("response is neither sat nor unsat",
                                  stripped.splitlines()[0])

    known_bools = known_ints = None
    if fs is not None:
        known_bools = set(fs.base_atoms) | {ref_name(a) for a in fs.aux_atoms}
        known_ints = {var_name(LevelVar(o)) for o in fs.level_bounds}
        if _needs_z(fs):
            known_ints.add(var_name(Z))

    props: dict = {}
    ints: dict = {}
    for pos in [m.start() for m in re.finditer(r"\(\s*define-fun", stripped)]:
        m = _DEFINE_RE.match(stripped, pos)
        if not m:
            line = stripped[pos:].splitlines()[0]
            raise SolverResponseError("malformed model entry", line)
        name, sort, value = m.groups()
        if sort == "Bool":
            if known_bools is not None and name not in known_bools:
                warnings.warn(f"ignoring unknown model symbol {name}")
                continue
            props[name] = value == "true"
        else:
            if known_ints is not None and name not in known_ints:
                warnings.warn(f"ignoring unknown model symbol {name}")
                continue
            inner = value.strip("() \t\n")
            ints[name] = -int(inner[1:].strip()) if inner.startswith("-") else int(inner)
    if fs is not None:
        for name in sorted(known_bools):
            props.setdefault(name, False)
    return DLModel(tuple(sorted(props.items())), tuple(sorted(ints.items())))


class SolverInvocationError(Exception):
    pass


def run_solver(command: str, path: str) -> str:
    """Run an external solver command on a file; stdout is authoritative and
    the exit status is ignored."""
    import shlex

    argv = shlex.split(command) + [path]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise SolverInvocationError(f"cannot run {command!r}: {exc}") from exc
    return proc.stdout
