"""Random program generation and the translation correctness check.

The checker realizes the correctness statement end to end: the stable
models of the program (oracle side) must be in one-to-one correspondence
with the models of the translation (checker side), each translation model
must carry exactly the module-local derivation stages on its ranking
variables, and no propositional projection may appear with two different
rank assignments.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .depgraph import build_depgraph, is_recursive_scope, sccs
from .dlcheck import enumerate_dl_models
from .oracle import module_ranking, stable_models
from .parser import parse_program
from .program import INFINITY, Program
from .toc import toc_program

ATOM_POOL = "abcdefghijklmn"


def generate_source(rng: random.Random, max_atoms: int = 7,
                    max_rules: int = 10, want_recursive: bool = False) -> str:
    """One random ground program in source syntax, mixing all rule forms."""
    n = rng.randint(2, max_atoms)
    atoms = list(ATOM_POOL[:n])
    lines = []

    if want_recursive:
        cycle_len = rng.randint(1, min(3, n))
        cycle = rng.sample(atoms, cycle_len)
        for i, head in enumerate(cycle):
            nxt = cycle[(i + 1) % cycle_len]
            extra = ""
            if rng.random() < 0.4:
                other = rng.choice(atoms)
                extra = f", not {other}" if rng.random() < 0.5 else f", {other}"
            lines.append(f"{head} :- {nxt}{extra}.")
        # a kicker so the loop is not always unsupported
        if rng.random() < 0.7:
            entry = rng.choice(cycle)
            if rng.random() < 0.5:
                lines.append(f"{{{entry}}}.")
            else:
                lines.append(f"{entry} :- not {rng.choice(atoms)}.")

    def body_literals(k: int) -> list[str]:
        picked = rng.sample(atoms, min(k, len(atoms)))
        return [a if rng.random() < 0.7 else f"not {a}" for a in picked]

    budget = rng.randint(1, max(1, max_rules - len(lines)))
    for _ in range(budget):
        form = rng.choice(["fact", "normal", "normal", "choice", "choice",
                           "cardinality", "weight", "convex", "constraint"])
        head = rng.choice(atoms)
        if form == "fact":
            lines.append(f"{head}.")
        elif form == "normal":
            lits = body_literals(rng.randint(1, 3))
            lines.append(f"{head} :- {', '.join(lits)}.")
        elif form == "choice":
            if rng.random() < 0.4:
                lines.append(f"{{{head}}}.")
            else:
                lits = body_literals(rng.randint(1, 2))
                lines.append(f"{{{head}}} :- {', '.join(lits)}.")
        elif form == "constraint":
            lits = body_literals(rng.randint(1, 2))
            lines.append(f":- {', '.join(lits)}.")
        else:
            k = rng.randint(1, min(4, len(atoms)))
            lits = body_literals(k)
            if form == "cardinality":
                lower = rng.randint(1, k)
                lines.append(f"{head} :- {lower} <= {{ {', '.join(lits)} }}.")
            else:
                weights = [rng.randint(1, 4) for _ in lits]
                total = sum(weights)
                items = ", ".join(f"{l}={w}" for l, w in zip(lits, weights))
                lower = rng.randint(1, total)
                if form == "weight":
                    lines.append(f"{head} :- {lower} <= {{ {items} }}.")
                else:
                    upper = rng.randint(lower, total)
                    lines.append(f"{head} :- {lower} <= {{ {items} }} <= {upper}.")
    return "\n".join(lines) + "\n"


def generate_program(rng: random.Random, max_atoms: int = 7,
                     max_rules: int = 10, want_recursive: bool = False) -> Program:
    return parse_program(generate_source(rng, max_atoms, max_rules, want_recursive))


@dataclass
class CheckReport:
    ok: bool = True
    checks: list = field(default_factory=list)
    stable_count: int = 0
    model_count: int = 0

    def record(self, name: str, ok: bool, **detail):
        self.checks.append({"check": name, "status": "pass" if ok else "fail",
                            **detail})
        if not ok:
            self.ok = False


def ranked_scopes(program: Program, scope_mode: str = "scc") -> list[frozenset]:
    if scope_mode == "global":
        return [frozenset(program.heads())] if program.heads() else []
    partition = sccs(build_depgraph(program))
    return [c for c in partition.components if is_recursive_scope(program, c)]


def check_program(program: Program, *, scope_mode: str = "scc",
                  vub_form: bool = False, oracle_cap: int = 20,
                  formula_set=None) -> CheckReport:
    """Compare the oracle with the translation on one program.

    ``formula_set`` overrides the translation, which lets the harness prove
    it can catch a corrupted one.
    """
    report = CheckReport()
    stable = stable_models(program, cap=oracle_cap)
    fs = formula_set if formula_set is not None else toc_program(
        program, scope_mode=scope_mode, vub_form=vub_form)
    atom_count = len(fs.base_atoms) + len(fs.aux_atoms)
    models = enumerate_dl_models(fs, max_atoms=atom_count)
    report.stable_count = len(stable)
    report.model_count = len(models)

    signature = frozenset(program.atom_names)
    stable_sets = sorted(tuple(sorted(m)) for m, _ in stable)
    projections = sorted(tuple(sorted(m.true_atoms() & signature)) for m in models)
    report.record("bijection", stable_sets == projections,
                  stable=len(stable_sets), translated=len(projections))
    report.record("uniqueness", len(set(projections)) == len(projections))
    if not report.ok:
        return report

    scopes = ranked_scopes(program, scope_mode)
    for model in models:
        projection = model.true_atoms() & signature
        ints = model.int_map
        for scope in scopes:
            local = module_ranking(program, scope, projection)
            for atom in sorted(scope):
                expected = local[atom] if atom in projection else INFINITY
                if expected == INFINITY:
                    expected = len(scope) + 1
                actual = ints.get(f"__x_{atom}")
                if actual != expected:
                    report.record("ranks", False, atom=atom,
                                  model=sorted(projection),
                                  expected=expected, actual=actual)
                    return report
    report.record("ranks", True, scopes=len(scopes))
    return report


def fuzz_corpus(seed: int, count: int, max_atoms: int = 7,
                max_rules: int = 10):
    """Deterministic stream of (index, source, program); at least every
    other program embeds a recursive component."""
    rng = random.Random(seed)
    for i in range(count):
        src = generate_source(rng, max_atoms, max_rules, want_recursive=i % 2 == 0)
        yield i, src, parse_program(src)
