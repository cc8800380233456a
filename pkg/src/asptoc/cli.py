"""Command-line interface.

Exit codes: 0 success, 1 parse error, 2 unsupported feature or size cap,
3 correctness mismatch, 4 solver invocation failure, 5 solver model parse
failure.  Reports are line-delimited JSON on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .dlcheck import DLModel
from .formulas import Base, Not, Var, conj
from .fuzz import check_program, fuzz_corpus
from .normtest import check_proposition
from .oracle import ResourceError
from .parser import ParseError, UnsupportedFeatureError, parse_program
from .program import Program
from .smtlib import (
    SolverInvocationError,
    SolverResponseError,
    debug_text,
    emit_smtlib,
    read_solver_model,
    run_solver,
)
from .toc import toc_program

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_UNSUPPORTED = 2
EXIT_MISMATCH = 3
EXIT_SOLVER = 4
EXIT_MODEL = 5


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _parse(path: str) -> Program:
    return parse_program(_read_input(path))


def _emit(args, program: Program):
    fs = toc_program(program,
                     scope_mode="global" if args.global_scope else "scc",
                     strong=not args.no_strong,
                     vub_form=args.vub_form)
    if args.format == "debug":
        return debug_text(fs), fs
    return emit_smtlib(fs, model=True), fs


def cmd_translate(args) -> int:
    program = _parse(args.input)
    text, _ = _emit(args, program)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args) -> int:
    program = _parse(args.input)
    if len(program.signature) > args.max_atoms:
        print(json.dumps({"check": "size", "status": "fail",
                          "atoms": len(program.signature),
                          "cap": args.max_atoms}))
        return EXIT_UNSUPPORTED
    report = check_program(program,
                           scope_mode="global" if args.global_scope else "scc",
                           vub_form=args.vub_form)
    for entry in report.checks:
        print(json.dumps(entry))
    print(json.dumps({"check": "summary",
                      "status": "pass" if report.ok else "fail",
                      "stable_models": report.stable_count,
                      "translation_models": report.model_count}))
    return EXIT_OK if report.ok else EXIT_MISMATCH


def _random_weight_rule(rng):
    import random

    from .parser import parse_program as pp

    n = rng.randint(1, 5)
    atoms = [f"b{i}" for i in range(1, n + 1)]
    weights = [rng.randint(1, 8) for _ in atoms]
    bound = rng.randint(1, 20)
    items = ", ".join(f"{a}={w}" for a, w in zip(atoms, weights))
    prog = pp(f"a :- {bound} <= {{ {items} }}.")
    return prog.rules[0]


def cmd_fuzz(args) -> int:
    import random

    failures = 0
    for index, source, program in fuzz_corpus(args.seed, args.count,
                                              args.max_atoms, args.max_rules):
        report = check_program(program)
        if not report.ok:
            print(json.dumps({"program": index, "status": "fail",
                              "checks": report.checks}))
            repro = f"fuzz-counterexample-{args.seed}-{index}.lp"
            with open(repro, "w", encoding="utf-8") as handle:
                handle.write(source)
            print(json.dumps({"counterexample": repro, "source": source}))
            return EXIT_MISMATCH
    print(json.dumps({"status": "pass", "programs": args.count,
                      "seed": args.seed}))

    if args.props:
        rng = random.Random(args.seed)
        for i in range(args.props):
            rule = _random_weight_rule(rng)
            verdict = check_proposition(rule, 3)
            if not verdict.passed:
                print(json.dumps({"proposition": i, "status": "fail",
                                  "counterexample": verdict.counterexample}))
                return EXIT_MISMATCH
        print(json.dumps({"status": "pass", "propositions": args.props}))
    return EXIT_OK


def _block_model(fs, model: DLModel):
    literals = []
    for name in fs.base_atoms:
        var = Var(Base(name))
        literals.append(var if model.prop_map.get(name) else Not(var))
    fs.add(f"block:{len(fs.formulas)}", Not(conj(*literals)))


def cmd_solve(args) -> int:
    import tempfile

    program = _parse(args.input)
    solver = args.solver or os.environ.get("TOC_SOLVER")
    if not solver:
        print("no solver configured (use --solver or TOC_SOLVER)", file=sys.stderr)
        return EXIT_SOLVER
    fs = toc_program(program,
                     scope_mode="global" if args.global_scope else "scc")
    found = 0
    while True:
        text = emit_smtlib(fs, model=True)
        with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False) as tmp:
            tmp.write(text)
            path = tmp.name
        try:
            response = run_solver(solver, path)
        except SolverInvocationError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_SOLVER
        finally:
            os.unlink(path)
        try:
            model = read_solver_model(response, fs)
        except SolverResponseError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_MODEL
        if model is None:
            if found == 0:
                print("UNSATISFIABLE")
            return EXIT_OK
        atoms = sorted(a for a in model.true_atoms()
                       if a in set(program.atom_names))
        ranks = {name[len("__x_"):]: value for name, value in model.ints
                 if name.startswith("__x_")}
        print(json.dumps({"model": atoms, "ranks": ranks}))
        found += 1
        if not args.all or found >= args.limit:
            return EXIT_OK
        _block_model(fs, model)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asptoc",
        description="translate ground answer-set programs into tight ordered "
                    "completion formulas and check or solve them")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", help="emit the translation")
    p.add_argument("input", help="program file (.lp) or - for stdin")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=["smtlib", "debug"], default="smtlib")
    p.add_argument("--no-strong", action="store_true",
                   help="drop the strong ranking constraints")
    p.add_argument("--vub-form", action="store_true",
                   help="encode upper bounds with explicit violation atoms")
    p.add_argument("--global-scope", action="store_true",
                   help="rank all defined atoms in one scope")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("check", help="verify the translation against the oracle")
    p.add_argument("input")
    p.add_argument("--max-atoms", type=int, default=14)
    p.add_argument("--vub-form", action="store_true")
    p.add_argument("--global-scope", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fuzz", help="random differential testing")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--max-atoms", type=int, default=7)
    p.add_argument("--max-rules", type=int, default=10)
    p.add_argument("--props", type=int, default=0, metavar="N",
                   help="additionally check N random aggregation propositions")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("solve", help="solve through an external SMT solver")
    p.add_argument("input")
    p.add_argument("--solver", help="solver command (default $TOC_SOLVER)")
    p.add_argument("--all", action="store_true",
                   help="enumerate models with blocking constraints")
    p.add_argument("--limit", type=int, default=64,
                   help="model cap for --all")
    p.add_argument("--global-scope", action="store_true")
    p.set_defaults(func=cmd_solve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnsupportedFeatureError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
