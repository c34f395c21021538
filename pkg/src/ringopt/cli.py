"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import tempfile
from pathlib import Path
from typing import List, Optional

from . import __version__
from .analysis import LLVM_FIXTURE, compare_schemes, llvm_fixture_deg4
from .annotations import parse_expression, scan_source
from .codegen import emit_benchmark, transform_source
from .errors import InputError, InvalidDag, RingOptError
from .expr import INTEGER_RING, format_expression, math_exp_pragma, normalize
from .oracle import EXHAUSTIVE_CAP, Exhaustive, Sampled, verify_equivalence
from .schemes import SCHEMES, build, dag_from_json, dag_to_json

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _styled() -> bool:
    return sys.stdout.isatty() and not os.environ.get("RINGOPT_NO_COLOR")


def _entry(name, variable, ring, math, poly, sparse):
    return {
        "function": name,
        "variable": variable,
        "annotation": {"ring_prop": ring.pragma(), "math_exp": math_exp_pragma(math)},
        "polynomial": {
            "degree": poly.degree,
            "coefficients": [format_expression(t) for t in poly.terms],
        },
        "costs": [r.to_dict() for r in compare_schemes(poly, sparse)],
    }


def _document(source: str, entries: list) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "input": source,
        "functions": entries,
    }


def _dump(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def _table(doc: dict) -> None:
    bold = ("\033[1m", "\033[0m") if _styled() else ("", "")
    order = list(SCHEMES) + [LLVM_FIXTURE]
    for fn in doc["functions"]:
        label = fn["function"] or "expression"
        print(f"{label} ({fn['variable']}, degree {fn['polynomial']['degree']})")
        print(f"{bold[0]}  {'scheme':<12}{'ADDs':>6}{'MULs':>6}{'path':>6}{bold[1]}")
        rows = sorted(fn["costs"], key=lambda c: order.index(c["scheme"]))
        for c in rows:
            print(f"  {c['scheme']:<12}{c['adds']:>6}{c['muls']:>6}{c['critical_path']:>6}")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write(path: Optional[str], text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="")


def _functions(path: str):
    fns = scan_source(_read(path))
    out = []
    for fn in fns:
        out.append((fn, normalize(fn.math, fn.ring, fn.variable)))
    return out


def _mode(args):
    if args.samples is not None:
        return Sampled(args.samples, args.seed)
    if args.exhaustive or (1 << args.width) <= EXHAUSTIVE_CAP:
        return Exhaustive(args.draws, args.seed, full=args.full)
    return Sampled(10_000, args.seed)


def _plans(poly, scheme: str, sparse: bool):
    if scheme == LLVM_FIXTURE:
        return [llvm_fixture_deg4(poly)]
    names = list(SCHEMES) if scheme == "all" else [scheme]
    plans = [build(poly, s, sparse) for s in names]
    if scheme == "all" and poly.degree == 4:
        plans.append(llvm_fixture_deg4(poly))
    return plans


def _verify_entry(entry, plans, poly, args) -> bool:
    results = []
    for dag in plans:
        rep = verify_equivalence(dag, poly, args.width, _mode(args), args.workers)
        results.append(rep.to_dict())
        status = "pass" if rep.passed else "FAIL"
        print(f"{dag.scheme}: {status} ({rep.points_checked} points)", file=sys.stderr)
    entry["verification"] = results
    return all(r["passed"] for r in results)


# -- commands ---------------------------------------------------------------

def cmd_analyze(args) -> int:
    fns = _functions(args.file)
    if not fns:
        print(f"warning: no annotated functions in {args.file}", file=sys.stderr)
    entries = [_entry(fn.function_name, fn.variable, fn.ring, fn.math, poly, args.sparse) for fn, poly in fns]
    doc = _document(args.file, entries)
    _dump(doc) if args.json else _table(doc)
    return EXIT_OK


def cmd_transform(args) -> int:
    _write(args.output, transform_source(_read(args.file), args.scheme, args.sparse))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.plan:
        return _verify_plan_file(args)
    if not args.file:
        raise InputError("verify needs a source file or --plan")
    ok = True
    entries = []
    for fn, poly in _functions(args.file):
        entry = _entry(fn.function_name, fn.variable, fn.ring, fn.math, poly, args.sparse)
        ok &= _verify_entry(entry, _plans(poly, args.scheme, args.sparse), poly, args)
        entries.append(entry)
    _dump(_document(args.file, entries))
    return EXIT_OK if ok else EXIT_FAIL


def _verify_plan_file(args) -> int:
    try:
        doc = json.loads(_read(args.plan))
        variable = doc["variable"]
        math = parse_expression(doc["math_exp"], variable)
    except (ValueError, KeyError, TypeError) as err:
        raise InputError(f"unreadable plan file: {err}") from None
    try:
        dag = dag_from_json(doc, variable)
    except InvalidDag as err:
        raise InputError(str(err)) from None
    poly = normalize(math, INTEGER_RING, variable)
    entry = _entry(None, variable, INTEGER_RING, math, poly, args.sparse)
    ok = _verify_entry(entry, [dag], poly, args)
    _dump(_document(args.plan, [entry]))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_emit_bench(args) -> int:
    schemes = [s for s in args.schemes.split(",") if s]
    text = emit_benchmark(args.degree, schemes, args.iterations, args.width, args.repetitions, args.seed)
    if args.cc:
        return _compile_and_run(args.cc, text, args.output)
    _write(args.output, text)
    return EXIT_OK


def _compile_and_run(cc: str, text: str, output: Optional[str]) -> int:
    # Best effort convenience only; failures are reported, not interpreted.
    with tempfile.TemporaryDirectory() as tmp:
        src = Path(output) if output not in (None, "-") else Path(tmp, "bench.c")
        src.write_text(text, encoding="utf-8")
        exe = Path(tmp, "bench")
        build_ = subprocess.run([cc, "-O2", "-std=c99", "-o", str(exe), str(src)], capture_output=True, text=True)
        if build_.returncode != 0:
            sys.stderr.write(build_.stderr)
            return EXIT_INPUT
        run = subprocess.run([str(exe)], capture_output=True, text=True)
        sys.stdout.write(run.stdout)
        return EXIT_OK if run.returncode == 0 else EXIT_FAIL


def cmd_expr(args) -> int:
    math = parse_expression(args.expr, args.var)
    poly = normalize(math, INTEGER_RING, args.var)
    entry = _entry(None, args.var, INTEGER_RING, math, poly, args.sparse)
    ok = True
    if args.verify:
        ok = _verify_entry(entry, _plans(poly, args.scheme, args.sparse), poly, args)
    doc = _document("<expr>", [entry])
    _dump(doc) if args.json or args.verify else _table(doc)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_plan(args) -> int:
    math = parse_expression(args.expr, args.var)
    poly = normalize(math, INTEGER_RING, args.var)
    dag = _plans(poly, args.scheme, args.sparse)[0]
    doc = {"variable": args.var, "math_exp": format_expression(math)}
    doc.update(dag_to_json(dag))
    _write(args.output, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def _verify_flags(p):
    p.add_argument("--width", type=int, default=8, choices=(8, 16, 32, 64))
    group = p.add_mutually_exclusive_group()
    group.add_argument("--exhaustive", action="store_true", help="every variable value")
    group.add_argument("--samples", type=int, metavar="N", help="N random bindings")
    p.add_argument("--draws", type=int, default=32, help="coefficient draws for --exhaustive (default 32)")
    p.add_argument("--full", action="store_true", help="with --exhaustive, enumerate coefficients too")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument(
        "--scheme", default="all", choices=["all", *SCHEMES, LLVM_FIXTURE], help="plan(s) to check"
    )


def _output_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", action="store_true")
    g.add_argument("--table", action="store_true", help="default")
    p.add_argument("--sparse", action="store_true", help="skip zero coefficients")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringopt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ringopt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="operation counts and critical paths per scheme")
    p.add_argument("file")
    _output_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("transform", help="rewrite annotated function bodies")
    p.add_argument("file")
    p.add_argument("--scheme", default="horner", choices=list(SCHEMES))
    p.add_argument("--sparse", action="store_true")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("verify", help="check plans against the annotated polynomial")
    p.add_argument("file", nargs="?")
    p.add_argument("--plan", help="JSON plan file to check instead of a source file")
    p.add_argument("--sparse", action="store_true")
    _verify_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("emit-bench", help="write a C timing harness")
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--schemes", default=",".join(SCHEMES))
    p.add_argument("--iterations", type=int, default=128)
    p.add_argument("--repetitions", type=int, default=16)
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--cc", help="compile with this compiler and run (best effort)")
    p.set_defaults(func=cmd_emit_bench)

    p = sub.add_parser("expr", help="analyze a bare expression")
    p.add_argument("--expr", required=True)
    p.add_argument("--var", default="x")
    p.add_argument("--verify", action="store_true")
    _output_flags(p)
    _verify_flags(p)
    p.set_defaults(func=cmd_expr)

    p = sub.add_parser("plan", help="dump a plan as JSON (input for verify --plan)")
    p.add_argument("--expr", required=True)
    p.add_argument("--var", default="x")
    p.add_argument("--scheme", default="horner", choices=[*SCHEMES, LLVM_FIXTURE])
    p.add_argument("--sparse", action="store_true")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_plan)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    where = getattr(args, "file", None) or getattr(args, "plan", None) or "<expr>"
    try:
        return args.func(args)
    except InputError as err:
        print(f"ringopt: {where}:{err}" if err.line else f"ringopt: {where}: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, RingOptError, ValueError) as err:
        print(f"ringopt: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
