"""Command line front end.

    genconn holonomy  --graph G --connection C --path LITERAL
    genconn suite     --suite NAME [--config FILE] [--seed S]
    genconn integrate --graph G --descriptor D --integrand NAME [--path LITERAL ...]

Exit status: 0 success, 1 property failure, 2 usage or input error.  With
``--out DIR`` the report and a run manifest are written as JSON; identical
inputs, seed and worker count give byte-identical files.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction

from . import __version__
from . import group as grp
from .connection import holonomy, load_connection
from .errors import GenconnError
from .groupoid import format_path, load_graph, parse_path
from .measure import INTEGRANDS, integrate, make_integrand
from .suites import SUITES, SuiteConfig, load_config, run_suite

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _digest(path: str) -> str:
    with open(path, "rb") as fh:
        return "sha256:" + hashlib.sha256(fh.read()).hexdigest()


def format_number(value) -> str:
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return repr(float(value))


def _emit(args, command: str, report: dict, inputs: list[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if not args.out:
        return
    os.makedirs(args.out, exist_ok=True)
    report_name = f"{command}-report.json"
    with open(os.path.join(args.out, report_name), "w", encoding="utf-8") as fh:
        fh.write(text)
    manifest = {
        "command": command,
        "inputs": {p: _digest(p) for p in inputs},
        "seed": getattr(args, "seed", None),
        "workers": getattr(args, "workers", None),
        "tool_version": __version__,
        "outputs": [report_name],
    }
    with open(os.path.join(args.out, "manifest.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_holonomy(args) -> int:
    graph = load_graph(args.graph)
    conn = load_connection(args.connection, graph)
    p = parse_path(graph, args.path)
    h = holonomy(conn, p)
    report = {
        "descriptor": str(conn.descriptor),
        "path": format_path(p),
        "source": p.source,
        "target": p.target,
        "holonomy": grp.format_element(h),
    }
    _emit(args, "holonomy", report, [args.graph, args.connection])
    return EXIT_OK


def cmd_suite(args) -> int:
    cfg = load_config(args.config) if args.config else SuiteConfig()
    graph, results = run_suite(args.suite, cfg, args.seed)
    passed = all(r.passed for r in results)
    report = {
        "suite": args.suite,
        "graph": graph.name,
        "passed": passed,
        "properties": [
            {
                "name": r.name,
                "samples": r.samples,
                "max_deviation": r.max_deviation,
                "threshold": r.threshold,
                "passed": r.passed,
            }
            for r in results
        ],
    }
    inputs = [args.config] if args.config else []
    _emit(args, "suite", report, inputs)
    return EXIT_OK if passed else EXIT_FAILURE


def cmd_integrate(args) -> int:
    graph = load_graph(args.graph)
    d = grp.parse_descriptor(args.descriptor)
    paths = [parse_path(graph, text) for text in args.path or []]
    value = Fraction(args.value) if args.value is not None else 1
    f = make_integrand(args.integrand, graph, d, paths, value)
    result = integrate(f, args.mode, args.samples, args.seed, args.workers)
    report = {
        "integrand": args.integrand,
        "paths": [format_path(p) for p in paths],
        "descriptor": str(d),
        "value": format_number(result.value),
        "mode": result.mode,
        "samples": result.samples,
        "std_error": format_number(result.std_error),
        "seed": args.seed,
    }
    _emit(args, "integrate", report, [args.graph])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genconn", description="Generalized connections on graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("holonomy", help="evaluate a connection on a path")
    p.add_argument("--graph", required=True)
    p.add_argument("--connection", required=True)
    p.add_argument("--path", required=True, help="e.g. e1,e2^-1 or @x")
    p.add_argument("--out")
    p.set_defaults(func=cmd_holonomy)

    p = sub.add_parser("suite", help="run a property suite")
    p.add_argument("--suite", required=True, choices=SUITES)
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("integrate", help="integrate a built-in cylindrical function")
    p.add_argument("--graph", required=True)
    p.add_argument("--descriptor", required=True)
    p.add_argument("--integrand", required=True, choices=INTEGRANDS)
    p.add_argument("--path", action="append", help="closed path literal; repeat for character-product")
    p.add_argument("--value", help="constant integrand value (integer, decimal or fraction)")
    p.add_argument("--mode", choices=("exact", "mc"))
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_integrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GenconnError, ValueError) as exc:
        print(f"genconn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
