"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 parse error, 3 budget
exceeded, 10 closed QBF true, 20 closed QBF false.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import circuit as circ_mod
from . import oracle
from .apply import align_vtree  # noqa: F401  (re-exported convenience)
from .circuit import (CircuitError, check_determinism_bruteforce,
                      check_structuredness, circuit_to_text, count_models,
                      parse_circuit, parse_vtree, vtree_to_text, width)
from .compiler import compile_cnf
from .formula import ParseError, parse_dimacs, parse_qdimacs, primal_graph
from .project import forall_project, negate, project
from .qbf import (DEFAULT_MAX_GATES, DEFAULT_MAX_WIDTH, BudgetExceeded,
                  solve, solve_via_obdd)
from .treedec import exact_decomposition, make_nice, min_fill_decomposition

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_BUDGET = 3
EXIT_TRUE = 10
EXIT_FALSE = 20


def _emit_stats(stats: dict, as_json: bool):
    if as_json:
        print(json.dumps(stats, sort_keys=True))
    else:
        for key in sorted(stats):
            print("%s %s" % (key, stats[key]))


def _write_artifacts(circuit, prefix: str):
    vtree_path = prefix + ".vtree"
    circuit_path = prefix + ".sdnnf"
    with open(vtree_path, "w") as fh:
        fh.write(vtree_to_text(circuit.vtree))
    with open(circuit_path, "w") as fh:
        fh.write(circuit_to_text(circuit))
    return vtree_path, circuit_path


def _load_circuit(circuit_path: str, vtree_path=None, deterministic=True):
    if vtree_path is None:
        if circuit_path.endswith(".sdnnf"):
            vtree_path = circuit_path[:-len(".sdnnf")] + ".vtree"
        else:
            vtree_path = circuit_path + ".vtree"
    with open(vtree_path) as fh:
        vtree = parse_vtree(fh.read())
    with open(circuit_path) as fh:
        return parse_circuit(fh.read(), vtree, deterministic=deterministic)


def _primary_output(circuit) -> str:
    for name in ("main", "exists"):
        if name in circuit.outputs:
            return name
    return sorted(circuit.outputs)[0]


def cmd_compile(args) -> int:
    start = time.perf_counter()
    try:
        with open(args.input) as fh:
            formula = parse_dimacs(fh.read())
    except (OSError, ParseError) as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE
    graph = primal_graph(formula)
    td = exact_decomposition(graph) if args.exact_td \
        else min_fill_decomposition(graph)
    ntd = make_nice(td)
    try:
        circuit = compile_cnf(formula, ntd)
    except CircuitError as exc:
        print("compile error: %s" % exc, file=sys.stderr)
        return EXIT_FAIL
    w = width(circuit)
    if w > args.max_width or circuit.num_gates > args.max_gates:
        print("budget exceeded at stage compile: width %d, gates %d"
              % (w, circuit.num_gates), file=sys.stderr)
        return EXIT_BUDGET
    _write_artifacts(circuit, args.out)
    stats = {"width": w, "gates": circuit.num_gates,
             "vtree_nodes": circuit.vtree.num_nodes,
             "maxbag": ntd.max_bag(), "stage_widths": [w],
             "wall_ms": round((time.perf_counter() - start) * 1000, 3)}
    _emit_stats(stats, args.stats_json)
    return EXIT_OK


def _parse_vars(spec: str) -> frozenset[int]:
    items = spec.replace(",", " ").split()
    return frozenset(int(x) for x in items)


def cmd_project(args) -> int:
    start = time.perf_counter()
    try:
        circuit = _load_circuit(args.circuit, args.vtree)
    except (OSError, CircuitError) as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE
    z = _parse_vars(args.vars) if args.vars else frozenset()
    out_name = _primary_output(circuit)
    w_in = width(circuit)
    try:
        if args.mode == "exists":
            result = project(circuit, z, out_name)
        elif args.mode == "forall":
            duals = project(circuit, frozenset(), out_name)
            result = forall_project(duals, z)
        else:
            result = negate(circuit, out_name)
    except CircuitError as exc:
        print("project error: %s" % exc, file=sys.stderr)
        return EXIT_FAIL
    w_out = width(result)
    if w_out > args.max_width or result.num_gates > args.max_gates:
        print("budget exceeded at stage project: width %d, gates %d"
              % (w_out, result.num_gates), file=sys.stderr)
        return EXIT_BUDGET
    _write_artifacts(result, args.out)
    stats = {"width": w_out, "gates": result.num_gates,
             "vtree_nodes": result.vtree.num_nodes, "maxbag": None,
             "stage_widths": [w_in, w_out],
             "wall_ms": round((time.perf_counter() - start) * 1000, 3)}
    _emit_stats(stats, args.stats_json)
    return EXIT_OK


def cmd_count(args) -> int:
    try:
        circuit = _load_circuit(args.circuit, args.vtree)
    except (OSError, CircuitError) as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE
    try:
        print(count_models(circuit, _primary_output(circuit)))
    except CircuitError as exc:
        print("count error: %s" % exc, file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_qbf(args) -> int:
    start = time.perf_counter()
    try:
        with open(args.input) as fh:
            q = parse_qdimacs(fh.read())
    except (OSError, ParseError) as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE
    engine = solve if args.engine == "dnnf" else solve_via_obdd
    try:
        result = engine(q, args.max_width, args.max_gates)
    except BudgetExceeded as exc:
        print("budget exceeded: %s" % exc, file=sys.stderr)
        return EXIT_BUDGET
    stats = {"width": result.stats["width"], "gates": result.stats["gates"],
             "vtree_nodes": getattr(result.circuit, "vtree", None) and
             result.circuit.vtree.num_nodes,
             "maxbag": None,
             "stage_widths": result.stats["stage_widths"],
             "wall_ms": round((time.perf_counter() - start) * 1000, 3)}
    if args.stage_stats:
        for name, w in zip(result.stats["stage_names"],
                           result.stats["stage_widths"]):
            print("stage %s width %d" % (name, w))
    if result.model_count is not None:
        print(result.model_count)
        if args.stats_json:
            _emit_stats(stats, True)
        return EXIT_OK
    print("TRUE" if result.truth else "FALSE")
    if args.stats_json:
        _emit_stats(stats, True)
    return EXIT_TRUE if result.truth else EXIT_FALSE


def cmd_verify(args) -> int:
    try:
        circuit = _load_circuit(args.circuit, args.vtree)
    except (OSError, CircuitError) as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE
    ok = check_structuredness(circuit)
    if not ok:
        print("structuredness: FAIL (%s)" % ok.reason)
        return EXIT_FAIL
    print("structuredness: ok")
    print("width %d" % width(circuit))
    print("gates %d" % circuit.num_gates)
    n_vars = len(circuit.vtree.labeled_vars())
    if n_vars <= 16:
        det = check_determinism_bruteforce(circuit)
        if not det:
            print("determinism: FAIL (%s)" % det.reason)
            return EXIT_FAIL
        print("determinism: ok")
    if args.dimacs:
        try:
            with open(args.dimacs) as fh:
                formula = parse_dimacs(fh.read())
        except (OSError, ParseError) as exc:
            print("parse error: %s" % exc, file=sys.stderr)
            return EXIT_PARSE
        if formula.num_vars > 16:
            print("equivalence: skipped (more than 16 variables)")
        else:
            got = circ_mod.truth_table(circuit, _primary_output(circuit),
                                       range(1, formula.num_vars + 1))
            want = oracle.cnf_truth_table(formula)
            if got != want:
                print("equivalence: FAIL")
                return EXIT_FAIL
            print("equivalence: ok")
    return EXIT_OK


def cmd_report(args) -> int:
    from . import report

    if args.qdimacs:
        try:
            with open(args.qdimacs) as fh:
                q = parse_qdimacs(fh.read())
        except (OSError, ParseError) as exc:
            print("parse error: %s" % exc, file=sys.stderr)
            return EXIT_PARSE
        engine = solve if args.engine == "dnnf" else solve_via_obdd
        try:
            result = engine(q)
        except BudgetExceeded as exc:
            print("budget exceeded: %s" % exc, file=sys.stderr)
            return EXIT_BUDGET
        csv_path, png_path = report.write_stage_widths(
            result.stats["stage_names"], result.stats["stage_widths"],
            args.out_dir)
    else:
        try:
            circuit = _load_circuit(args.circuit, args.vtree)
        except (OSError, CircuitError) as exc:
            print("parse error: %s" % exc, file=sys.stderr)
            return EXIT_PARSE
        csv_path, png_path = report.write_width_profile(circuit, args.out_dir)
    print(csv_path)
    print(png_path)
    return EXIT_OK


def _add_budget_flags(p):
    p.add_argument("--max-width", type=int, default=DEFAULT_MAX_WIDTH,
                   help="abort when a stage's width exceeds this")
    p.add_argument("--max-gates", type=int, default=DEFAULT_MAX_GATES,
                   help="abort when a stage's gate count exceeds this")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdnnf",
        description="Structured d-DNNF compilation, quantifier elimination, "
                    "and model counting")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="DIMACS CNF to vtree + circuit files")
    p.add_argument("input")
    p.add_argument("-o", "--out", required=True, help="output path prefix")
    p.add_argument("--exact-td", action="store_true",
                   help="exact treewidth (at most 20 vertices)")
    p.add_argument("--stats-json", action="store_true")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("project", help="quantify variables out of a circuit")
    p.add_argument("circuit")
    p.add_argument("--vtree", help="vtree file (default: sibling .vtree)")
    p.add_argument("--vars", default="", help="comma-separated variable ids")
    p.add_argument("--mode", choices=("exists", "forall", "negate"),
                   default="exists")
    p.add_argument("-o", "--out", required=True, help="output path prefix")
    p.add_argument("--stats-json", action="store_true")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("count", help="model count of a circuit file")
    p.add_argument("circuit")
    p.add_argument("--vtree")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("qbf", help="solve or count a QDIMACS formula")
    p.add_argument("input")
    p.add_argument("--engine", choices=("dnnf", "obdd"), default="dnnf")
    p.add_argument("--stage-stats", action="store_true",
                   help="print the per-stage width tower")
    p.add_argument("--stats-json", action="store_true")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_qbf)

    p = sub.add_parser("verify", help="audit a circuit file")
    p.add_argument("circuit")
    p.add_argument("dimacs", nargs="?",
                   help="optional CNF to check equivalence against")
    p.add_argument("--vtree")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="render width figures + CSV")
    p.add_argument("circuit", nargs="?")
    p.add_argument("--vtree")
    p.add_argument("--qdimacs", help="report the stage tower of a QBF run")
    p.add_argument("--engine", choices=("dnnf", "obdd"), default="dnnf")
    p.add_argument("-o", "--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report" and not args.circuit and not args.qdimacs:
        print("report needs a circuit file or --qdimacs", file=sys.stderr)
        return EXIT_PARSE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
