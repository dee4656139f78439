"""Structured d-DNNF compilation with width-bounded quantifier elimination,
plus a parallel OBDD track."""

__version__ = "0.1.0"

from .formula import (CnfFormula, Clause, Graph, Literal, ParseError,
                      QbfFormula, parse_dimacs, parse_qdimacs, primal_graph)
from .treedec import (NiceTreeDecomposition, TreeDecomposition,
                      exact_decomposition, make_nice, min_fill_decomposition,
                      validate)
from .circuit import (CircuitError, StructuredCircuit, Vtree, VtreeBuilder,
                      check_determinism_bruteforce, check_structuredness,
                      circuit_to_text, condition, count_models,
                      dedup_and_gates, evaluate, garbage_collect,
                      parse_circuit, parse_vtree, remove_constant_leaves,
                      truth_table, vtree_to_text, width)
from .compiler import assign_clauses, build_clause_index, compile_cnf
from .project import (Shape, forall_project, join_shapes, negate,
                      normalize_root, project)
from .apply import VtreeMismatch, align_vtree, conjoin, disjoin
from .obdd import (Obdd, complete_obdd, obdd_count_models,
                   obdd_from_cnf_bruteforce, obdd_negate, obdd_project,
                   obdd_project_pair, obdd_to_circuit)
from .qbf import BudgetExceeded, SolveResult, exp_tower, solve, solve_via_obdd

__all__ = [
    "CnfFormula", "Clause", "Graph", "Literal", "ParseError", "QbfFormula",
    "parse_dimacs", "parse_qdimacs", "primal_graph",
    "NiceTreeDecomposition", "TreeDecomposition", "exact_decomposition",
    "make_nice", "min_fill_decomposition", "validate",
    "CircuitError", "StructuredCircuit", "Vtree", "VtreeBuilder",
    "check_determinism_bruteforce", "check_structuredness", "circuit_to_text",
    "condition", "count_models", "dedup_and_gates", "evaluate",
    "garbage_collect", "parse_circuit", "parse_vtree",
    "remove_constant_leaves", "truth_table", "vtree_to_text", "width",
    "assign_clauses", "build_clause_index", "compile_cnf",
    "Shape", "forall_project", "join_shapes", "negate", "normalize_root",
    "project",
    "VtreeMismatch", "align_vtree", "conjoin", "disjoin",
    "Obdd", "complete_obdd", "obdd_count_models", "obdd_from_cnf_bruteforce",
    "obdd_negate", "obdd_project", "obdd_project_pair", "obdd_to_circuit",
    "BudgetExceeded", "SolveResult", "exp_tower", "solve", "solve_via_obdd",
]
