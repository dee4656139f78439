"""Quantified-formula solving: compile the matrix, then eliminate quantifier
blocks innermost-out while carrying the function and its complement side by
side.  Universal blocks go through the complement; each stage can blow the
width up by at most one exponential (the width tower), which is asserted.
A parallel engine does the same with OBDDs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import (StructuredCircuit, CircuitError, count_models,
                      dedup_and_gates, evaluate, width)
from .compiler import compile_cnf
from .formula import EXISTS, QbfFormula, primal_graph
from .obdd import (Obdd, obdd_count_models, obdd_from_cnf_bruteforce,
                   obdd_negate, obdd_project_pair)
from .project import forall_project, project
from .treedec import make_nice, min_fill_decomposition

DEFAULT_MAX_WIDTH = 1 << 20
DEFAULT_MAX_GATES = 10 ** 8


class BudgetExceeded(Exception):
    """A stage blew past the width or gate ceiling."""

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__("stage %r: %s" % (stage, message))


def exp_tower(levels: int, p: int) -> int:
    """Iterated exponentiation: zero levels is p itself, each level doubles
    the exponent stack.  Guarded against astronomically large results."""
    if levels < 0:
        raise ValueError("levels must be nonnegative")
    value = p
    for _ in range(levels):
        if value > 1 << 24:
            raise OverflowError("exp tower exceeds representable guard")
        value = 2 ** value
    return value


@dataclass
class SolveResult:
    circuit: object
    truth: bool | None
    model_count: int | None
    stats: dict = field(default_factory=dict)


def _check_budget(stage, w, gates, max_width, max_gates):
    if w > max_width:
        raise BudgetExceeded(stage, "width %d exceeds ceiling %d" % (w, max_width))
    if gates > max_gates:
        raise BudgetExceeded(stage, "%d gates exceed ceiling %d" % (gates, max_gates))


def _check_tower(stage, prev_w, new_w):
    bound = 2 ** max(prev_w, 1)
    if new_w > bound:
        raise CircuitError("stage %r width %d exceeds 2^%d" % (stage, new_w, prev_w))


def solve(q: QbfFormula, max_width: int = DEFAULT_MAX_WIDTH,
          max_gates: int = DEFAULT_MAX_GATES) -> SolveResult:
    """Structured d-DNNF engine.

    One decomposition over all matrix variables, one compilation, then one
    projection per block (existential directly, universal via the complement
    output).  Closed formulas yield a truth value; with free variables the
    model count over them."""
    graph = primal_graph(q.matrix)
    ntd = make_nice(min_fill_decomposition(graph))
    circ = compile_cnf(q.matrix, ntd)
    stage_widths = [width(circ)]
    stage_names = ["compile"]
    _check_budget("compile", stage_widths[-1], circ.num_gates,
                  max_width, max_gates)

    duals = project(circ, frozenset(), "main")
    duals = dedup_and_gates(duals)
    stage_widths.append(width(duals))
    stage_names.append("dualize")
    _check_budget("dualize", stage_widths[-1], duals.num_gates,
                  max_width, max_gates)

    for i in range(len(q.prefix) - 1, -1, -1):
        quant, block = q.prefix[i]
        stage = "block-%d-%s" % (i + 1, quant)
        prev_w = width(duals)
        try:
            if quant == EXISTS:
                duals = project(duals, block, out="exists")
            else:
                duals = forall_project(duals, block)
        except MemoryError:
            raise BudgetExceeded(stage, "out of memory") from None
        w = width(duals)
        _check_tower(stage, prev_w, w)
        _check_budget(stage, w, duals.num_gates, max_width, max_gates)
        stage_widths.append(w)
        stage_names.append(stage)

    stats = {"engine": "dnnf", "stage_widths": stage_widths,
             "stage_names": stage_names, "gates": duals.num_gates,
             "width": width(duals)}
    free = q.free_variables()
    if free:
        count = count_models(duals, "exists")
        return SolveResult(duals, None, count, stats)
    truth = evaluate(duals, {}, "exists")
    return SolveResult(duals, truth, None, stats)


def solve_via_obdd(q: QbfFormula, max_width: int = DEFAULT_MAX_WIDTH,
                   max_nodes: int = DEFAULT_MAX_GATES,
                   order=None) -> SolveResult:
    """OBDD engine: brute-force complete OBDD of the matrix in ascending
    variable order (or a given one), then powerset projection per block,
    universals through negation (which is free on OBDDs)."""
    if order is None:
        order = sorted(q.matrix.variables())
    if len(order) > 20:
        raise BudgetExceeded("obdd-build",
                             "brute-force OBDD builder capped at 20 variables")
    b = obdd_from_cnf_bruteforce(q.matrix, order)
    stage_widths = [b.width()]
    stage_names = ["build"]

    for i in range(len(q.prefix) - 1, -1, -1):
        quant, block = q.prefix[i]
        stage = "block-%d-%s" % (i + 1, quant)
        prev_w = b.width()
        if quant == EXISTS:
            b = obdd_project_pair(b, block)[0]
        else:
            b = obdd_project_pair(obdd_negate(b), block)[1]
        w = b.width()
        _check_tower(stage, prev_w, w)
        if w > max_width:
            raise BudgetExceeded(stage, "width %d exceeds ceiling %d"
                                 % (w, max_width))
        if b.num_nodes > max_nodes:
            raise BudgetExceeded(stage, "%d nodes exceed ceiling %d"
                                 % (b.num_nodes, max_nodes))
        stage_widths.append(w)
        stage_names.append(stage)

    stats = {"engine": "obdd", "stage_widths": stage_widths,
             "stage_names": stage_names, "gates": b.num_nodes,
             "width": b.width()}
    free = q.free_variables()
    if free:
        return SolveResult(b, None, obdd_count_models(b), stats)
    return SolveResult(b, b.evaluate({}), None, stats)
