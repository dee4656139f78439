"""Independent brute-force semantics used by property and acceptance tests.

Everything here enumerates assignments or folds full truth tables directly
from the formula/gate data; none of it calls the evaluation code of the
circuit or obdd modules, so these functions stay valid as cross-checks.
Truth tables are Python integers: bit ``a`` is the value under assignment
``a``, where bit ``j`` of ``a`` gives the value of the j-th variable in
ascending variable order.
"""

from __future__ import annotations

from .formula import CnfFormula, QbfFormula, EXISTS

MAX_ORACLE_VARS = 24


def _check_size(n: int):
    if n > MAX_ORACLE_VARS:
        raise ValueError("oracle capped at %d variables, got %d" % (MAX_ORACLE_VARS, n))


def var_pattern(position: int, n: int) -> int:
    """Truth table (over n variables) of the variable at the given position."""
    block = 1 << position
    unit = ((1 << block) - 1) << block  # one 0-run then one 1-run
    period = 2 * block
    reps = 1 << (n - position - 1)
    # geometric series: unit repeated reps times with stride `period` bits
    return unit * (((1 << (period * reps)) - 1) // ((1 << period) - 1))


def cnf_truth_table(formula: CnfFormula, variables=None) -> int:
    """Truth table of the CNF over the given variables (default: all declared)."""
    if variables is None:
        variables = sorted(formula.variables())
    else:
        variables = sorted(variables)
    n = len(variables)
    _check_size(n)
    position = {v: j for j, v in enumerate(variables)}
    full = (1 << (1 << n)) - 1 if n else 1
    table = full
    for cl in formula.clauses:
        if cl.tautology:
            continue
        sat = 0
        for lit in cl.literals:
            p = var_pattern(position[lit.var], n)
            sat |= p if lit.positive else full ^ p
        table &= sat
        if not table:
            break
    return table


def count_table(table: int) -> int:
    return bin(table).count("1")


def exists_fold(table: int, n: int, position: int) -> int:
    """OR the two half-tables of one variable, duplicating back in place.

    The variable keeps its slot but becomes a don't-care; divide final counts
    by two per folded variable.
    """
    p = var_pattern(position, n)
    full = (1 << (1 << n)) - 1
    low = table & (full ^ p)
    high = (table & p) >> (1 << position)
    both = low | high
    return both | (both << (1 << position))


def forall_fold(table: int, n: int, position: int) -> int:
    """AND counterpart of :func:`exists_fold`."""
    p = var_pattern(position, n)
    full = (1 << (1 << n)) - 1
    low = table & (full ^ p)
    high = (table & p) >> (1 << position)
    both = low & high
    return both | (both << (1 << position))


def project_table(table: int, variables, z) -> int:
    """Existentially quantify the variables ``z`` out of a truth table.

    The result is still indexed over the full variable list, with the folded
    slots duplicated (don't-care).
    """
    variables = sorted(variables)
    n = len(variables)
    position = {v: j for j, v in enumerate(variables)}
    for v in z:
        table = exists_fold(table, n, position[v])
    return table


def _fold_prefix(q: QbfFormula) -> tuple[int, list[int], int]:
    """Fold all quantifier blocks innermost-out over the matrix table.

    Returns (table, sorted free variables, total variable count).  The table
    stays indexed over all matrix variables; quantified slots are don't-care.
    """
    variables = sorted(q.matrix.variables())
    n = len(variables)
    _check_size(n)
    position = {v: j for j, v in enumerate(variables)}
    table = cnf_truth_table(q.matrix, variables)
    for quant, xs in reversed(q.prefix):
        fold = exists_fold if quant == EXISTS else forall_fold
        for v in sorted(xs):
            table = fold(table, n, position[v])
    return table, sorted(q.free_variables()), n


def qbf_eval(q: QbfFormula, free_assignment: dict[int, bool]) -> bool:
    """Truth of the QBF under an assignment of its free variables."""
    table, free, n = _fold_prefix(q)
    variables = sorted(q.matrix.variables())
    position = {v: j for j, v in enumerate(variables)}
    index = 0
    for v in free:
        if v not in free_assignment:
            raise ValueError("free variable %d unassigned" % v)
        if free_assignment[v]:
            index |= 1 << position[v]
    return bool((table >> index) & 1)


def qbf_count(q: QbfFormula) -> int:
    """Number of free-variable assignments under which the QBF is true."""
    table, free, n = _fold_prefix(q)
    quantified = n - len(free)
    return count_table(table) >> quantified


def qbf_eval_recursive(q: QbfFormula, free_assignment: dict[int, bool]) -> bool:
    """Second, structurally different QBF oracle: flatten blocks into
    single-variable quantifiers and expand recursively."""
    flat: list[tuple[str, int]] = []
    for quant, xs in q.prefix:
        flat.extend((quant, v) for v in sorted(xs))

    clauses = [cl for cl in q.matrix.clauses if not cl.tautology]

    def matrix_value(assignment):
        for cl in clauses:
            if not any(assignment[l.var] == l.positive for l in cl.literals):
                return False
        return True

    assignment = dict(free_assignment)

    def rec(i):
        if i == len(flat):
            return matrix_value(assignment)
        quant, v = flat[i]
        results = []
        for b in (False, True):
            assignment[v] = b
            results.append(rec(i + 1))
        del assignment[v]
        return any(results) if quant == EXISTS else all(results)

    return rec(0)


def qbf_count_recursive(q: QbfFormula) -> int:
    free = sorted(q.free_variables())
    _check_size(len(free) + len(q.quantified_variables()))
    count = 0
    for idx in range(1 << len(free)):
        assignment = {v: bool((idx >> j) & 1) for j, v in enumerate(free)}
        if qbf_eval_recursive(q, assignment):
            count += 1
    return count


# -- circuit-facing oracles -------------------------------------------------
#
# These read circuit *data* (gate kinds, children, homes) but use their own
# evaluator rather than the circuit module's.

def _eval_gate(circuit, gate: int, assignment: dict[int, bool]) -> bool:
    from . import circuit as _c

    memo: dict[int, bool] = {}
    stack = [gate]
    while stack:
        g = stack.pop()
        if g in memo:
            continue
        kind = circuit.kinds[g]
        if kind == _c.LIT:
            lit = circuit.args[g]
            memo[g] = assignment[abs(lit)] == (lit > 0)
        elif kind == _c.TRUE:
            memo[g] = True
        elif kind == _c.FALSE:
            memo[g] = False
        else:
            children = circuit.args[g]
            missing = [ch for ch in children if ch not in memo]
            if missing:
                stack.append(g)
                stack.extend(missing)
            elif kind == _c.AND:
                memo[g] = all(memo[ch] for ch in children)
            else:
                memo[g] = any(memo[ch] for ch in children)
    return memo[gate]


def shape_oracle(circuit, node: int, tau: dict[int, bool], z):
    """Exact shape of ``tau`` at a vtree node for projection set ``z``, by
    enumerating all extensions over the forgotten variables below the node.

    ``tau`` must assign exactly the kept variables below ``node``.
    """
    from . import circuit as _c
    from .project import Shape

    below = circuit.vtree.variables_below(node)
    forgot = sorted(below & frozenset(z))
    kept = below - frozenset(z)
    if set(tau) != set(kept):
        raise ValueError("assignment must cover exactly kept(t)")
    if len(forgot) > 20:
        raise ValueError("too many forgotten variables for enumeration")

    if circuit.vtree.is_leaf(node):
        candidates = list(circuit.gates_at(node))
    else:
        candidates = [g for g in circuit.gates_at(node) if circuit.kinds[g] == _c.OR]

    satisfied = set()
    for idx in range(1 << len(forgot)):
        sigma = dict(tau)
        for j, v in enumerate(forgot):
            sigma[v] = bool((idx >> j) & 1)
        for g in candidates:
            if g not in satisfied and _eval_gate(circuit, g, sigma):
                satisfied.add(g)
        if len(satisfied) == len(candidates):
            break
    return Shape(node, frozenset(satisfied))
