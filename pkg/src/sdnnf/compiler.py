"""Compile CNF with a nice tree decomposition into complete structured d-DNNF.

Bottom-up dynamic programming: for every decomposition node t and every
assignment of its bag, one gate computing the residual of the clauses settled
below t.  Introduce nodes copy, forget nodes branch on the eliminated
variable, join nodes conjoin.  The vtree is the decomposition tree plus one
labeled leaf per forget node and one unlabeled leaf per introduce node; the
unlabeled leaves disappear in a final cleanup.  The width is at most
2^(largest bag).
"""

from __future__ import annotations

from .circuit import (StructuredCircuit, Vtree, VtreeBuilder, FALSE,
                      CircuitError, garbage_collect, remove_constant_leaves,
                      width)
from .formula import CnfFormula
from .treedec import (FORGET, INTRODUCE, JOIN, LEAF, NiceTreeDecomposition,
                      validate)


class _Cell:
    """Doubly linked occurrence cell: one (variable, clause) incidence."""

    __slots__ = ("clause", "var", "prev", "next")

    def __init__(self, clause, var):
        self.clause = clause
        self.var = var
        self.prev = None
        self.next = None


class ClauseIndex:
    """Occurrence lists with clause back-links.

    ``by_var[v]`` heads a doubly linked list of the not-yet-removed clauses
    containing v; ``by_clause[j]`` holds that clause's cells so removing all
    occurrences of clause j costs O(|C_j|).
    """

    def __init__(self, formula: CnfFormula):
        self.by_var: dict[int, _Cell] = {}
        self.by_clause: dict[int, list[_Cell]] = {}
        self.live: set[int] = set()
        for j, cl in enumerate(formula.clauses):
            if cl.tautology:
                continue  # always satisfied; never constrains anything
            self.live.add(j)
            cells = []
            for lit in cl.literals:
                cell = _Cell(j, lit.var)
                head = self.by_var.get(lit.var)
                cell.next = head
                if head is not None:
                    head.prev = cell
                self.by_var[lit.var] = cell
                cells.append(cell)
            self.by_clause[j] = cells

    def clauses_with(self, var: int) -> list[int]:
        out = []
        cell = self.by_var.get(var)
        while cell is not None:
            out.append(cell.clause)
            cell = cell.next
        return out

    def _unlink(self, cell: _Cell):
        if cell.prev is not None:
            cell.prev.next = cell.next
        elif self.by_var.get(cell.var) is cell:
            if cell.next is None:
                del self.by_var[cell.var]
            else:
                self.by_var[cell.var] = cell.next
        if cell.next is not None:
            cell.next.prev = cell.prev

    def remove_clause(self, j: int):
        for cell in self.by_clause.pop(j):
            self._unlink(cell)
        self.live.discard(j)

    def remove_variable(self, var: int) -> list[int]:
        """Remove every live clause containing the variable; returns them."""
        removed = []
        while var in self.by_var:
            j = self.by_var[var].clause
            self.remove_clause(j)
            removed.append(j)
        return removed

    def __len__(self):
        return len(self.live)


def build_clause_index(formula: CnfFormula) -> ClauseIndex:
    return ClauseIndex(formula)


def assign_clauses(formula: CnfFormula,
                   ntd: NiceTreeDecomposition) -> list[list[int]]:
    """Bucket each clause at the node closest to the root whose bag covers it.

    Walks the decomposition in post-order; below a forget-x node, the bucket
    collects every still-unassigned clause containing x.  Every non-tautology
    clause lands in exactly one bucket or the decomposition was invalid.
    """
    index = build_clause_index(formula)
    buckets: list[list[int]] = [[] for _ in range(len(ntd))]
    for t in ntd.postorder():
        p = ntd.parent[t]
        if p >= 0 and ntd.kinds[p] == FORGET:
            buckets[t] = index.remove_variable(ntd.kind_vars[p])
    if len(index):
        raise CircuitError(
            "%d clauses never assigned; the decomposition does not cover the "
            "formula" % len(index))
    return buckets


def _bag_positions(bag):
    ordered = sorted(bag)
    return ordered, {v: i for i, v in enumerate(ordered)}


def _clause_falsity_masks(formula, clause_ids, pos):
    """(mask, value) per clause: assignment tau falsifies the clause iff
    tau & mask == value."""
    out = []
    for j in clause_ids:
        mask = val = 0
        for lit in formula.clauses[j].literals:
            bit = 1 << pos[lit.var]
            mask |= bit
            if not lit.positive:
                val |= bit
        out.append((mask, val))
    return out


def compile_cnf(formula: CnfFormula, ntd: NiceTreeDecomposition,
                graph=None) -> StructuredCircuit:
    """Compile to a complete structured d-DNNF with output ``main``.

    ``ntd`` must be a valid nice decomposition of the primal graph covering
    all declared variables.  Width of the result is at most 2^(largest bag).
    """
    if graph is not None:
        ok = validate(ntd, graph)
        if not ok:
            raise CircuitError("invalid decomposition: %s" % ok.reason)

    if any(len(cl) == 0 and not cl.tautology for cl in formula.clauses):
        # an empty clause falsifies everything; no variable structure survives
        b = VtreeBuilder()
        vt = b.build(b.add_leaf(0))
        out = StructuredCircuit(vt, True)
        out.set_output("main", out.add_false(0))
        return out

    buckets = assign_clauses(formula, ntd)

    # vtree: decomposition tree + a labeled leaf per forget node and an
    # unlabeled leaf per introduce node; leaves of the ntd stay unlabeled
    vb = VtreeBuilder()
    vnode = [0] * len(ntd)      # ntd node -> vtree node
    const_leaf = [0] * len(ntd)  # nearest unlabeled leaf for constants
    var_leaf: dict[int, int] = {}
    order = ntd.postorder()
    for t in order:
        kind = ntd.kinds[t]
        if kind == LEAF:
            vnode[t] = vb.add_leaf(0)
            const_leaf[t] = vnode[t]
        elif kind == INTRODUCE:
            extra = vb.add_leaf(0)
            vnode[t] = vb.add_internal(vnode[ntd.children[t][0]], extra)
            const_leaf[t] = extra
        elif kind == FORGET:
            v = ntd.kind_vars[t]
            leaf = vb.add_leaf(v)
            var_leaf[v] = leaf
            vnode[t] = vb.add_internal(vnode[ntd.children[t][0]], leaf)
            const_leaf[t] = const_leaf[ntd.children[t][0]]
        else:
            c1, c2 = ntd.children[t]
            vnode[t] = vb.add_internal(vnode[c1], vnode[c2])
            const_leaf[t] = const_leaf[c1]
    vtree = vb.build(vnode[ntd.root])
    circ = StructuredCircuit(vtree, True)

    tables: list = [None] * len(ntd)  # per node: gate id per bag assignment
    is_zero: list = [None] * len(ntd)

    for t in order:
        kind = ntd.kinds[t]
        bag_vars, pos = _bag_positions(ntd.bags[t])
        size = 1 << len(bag_vars)
        falsity = _clause_falsity_masks(formula, buckets[t], pos)
        gates = [0] * size
        zeros = [False] * size
        node = vnode[t]

        if kind == LEAF:
            gates[0] = circ.add_true(node)
            tables[t], is_zero[t] = gates, zeros
            continue

        if kind == JOIN:
            c1, c2 = ntd.children[t]
            g1, z1 = tables[c1], is_zero[c1]
            g2, z2 = tables[c2], is_zero[c2]
            for tau in range(size):
                if z1[tau] or z2[tau] or any(
                        tau & m == v for m, v in falsity):
                    gates[tau] = circ.add_false(const_leaf[t])
                    zeros[tau] = True
                else:
                    a = circ.add_and((g1[tau], g2[tau]), node)
                    gates[tau] = circ.add_or((a,), node)
        elif kind == INTRODUCE:
            c1 = ntd.children[t][0]
            x = ntd.kind_vars[t]
            g1, z1 = tables[c1], is_zero[c1]
            child_vars, child_pos = _bag_positions(ntd.bags[c1])
            shift = [child_pos[v] for v in bag_vars if v != x]
            keep_bits = [1 << pos[v] for v in bag_vars if v != x]
            for tau in range(size):
                sub = 0
                for bit, cp in zip(keep_bits, shift):
                    if tau & bit:
                        sub |= 1 << cp
                if z1[sub] or any(tau & m == v for m, v in falsity):
                    gates[tau] = circ.add_false(const_leaf[t])
                    zeros[tau] = True
                else:
                    a = circ.add_and((g1[sub],), node)
                    gates[tau] = circ.add_or((a,), node)
        elif kind == FORGET:
            c1 = ntd.children[t][0]
            x = ntd.kind_vars[t]
            g1, z1 = tables[c1], is_zero[c1]
            child_vars, child_pos = _bag_positions(ntd.bags[c1])
            xbit = 1 << child_pos[x]
            shift = [child_pos[v] for v in bag_vars]
            leaf = var_leaf[x]
            lit_pos = circ.add_literal(x, leaf)
            lit_neg = circ.add_literal(-x, leaf)
            for tau in range(size):
                sub = 0
                for i, cp in enumerate(shift):
                    if tau & (1 << i):
                        sub |= 1 << cp
                if any(tau & m == v for m, v in falsity):
                    gates[tau] = circ.add_false(const_leaf[t])
                    zeros[tau] = True
                    continue
                branches = []
                if not z1[sub | xbit]:
                    branches.append(circ.add_and((lit_pos, g1[sub | xbit]), node))
                if not z1[sub]:
                    branches.append(circ.add_and((lit_neg, g1[sub]), node))
                if not branches:
                    gates[tau] = circ.add_false(const_leaf[t])
                    zeros[tau] = True
                else:
                    gates[tau] = circ.add_or(tuple(branches), node)
        tables[t], is_zero[t] = gates, zeros

    root_gate = tables[ntd.root][0]
    circ.set_output("main", root_gate)
    circ = garbage_collect(circ, ["main"])
    circ = remove_constant_leaves(circ)
    max_bag = ntd.max_bag()
    w = width(circ)
    if w > (1 << max_bag):
        raise CircuitError("compiled width %d exceeds 2^maxbag = %d"
                           % (w, 1 << max_bag))
    return circ
