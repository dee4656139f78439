"""Complete OBDDs: construction, completion, powerset projection, negation,
and conversion to structured d-DNNF.

Projection is the automaton powerset construction: a node of the projected
OBDD is a *set* of original nodes on a kept layer, namely those reachable
under some assignment of the dropped variables.  Only realized subsets are
materialized, so the 2^w width bound is a cap, not a cost.
"""

from __future__ import annotations

from .circuit import StructuredCircuit, right_comb_vtree, width as circuit_width
from .formula import CnfFormula

SINK0 = 0
SINK1 = 1


class ObddError(Exception):
    pass


class Obdd:
    """Layered decision diagram.  Nodes are (var, lo, hi) triples with ids
    from 2; ids 0 and 1 are the sinks.  ``order`` fixes the variable order;
    ``complete`` claims every root-sink path tests every variable once."""

    def __init__(self, order, complete=False):
        self.order = tuple(order)
        self.level = {v: i for i, v in enumerate(self.order)}
        self.var: list = [None, None]
        self.lo: list = [None, None]
        self.hi: list = [None, None]
        self.source = SINK0
        self.complete = complete

    def add_node(self, var: int, lo: int, hi: int) -> int:
        if var not in self.level:
            raise ObddError("variable %d not in the order" % var)
        nid = len(self.var)
        self.var.append(var)
        self.lo.append(lo)
        self.hi.append(hi)
        return nid

    @property
    def num_nodes(self) -> int:
        return len(self.var)

    def is_sink(self, n: int) -> bool:
        return n < 2

    def layers(self) -> dict[int, list[int]]:
        by_var: dict[int, list[int]] = {v: [] for v in self.order}
        for n in range(2, self.num_nodes):
            by_var[self.var[n]].append(n)
        return by_var

    def width(self) -> int:
        """Maximum layer size; defined for complete OBDDs."""
        if not self.complete:
            raise ObddError("width is defined on complete OBDDs")
        reach = self.reachable()
        sizes = [0]
        for v, layer in self.layers().items():
            sizes.append(sum(1 for n in layer if n in reach))
        return max(sizes)

    def reachable(self) -> set[int]:
        seen = {self.source}
        stack = [self.source]
        while stack:
            n = stack.pop()
            if self.is_sink(n):
                continue
            for m in (self.lo[n], self.hi[n]):
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        return seen

    def evaluate(self, assignment: dict[int, bool]) -> bool:
        n = self.source
        while not self.is_sink(n):
            n = self.hi[n] if assignment[self.var[n]] else self.lo[n]
        return n == SINK1

    def truth_table(self, variables=None) -> int:
        """Big-int truth table over sorted variables (see circuit module)."""
        if variables is None:
            variables = sorted(self.order)
        variables = sorted(variables)
        n = len(variables)
        out = 0
        for a in range(1 << n):
            assignment = {v: bool((a >> j) & 1) for j, v in enumerate(variables)}
            if self.evaluate(assignment):
                out |= 1 << a
        return out

    def check_ordered(self) -> bool:
        """Variables appear in order on every path; complete diagrams also
        test every variable exactly once."""
        for n in range(2, self.num_nodes):
            lvl = self.level[self.var[n]]
            for m in (self.lo[n], self.hi[n]):
                if self.is_sink(m):
                    if self.complete and lvl != len(self.order) - 1:
                        return False
                elif self.level[self.var[m]] <= lvl:
                    return False
                elif self.complete and self.level[self.var[m]] != lvl + 1:
                    return False
        if self.complete and self.order and not self.is_sink(self.source):
            if self.level[self.var[self.source]] != 0:
                return False
        return True

    def to_text(self) -> str:
        lines = ["obdd %s source %d" % (" ".join(map(str, self.order)),
                                        self.source)]
        for n in range(2, self.num_nodes):
            lines.append("%d %d %d %d" % (n, self.var[n], self.lo[n], self.hi[n]))
        return "\n".join(lines) + "\n"


def obdd_from_cnf_bruteforce(formula: CnfFormula, order) -> Obdd:
    """Complete OBDD by Shannon expansion memoized on the residual function.

    Test-fixture builder: exponential-time in general, capped at 20 vars.
    """
    order = tuple(order)
    if len(order) > 20:
        raise ObddError("brute-force OBDD builder capped at 20 variables")
    if set(order) != set(range(1, formula.num_vars + 1)):
        raise ObddError("order must cover exactly the declared variables")
    from .oracle import cnf_truth_table

    table = cnf_truth_table(formula, order)
    b = Obdd(order, complete=True)
    n = len(order)
    memo: list[dict[int, int]] = [{} for _ in range(n + 1)]

    # level i handles order[i]; the residual table at level i has 2^(n-i)
    # bits indexed by the remaining variables in order
    def build(level, tab):
        if level == n:
            return SINK1 if tab & 1 else SINK0
        node = memo[level].get(tab)
        if node is not None:
            return node
        half = 1 << (n - level - 1)
        mask = (1 << half) - 1
        lo_tab = tab & mask
        hi_tab = tab >> half
        node = b.add_node(order[level],
                          build(level + 1, lo_tab),
                          build(level + 1, hi_tab))
        memo[level][tab] = node
        return node

    # reindex the oracle table so the first order variable is the high bit
    # of the residual split; recompute positions accordingly
    variables = sorted(order)
    pos = {v: j for j, v in enumerate(variables)}
    reindexed = 0
    for a in range(1 << n):
        if (table >> a) & 1:
            a2 = 0
            for i, v in enumerate(order):
                if (a >> pos[v]) & 1:
                    a2 |= 1 << (n - 1 - i)
            reindexed |= 1 << a2
    b.source = build(0, reindexed)
    return b


def complete_obdd(b: Obdd) -> Obdd:
    """Insert pass-through nodes so every path tests every variable once."""
    out = Obdd(b.order, complete=True)
    n = len(b.order)
    node_map: dict[int, int] = {}
    chains: dict[tuple[int, int], int] = {}

    order_nodes = [m for m in range(2, b.num_nodes)]
    order_nodes.sort(key=lambda m: -b.level[b.var[m]])

    def chain(level_from, level_to, target):
        """Pass-through nodes for levels [level_from, level_to) above target."""
        node = target
        for lvl in range(level_to - 1, level_from - 1, -1):
            key = (lvl, node)
            got = chains.get(key)
            if got is None:
                got = out.add_node(b.order[lvl], node, node)
                chains[key] = got
            node = got
        return node

    for m in order_nodes:
        lvl = b.level[b.var[m]]
        kids = []
        for child in (b.lo[m], b.hi[m]):
            if b.is_sink(child):
                kids.append(chain(lvl + 1, n, child))
            else:
                kids.append(chain(lvl + 1, b.level[b.var[child]],
                                  node_map[child]))
        node_map[m] = out.add_node(b.var[m], kids[0], kids[1])

    if b.is_sink(b.source):
        out.source = chain(0, n, b.source)
    else:
        src_lvl = b.level[b.var[b.source]]
        out.source = chain(0, src_lvl, node_map[b.source])
    return out


def _closure(b: Obdd, nodes, stop_levels) -> frozenset[int]:
    """Follow both edges through the dropped layers until hitting a node on a
    kept level or a sink."""
    out = set()
    stack = list(nodes)
    while stack:
        n = stack.pop()
        if b.is_sink(n) or b.level[b.var[n]] in stop_levels:
            out.add(n)
        else:
            stack.append(b.lo[n])
            stack.append(b.hi[n])
    return frozenset(out)


def obdd_project_pair(b: Obdd, z) -> tuple[Obdd, Obdd]:
    """Powerset projection: complete OBDDs for the projection and its
    complement over the kept variables, from one subset automaton."""
    if not b.complete:
        raise ObddError("projection requires a complete OBDD")
    z = frozenset(z)
    unknown = z - set(b.order)
    if unknown:
        raise ObddError("projecting unknown variables %s" % sorted(unknown))
    kept = [v for v in b.order if v not in z]
    kept_levels = {b.level[v] for v in kept}
    w = b.width()

    ex = Obdd(kept, complete=True)
    nex = Obdd(kept, complete=True)

    start = _closure(b, [b.source], kept_levels)
    if not kept:
        accept = SINK1 in start
        ex.source = SINK1 if accept else SINK0
        nex.source = SINK0 if accept else SINK1
        return ex, nex

    states: dict[int, dict[frozenset, int]] = {i: {} for i in range(len(kept))}
    worklist = []

    def state_at(depth, subset):
        got = states[depth].get(subset)
        if got is None:
            var = kept[depth]
            got = (ex.add_node(var, 0, 0), nex.add_node(var, 0, 0))
            states[depth][subset] = got
            worklist.append((depth, subset))
        return got

    def successor(depth, subset, bit):
        step = set()
        for n in subset:
            if b.is_sink(n):
                step.add(n)  # dropped trailing variables keep sink reachability
            else:
                step.add(b.hi[n] if bit else b.lo[n])
        return _closure(b, step, kept_levels)

    src = state_at(0, start)
    ex.source, nex.source = src
    while worklist:
        depth, subset = worklist.pop()
        en, nn = states[depth][subset]
        for bit in (0, 1):
            nxt = successor(depth, subset, bit)
            if depth + 1 < len(kept):
                child = state_at(depth + 1, nxt)
            else:
                accept = SINK1 in nxt
                child = (SINK1 if accept else SINK0,
                         SINK0 if accept else SINK1)
            for diagram, node, target in ((ex, en, child[0]), (nex, nn, child[1])):
                if bit:
                    diagram.hi[node] = target
                else:
                    diagram.lo[node] = target
        if len(states[depth]) > (1 << w):
            raise ObddError("subset layer exceeded the 2^w bound at depth %d"
                            % depth)

    for depth, layer in states.items():
        if len(layer) > (1 << w):
            raise ObddError("projected width %d exceeds 2^w = %d"
                            % (len(layer), 1 << w))
    return ex, nex


def obdd_project(b: Obdd, z) -> Obdd:
    """Existential projection; see :func:`obdd_project_pair`."""
    return obdd_project_pair(b, z)[0]


def obdd_negate(b: Obdd) -> Obdd:
    """Swap the sinks; node count and width are unchanged."""
    out = Obdd(b.order, complete=b.complete)
    for n in range(2, b.num_nodes):
        lo = b.lo[n] ^ 1 if b.is_sink(b.lo[n]) else b.lo[n]
        hi = b.hi[n] ^ 1 if b.is_sink(b.hi[n]) else b.hi[n]
        out.add_node(b.var[n], lo, hi)
    out.source = b.source ^ 1 if b.is_sink(b.source) else b.source
    return out


def obdd_count_models(b: Obdd) -> int:
    """Model count over the diagram's variables; requires completeness."""
    if not b.complete:
        raise ObddError("counting requires a complete OBDD")
    counts = {SINK0: 0, SINK1: 1}
    order_nodes = sorted(range(2, b.num_nodes),
                         key=lambda m: -b.level[b.var[m]])
    for m in order_nodes:
        counts[m] = counts[b.lo[m]] + counts[b.hi[m]]
    if b.is_sink(b.source):
        return counts[b.source] << len(b.order)
    return counts[b.source]


def obdd_to_circuit(b: Obdd) -> StructuredCircuit:
    """Rewrite as a complete structured d-DNNF over the right-comb vtree in
    diagram order; the circuit width equals the OBDD width."""
    if not b.complete:
        raise ObddError("conversion requires a complete OBDD")
    w = b.width()
    vt = right_comb_vtree(b.order)
    circ = StructuredCircuit(vt, True)
    n = len(b.order)

    # comb nodes top-down: internal node for level i, trailing unlabeled leaf
    comb = []
    node = vt.root
    for _ in range(n):
        comb.append(node)
        node = vt.right[node]
    tail_leaf = node if n else vt.root
    leaf_of = {v: vt.leaf_of[v] for v in b.order}

    if b.is_sink(b.source):
        out = StructuredCircuit(vt, True)
        out.set_output(
            "main", out.add_true(tail_leaf) if b.source == SINK1
            else out.add_false(tail_leaf))
        return remove_constant_leaves(out) if n else out

    gate: dict[int, int] = {}
    order_nodes = sorted((m for m in b.reachable() if not b.is_sink(m)),
                         key=lambda m: -b.level[b.var[m]])
    const_true = None
    for m in order_nodes:
        lvl = b.level[b.var[m]]
        home = comb[lvl]
        v = b.var[m]
        branches = []
        for lit, child in ((v, b.hi[m]), (-v, b.lo[m])):
            if child == SINK0:
                continue
            lit_gate = circ.add_literal(lit, leaf_of[v])
            if child == SINK1:
                if const_true is None:
                    const_true = circ.add_true(tail_leaf)
                partner = const_true
            else:
                partner = gate[child]
            branches.append(circ.add_and((lit_gate, partner), home))
        gate[m] = circ.add_or(tuple(branches), home)
    circ.set_output("main", gate[b.source])
    circ = remove_constant_leaves(circ)
    w_circ = circuit_width(circ)
    if w_circ > w:
        raise ObddError("converted circuit width %d exceeds OBDD width %d"
                        % (w_circ, w))
    return circ
