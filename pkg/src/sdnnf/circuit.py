"""Vtrees and complete structured (d-)DNNF circuits.

A circuit is a gate DAG (literals, constants, binary AND, n-ary OR) together
with a home map from gates to vtree nodes.  The structuredness rules tie the
two together: inputs sit on leaves, an AND's children sit on the two children
of its home, an OR's children are ANDs on the same home.  Width counts only
the OR gates per vtree node.
"""

from __future__ import annotations

from .treedec import CheckResult

LIT, TRUE, FALSE, AND, OR = range(5)

_KIND_NAMES = {LIT: "literal", TRUE: "true", FALSE: "false", AND: "and", OR: "or"}


class CircuitError(Exception):
    pass


class Vtree:
    """Rooted full binary tree; labeled leaves biject with the variables.

    An unlabeled leaf (label 0) hosts constant gates; a vtree with unlabeled
    leaves is called extended.
    """

    def __init__(self, left, right, label, root):
        self.left = list(left)
        self.right = list(right)
        self.label = list(label)
        self.root = root
        self.parent = [-1] * len(self.left)
        seen_vars = {}
        for i in range(len(self.left)):
            l, r = self.left[i], self.right[i]
            if (l < 0) != (r < 0):
                raise CircuitError("vtree node %d has exactly one child" % i)
            if l >= 0:
                if self.label[i]:
                    raise CircuitError("internal vtree node %d carries a label" % i)
                self.parent[l] = i
                self.parent[r] = i
            elif self.label[i]:
                v = self.label[i]
                if v in seen_vars:
                    raise CircuitError("variable %d labels two leaves" % v)
                seen_vars[v] = i
        self.leaf_of = seen_vars  # var -> leaf node
        self._below: dict[int, frozenset[int]] = {}

    @property
    def num_nodes(self):
        return len(self.left)

    def is_leaf(self, node: int) -> bool:
        return self.left[node] < 0

    def is_extended(self) -> bool:
        return any(self.is_leaf(i) and not self.label[i] for i in range(self.num_nodes))

    def labeled_vars(self) -> frozenset[int]:
        return frozenset(self.leaf_of)

    def children(self, node: int):
        return (self.left[node], self.right[node])

    def postorder(self) -> list[int]:
        order = []
        stack = [self.root]
        while stack:
            n = stack.pop()
            order.append(n)
            if not self.is_leaf(n):
                stack.append(self.left[n])
                stack.append(self.right[n])
        order.reverse()
        return order

    def variables_below(self, node: int) -> frozenset[int]:
        cached = self._below.get(node)
        if cached is not None:
            return cached
        vs = []
        stack = [node]
        while stack:
            n = stack.pop()
            if self.is_leaf(n):
                if self.label[n]:
                    vs.append(self.label[n])
            else:
                stack.append(self.left[n])
                stack.append(self.right[n])
        out = frozenset(vs)
        self._below[node] = out
        return out

    def structural_map(self, other: "Vtree"):
        """Node map self -> other when the trees are isomorphic via the
        identity on leaf labels (including unlabeled-leaf positions); else None."""
        if self.num_nodes != other.num_nodes:
            return None
        mapping = {}
        stack = [(self.root, other.root)]
        while stack:
            a, b = stack.pop()
            if self.is_leaf(a) != other.is_leaf(b):
                return None
            if self.is_leaf(a):
                if self.label[a] != other.label[b]:
                    return None
            else:
                stack.append((self.left[a], other.left[b]))
                stack.append((self.right[a], other.right[b]))
            mapping[a] = b
        return mapping


class VtreeBuilder:
    def __init__(self):
        self.left, self.right, self.label = [], [], []

    def add_leaf(self, var: int = 0) -> int:
        self.left.append(-1)
        self.right.append(-1)
        self.label.append(var)
        return len(self.left) - 1

    def add_internal(self, left: int, right: int) -> int:
        self.left.append(left)
        self.right.append(right)
        self.label.append(0)
        return len(self.left) - 1

    def build(self, root: int) -> Vtree:
        return Vtree(self.left, self.right, self.label, root)


def single_leaf_vtree(var: int = 0) -> Vtree:
    b = VtreeBuilder()
    return b.build(b.add_leaf(var))


def right_comb_vtree(variables) -> Vtree:
    """Linear vtree: leaves in the given order, combed to the right, with a
    trailing unlabeled leaf so last-level decision gadgets have a home."""
    b = VtreeBuilder()
    node = b.add_leaf(0)
    for v in reversed(list(variables)):
        node = b.add_internal(b.add_leaf(v), node)
    return b.build(node)


class StructuredCircuit:
    """Gate store plus the home labeling onto a vtree.

    Gates are append-only with integer ids; ``by_node`` materializes the
    inverse home map.  ``deterministic`` is a constructive claim set by the
    producing operation and audited by brute force in tests.
    """

    def __init__(self, vtree: Vtree, deterministic: bool = False):
        self.vtree = vtree
        self.kinds: list[int] = []
        self.args: list = []
        self.homes: list[int] = []
        self.by_node: list[list[int]] = [[] for _ in range(vtree.num_nodes)]
        self.outputs: dict[str, int] = {}
        self.deterministic = deterministic

    def _add(self, kind, arg, node) -> int:
        if not 0 <= node < self.vtree.num_nodes:
            raise CircuitError("vtree node %d out of range" % node)
        gid = len(self.kinds)
        self.kinds.append(kind)
        self.args.append(arg)
        self.homes.append(node)
        self.by_node[node].append(gid)
        return gid

    def add_literal(self, lit: int, node: int) -> int:
        if lit == 0:
            raise CircuitError("0 is not a literal")
        return self._add(LIT, lit, node)

    def add_true(self, node: int) -> int:
        return self._add(TRUE, None, node)

    def add_false(self, node: int) -> int:
        return self._add(FALSE, None, node)

    def add_and(self, children, node: int) -> int:
        children = tuple(children)
        if not 1 <= len(children) <= 2:
            raise CircuitError("AND takes one or two children, got %d" % len(children))
        return self._add(AND, children, node)

    def add_or(self, children, node: int) -> int:
        return self._add(OR, tuple(children), node)

    @property
    def num_gates(self) -> int:
        return len(self.kinds)

    def gates_at(self, node: int):
        return self.by_node[node]

    def children_of(self, gate: int):
        if self.kinds[gate] in (AND, OR):
            return self.args[gate]
        return ()

    def set_output(self, name: str, gate: int):
        self.outputs[name] = gate

    def output(self, name: str = "main") -> int:
        if name not in self.outputs:
            raise CircuitError("no output named %r (have %s)" % (name, sorted(self.outputs)))
        return self.outputs[name]


def or_counts(circuit: StructuredCircuit) -> list[int]:
    counts = [0] * circuit.vtree.num_nodes
    for g in range(circuit.num_gates):
        if circuit.kinds[g] == OR:
            counts[circuit.homes[g]] += 1
    return counts


def width(circuit: StructuredCircuit) -> int:
    """Maximum number of OR gates homed on a single vtree node."""
    counts = or_counts(circuit)
    return max(counts) if counts else 0


def _topological(circuit: StructuredCircuit, roots=None) -> list[int]:
    """Gates in children-before-parents order, restricted to those reachable
    from ``roots`` (default: all gates)."""
    if roots is None:
        roots = range(circuit.num_gates)
    order = []
    seen = set()
    for root in roots:
        if root in seen:
            continue
        stack = [(root, False)]
        while stack:
            g, done = stack.pop()
            if done:
                order.append(g)
                continue
            if g in seen:
                continue
            seen.add(g)
            stack.append((g, True))
            for ch in circuit.children_of(g):
                if ch not in seen:
                    stack.append((ch, False))
    return order


def evaluate(circuit: StructuredCircuit, assignment: dict[int, bool],
             out: str = "main") -> bool:
    """Value of the named output under a total assignment of the labeled vars."""
    missing = circuit.vtree.labeled_vars() - set(assignment)
    if missing:
        raise CircuitError("assignment misses variables %s" % sorted(missing))
    root = circuit.output(out)
    val: dict[int, bool] = {}
    for g in _topological(circuit, [root]):
        kind = circuit.kinds[g]
        if kind == LIT:
            lit = circuit.args[g]
            val[g] = assignment[abs(lit)] == (lit > 0)
        elif kind == TRUE:
            val[g] = True
        elif kind == FALSE:
            val[g] = False
        elif kind == AND:
            val[g] = all(val[ch] for ch in circuit.args[g])
        else:
            val[g] = any(val[ch] for ch in circuit.args[g])
    return val[root]


def _pattern(position: int, n: int) -> int:
    block = 1 << position
    unit = ((1 << block) - 1) << block
    period = 2 * block
    reps = 1 << (n - position - 1)
    return unit * (((1 << (period * reps)) - 1) // ((1 << period) - 1))


def truth_table(circuit: StructuredCircuit, out: str = "main",
                variables=None) -> int:
    """Truth table of an output as a big integer: bit ``a`` is the value under
    assignment ``a`` (bit j of ``a`` = value of the j-th variable in sorted
    order).  ``variables`` may be a superset of the labeled variables."""
    if variables is None:
        variables = sorted(circuit.vtree.labeled_vars())
    else:
        variables = sorted(variables)
    n = len(variables)
    if n > 24:
        raise CircuitError("truth table capped at 24 variables")
    position = {v: j for j, v in enumerate(variables)}
    full = (1 << (1 << n)) - 1 if n else 1
    root = circuit.output(out)
    val: dict[int, int] = {}
    for g in _topological(circuit, [root]):
        kind = circuit.kinds[g]
        if kind == LIT:
            lit = circuit.args[g]
            p = _pattern(position[abs(lit)], n)
            val[g] = p if lit > 0 else full ^ p
        elif kind == TRUE:
            val[g] = full
        elif kind == FALSE:
            val[g] = 0
        elif kind == AND:
            acc = full
            for ch in circuit.args[g]:
                acc &= val[ch]
            val[g] = acc
        else:
            acc = 0
            for ch in circuit.args[g]:
                acc |= val[ch]
            val[g] = acc
    return val[root]


def check_structuredness(circuit: StructuredCircuit) -> CheckResult:
    """Audit the home/edge rules of complete structured DNNF."""
    vt = circuit.vtree
    for g in range(circuit.num_gates):
        kind = circuit.kinds[g]
        home = circuit.homes[g]
        if kind == LIT:
            if not vt.is_leaf(home) or vt.label[home] != abs(circuit.args[g]):
                return CheckResult(False,
                                   "literal gate %d not on its variable's leaf" % g)
        elif kind in (TRUE, FALSE):
            if not vt.is_leaf(home) or vt.label[home]:
                return CheckResult(False,
                                   "constant gate %d not on an unlabeled leaf" % g)
        elif kind == AND:
            if vt.is_leaf(home):
                return CheckResult(False, "AND gate %d homed on a leaf" % g)
            kids = circuit.args[g]
            kid_homes = [circuit.homes[c] for c in kids]
            if len(kids) == 2 and kid_homes[0] == kid_homes[1]:
                return CheckResult(False,
                                   "AND gate %d children share a vtree node" % g)
            allowed = set(vt.children(home))
            for c, h in zip(kids, kid_homes):
                if h not in allowed:
                    return CheckResult(
                        False, "edge %d->%d skips the vtree (child home %d not "
                               "a child of %d)" % (c, g, h, home))
                if circuit.kinds[c] not in (LIT, TRUE, FALSE, OR):
                    return CheckResult(False,
                                       "AND gate %d has an AND child" % g)
        elif kind == OR:
            if vt.is_leaf(home):
                return CheckResult(False, "OR gate %d homed on a leaf" % g)
            for c in circuit.args[g]:
                if circuit.kinds[c] != AND or circuit.homes[c] != home:
                    return CheckResult(
                        False, "OR gate %d child %d is not an AND on the same "
                               "node" % (g, c))
        else:
            return CheckResult(False, "unknown gate kind %r" % kind)
        for c in circuit.children_of(g):
            if not 0 <= c < circuit.num_gates:
                return CheckResult(False, "gate %d references missing gate %d" % (g, c))
    # acyclicity: child ids may exceed parents only if a cycle exists somewhere
    state: dict[int, int] = {}
    for start in range(circuit.num_gates):
        if state.get(start):
            continue
        stack = [(start, iter(circuit.children_of(start)))]
        state[start] = 1
        while stack:
            g, it = stack[-1]
            advanced = False
            for c in it:
                st = state.get(c)
                if st == 1:
                    return CheckResult(False, "cycle through gate %d" % c)
                if st is None:
                    state[c] = 1
                    stack.append((c, iter(circuit.children_of(c))))
                    advanced = True
                    break
            if not advanced:
                state[g] = 2
                stack.pop()
    for i, gs in enumerate(circuit.by_node):
        for g in gs:
            if circuit.homes[g] != i:
                return CheckResult(False, "home map out of sync at node %d" % i)
    return CheckResult(True)


def check_determinism_bruteforce(circuit: StructuredCircuit,
                                 max_vars: int = 20) -> CheckResult:
    """Enumerate all assignments; no OR gate may have two true children."""
    variables = sorted(circuit.vtree.labeled_vars())
    if len(variables) > max_vars:
        raise CircuitError("brute-force determinism check capped at %d vars"
                           % max_vars)
    n = len(variables)
    position = {v: j for j, v in enumerate(variables)}
    full = (1 << (1 << n)) - 1 if n else 1
    val: dict[int, int] = {}
    for g in _topological(circuit):
        kind = circuit.kinds[g]
        if kind == LIT:
            lit = circuit.args[g]
            p = _pattern(position[abs(lit)], n)
            val[g] = p if lit > 0 else full ^ p
        elif kind == TRUE:
            val[g] = full
        elif kind == FALSE:
            val[g] = 0
        elif kind == AND:
            acc = full
            for ch in circuit.args[g]:
                acc &= val[ch]
            val[g] = acc
        else:
            union = 0
            total = 0
            for ch in circuit.args[g]:
                union |= val[ch]
                total += bin(val[ch]).count("1")
            if total != bin(union).count("1"):
                return CheckResult(False,
                                   "OR gate %d has overlapping children" % g)
            val[g] = union
    return CheckResult(True)


def count_models(circuit: StructuredCircuit, out: str = "main") -> int:
    """Model count over the labeled variables.

    Sound because the circuit is complete (each gate ranges over exactly the
    labeled variables below its home) and deterministic (sums do not double
    count); no gap-factor correction is applied.
    """
    if not circuit.deterministic:
        raise CircuitError("model counting requires the deterministic flag")
    root = circuit.output(out)
    labeled = circuit.vtree.labeled_vars()
    if circuit.kinds[root] == FALSE:
        return 0
    below = circuit.vtree.variables_below(circuit.homes[root])
    if circuit.kinds[root] == TRUE:
        if labeled:
            raise CircuitError("constant-true output cannot count over %d "
                               "variables" % len(labeled))
        return 1
    if below != labeled:
        raise CircuitError("output gate does not range over all labeled variables")
    counts: dict[int, int] = {}
    for g in _topological(circuit, [root]):
        kind = circuit.kinds[g]
        if kind == LIT:
            counts[g] = 1
        elif kind == TRUE:
            counts[g] = 1
        elif kind == FALSE:
            counts[g] = 0
        elif kind == AND:
            acc = 1
            for ch in circuit.args[g]:
                acc *= counts[ch]
            counts[g] = acc
        else:
            counts[g] = sum(counts[ch] for ch in circuit.args[g])
    return counts[root]


def garbage_collect(circuit: StructuredCircuit, names=None) -> StructuredCircuit:
    """Copy keeping only gates reachable from the named outputs (default all),
    renumbered children-first."""
    if names is None:
        names = sorted(circuit.outputs)
    roots = [circuit.output(n) for n in names]
    order = _topological(circuit, roots)
    out = StructuredCircuit(circuit.vtree, circuit.deterministic)
    remap: dict[int, int] = {}
    for g in order:
        kind = circuit.kinds[g]
        if kind in (AND, OR):
            arg = tuple(remap[c] for c in circuit.args[g])
        else:
            arg = circuit.args[g]
        remap[g] = out._add(kind, arg, circuit.homes[g])
    for n in names:
        out.set_output(n, remap[circuit.output(n)])
    return out


def dedup_and_gates(circuit: StructuredCircuit) -> StructuredCircuit:
    """Merge AND gates with identical (ordered) children within each vtree
    node and reroute their OR consumers; one pass, linear in circuit size.

    Keyed per node on the ordered child tuple (structuredness fixes the
    orientation), matching the per-node scratch-table scheme.
    """
    replace: dict[int, int] = {}
    for node in range(circuit.vtree.num_nodes):
        table: dict[tuple, int] = {}
        for g in circuit.by_node[node]:
            if circuit.kinds[g] != AND:
                continue
            key = circuit.args[g]
            kept = table.get(key)
            if kept is None:
                table[key] = g
            else:
                replace[g] = kept
    if not replace:
        return circuit
    out = StructuredCircuit(circuit.vtree, circuit.deterministic)
    remap: dict[int, int] = {}
    for g in _topological(circuit):
        if g in replace:
            continue
        kind = circuit.kinds[g]
        if kind == OR:
            seen = set()
            kids = []
            for c in circuit.args[g]:
                c = replace.get(c, c)
                if c not in seen:
                    seen.add(c)
                    kids.append(remap[c])
            arg = tuple(kids)
        elif kind == AND:
            arg = tuple(remap[c] for c in circuit.args[g])
        else:
            arg = circuit.args[g]
        remap[g] = out._add(kind, arg, circuit.homes[g])
    for name, g in circuit.outputs.items():
        g = replace.get(g, g)
        out.set_output(name, remap[g])
    return out


def _fold_constants(circuit: StructuredCircuit):
    """Constant-propagate.  Returns (value, live_children) arrays: value[g] is
    0/1 when the gate folds to a constant, else None with the surviving
    children listed."""
    n = circuit.num_gates
    value: list = [None] * n
    live: list = [None] * n
    for g in _topological(circuit):
        kind = circuit.kinds[g]
        if kind == TRUE:
            value[g] = 1
        elif kind == FALSE:
            value[g] = 0
        elif kind == AND:
            kids = circuit.args[g]
            if any(value[c] == 0 for c in kids):
                value[g] = 0
                continue
            survivors = [c for c in kids if value[c] is None]
            if not survivors:
                value[g] = 1
            else:
                live[g] = survivors
        elif kind == OR:
            kids = circuit.args[g]
            if any(value[c] == 1 for c in kids):
                value[g] = 1
                continue
            survivors = [c for c in kids if value[c] is None]
            if not survivors:
                value[g] = 0
            else:
                live[g] = survivors
    return value, live


class _WorkGraph:
    """Mutable view used by remove_constant_leaves: live gates with rewritten
    children, parent links, and per-node buckets."""

    def __init__(self, circuit: StructuredCircuit, value, live):
        self.kinds = circuit.kinds
        self.home: dict[int, int] = {}
        self.kids: dict[int, list[int]] = {}
        self.parents: dict[int, list[int]] = {}
        self.at_node: dict[int, list[int]] = {}
        stack = [g for g in circuit.outputs.values() if value[g] is None]
        seen = set()
        while stack:
            g = stack.pop()
            if g in seen:
                continue
            seen.add(g)
            self.home[g] = circuit.homes[g]
            self.at_node.setdefault(circuit.homes[g], []).append(g)
            if circuit.kinds[g] in (AND, OR):
                kids = live[g]
                self.kids[g] = list(kids)
                for c in kids:
                    self.parents.setdefault(c, []).append(g)
                stack.extend(kids)

    def live_at(self, node, kind=None):
        gs = self.at_node.get(node, [])
        if kind is None:
            return list(gs)
        return [g for g in gs if self.kinds[g] == kind]

    def rehome(self, gate, node):
        self.at_node[self.home[gate]].remove(gate)
        self.home[gate] = node
        self.at_node.setdefault(node, []).append(gate)

    def bypass(self, gate, replacement):
        """Point every parent of ``gate`` at ``replacement`` instead."""
        for p in self.parents.pop(gate, []):
            ks = self.kids[p]
            self.kids[p] = [replacement if c == gate else c for c in ks]
            self.parents.setdefault(replacement, []).append(p)
        self.at_node[self.home[gate]].remove(gate)
        del self.home[gate]


def _emit(circuit, work, out_gates, out_consts, node_map, new_vtree):
    """Build the final circuit from the work graph.

    ``out_gates`` maps output names to live work-graph gates, ``out_consts``
    to folded constant values.  Fan-in-one ANDs left over next to a retained
    unlabeled leaf are re-completed with a shared constant-one on that leaf.
    """
    out = StructuredCircuit(new_vtree, circuit.deterministic)
    remap: dict[int, int] = {}
    order = []
    seen = set()
    for g in out_gates.values():
        if g in seen:
            continue
        stack = [(g, False)]
        while stack:
            h, done = stack.pop()
            if done:
                order.append(h)
                continue
            if h in seen:
                continue
            seen.add(h)
            stack.append((h, True))
            for c in work.kids.get(h, ()):
                if c not in seen:
                    stack.append((c, False))
    spare_true: dict[int, int] = {}
    for g in order:
        kind = work.kinds[g]
        node = node_map[work.home[g]]
        if kind in (AND, OR):
            kids = tuple(remap[c] for c in work.kids[g])
            if kind == AND and len(kids) == 1:
                used = out.homes[kids[0]]
                other = [c for c in new_vtree.children(node) if c != used]
                if len(other) == 1 and new_vtree.is_leaf(other[0]) \
                        and not new_vtree.label[other[0]]:
                    leaf = other[0]
                    if leaf not in spare_true:
                        spare_true[leaf] = out.add_true(leaf)
                    kids = kids + (spare_true[leaf],)
            remap[g] = out._add(kind, kids, node)
        else:
            remap[g] = out._add(kind, circuit.args[g], node)
    for name, g in out_gates.items():
        out.set_output(name, remap[g])
    if out_consts:
        taut = None
        for name, v in sorted(out_consts.items()):
            if not new_vtree.labeled_vars():
                out.set_output(name, out.add_true(new_vtree.root) if v
                               else out.add_false(new_vtree.root))
            elif v == 0:
                out.set_output(name, out.add_or((), new_vtree.root))
            else:
                if taut is None:
                    taut = _tautology_gate(out)
                out.set_output(name, taut)
    return out


def _tautology_gate(circuit: StructuredCircuit) -> int:
    """Add a width-1 chain computing the constant-one function over all
    labeled variables; returns its root gate."""
    vt = circuit.vtree
    if vt.is_leaf(vt.root):
        raise CircuitError("tautology needs an internal root")
    reps: dict[int, list[int]] = {}
    for node in vt.postorder():
        if vt.is_leaf(node):
            v = vt.label[node]
            if v:
                reps[node] = [circuit.add_literal(v, node),
                              circuit.add_literal(-v, node)]
            else:
                reps[node] = [circuit.add_true(node)]
        else:
            l, r = vt.children(node)
            ands = [circuit.add_and((a, b), node)
                    for a in reps[l] for b in reps[r]]
            reps[node] = [circuit.add_or(tuple(ands), node)]
    return reps[vt.root][0]


def remove_constant_leaves(circuit: StructuredCircuit) -> StructuredCircuit:
    """Eliminate unlabeled leaves: fold constants, then repeatedly drop a
    leaf and merge its father with its sibling, collapsing the OR-to-OR
    chains the merge creates.  Width never increases.

    One unlabeled leaf survives when the merge target is a labeled leaf that
    would have to host a multi-input OR (the constant-one function over a
    single variable has no plain single-leaf representation).
    """
    vt = circuit.vtree
    if not circuit.outputs:
        raise CircuitError("circuit has no outputs")
    if not vt.is_extended():
        return circuit

    value, live = _fold_constants(circuit)
    out_gates = {}
    out_consts = {}
    for name, g in circuit.outputs.items():
        if value[g] is None:
            out_gates[name] = g
        else:
            out_consts[name] = value[g]
    work = _WorkGraph(circuit, value, live)

    # mutable vtree mirror
    left = list(vt.left)
    right = list(vt.right)
    parent = list(vt.parent)
    label = list(vt.label)
    alive = [True] * vt.num_nodes
    root = vt.root

    def is_leaf(n):
        return left[n] < 0

    pending = [n for n in range(vt.num_nodes) if is_leaf(n) and not label[n]]
    blocked = []
    while pending:
        leaf = pending.pop()
        if not alive[leaf] or leaf == root:
            continue
        t = parent[leaf]
        s = left[t] if right[t] == leaf else right[t]
        if work.live_at(leaf):
            raise CircuitError("constant leaf %d still hosts live gates" % leaf)

        if is_leaf(s) and label[s]:
            # merging into a labeled leaf: only bypassable ORs may land there
            if any(len(work.kids[o]) > 1 for o in work.live_at(t, OR)):
                blocked.append(leaf)
                continue
            for a in work.live_at(t, AND):
                kids = work.kids[a]
                if len(kids) != 1:
                    raise CircuitError("unexpected AND arity during leaf removal")
                work.bypass(a, kids[0])
            for o in work.live_at(t, OR):
                target = work.kids[o][0]
                for name, g in list(out_gates.items()):
                    if g == o:
                        out_gates[name] = target
                work.bypass(o, target)
            survivor_label = label[s]
        elif is_leaf(s):
            # sibling is another unlabeled leaf; everything here folded away
            if work.live_at(t) or work.live_at(s):
                raise CircuitError("gates survived between two constant leaves")
            survivor_label = 0
        else:
            for a in work.live_at(t, AND):
                kids = work.kids[a]
                if len(kids) != 1:
                    raise CircuitError("unexpected AND arity during leaf removal")
                work.bypass(a, kids[0])
            for o in work.live_at(t, OR):
                # children are now ORs at s; absorb their AND children
                flat = []
                seen = set()
                for c in work.kids[o]:
                    work.parents[c].remove(o)
                    for gk in work.kids[c]:
                        if gk not in seen:
                            seen.add(gk)
                            flat.append(gk)
                work.kids[o] = flat
                for gk in flat:
                    work.parents.setdefault(gk, []).append(o)
                work.rehome(o, s)
            survivor_label = None  # s keeps its internal structure

        # vtree surgery: s replaces t
        alive[leaf] = False
        alive[t] = False
        if survivor_label is not None and is_leaf(s):
            label[s] = survivor_label
        p = parent[t]
        parent[s] = p
        if p == -1:
            root = s
        elif left[p] == t:
            left[p] = s
        else:
            right[p] = s
        # gates still homed at t (none expected) would be dangling
        if work.live_at(t):
            raise CircuitError("gates survived on a merged vtree node")
        if is_leaf(s) and not label[s]:
            pending.append(s)

    # rebuild the vtree with dense ids
    node_map: dict[int, int] = {}
    b = VtreeBuilder()
    order = []
    stack = [root]
    while stack:
        n = stack.pop()
        order.append(n)
        if not is_leaf(n):
            stack.append(left[n])
            stack.append(right[n])
    for n in reversed(order):
        if is_leaf(n):
            node_map[n] = b.add_leaf(label[n])
        else:
            node_map[n] = b.add_internal(node_map[left[n]], node_map[right[n]])
    new_vtree = b.build(node_map[root])
    return _emit(circuit, work, out_gates, out_consts, node_map, new_vtree)


def condition(circuit: StructuredCircuit, tau: dict[int, bool],
              names=None) -> StructuredCircuit:
    """Fix the variables of ``tau``: their literal gates become constants,
    their leaves lose their labels, and the constant leaves are removed.
    Width never increases."""
    labeled = circuit.vtree.labeled_vars()
    unknown = set(tau) - labeled
    if unknown:
        raise CircuitError("conditioning on unknown variables %s" % sorted(unknown))
    if not tau:
        return circuit
    vt = circuit.vtree
    new_vt = Vtree(vt.left, vt.right,
                   [0 if lbl in tau else lbl for lbl in vt.label], vt.root)
    out = StructuredCircuit(new_vt, circuit.deterministic)
    for g in range(circuit.num_gates):
        kind = circuit.kinds[g]
        if kind == LIT and abs(circuit.args[g]) in tau:
            lit = circuit.args[g]
            if tau[abs(lit)] == (lit > 0):
                out._add(TRUE, None, circuit.homes[g])
            else:
                out._add(FALSE, None, circuit.homes[g])
        else:
            out._add(kind, circuit.args[g], circuit.homes[g])
    for name, g in circuit.outputs.items():
        if names is None or name in names:
            out.set_output(name, g)
    return remove_constant_leaves(out)


# -- serialization ----------------------------------------------------------

def vtree_to_text(vt: Vtree) -> str:
    lines = ["vtree %d" % vt.num_nodes]
    for n in vt.postorder():
        if vt.is_leaf(n):
            if vt.label[n]:
                lines.append("L %d %d" % (n, vt.label[n]))
            else:
                lines.append("U %d" % n)
        else:
            lines.append("I %d %d %d" % (n, vt.left[n], vt.right[n]))
    return "\n".join(lines) + "\n"


def parse_vtree(text: str) -> Vtree:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("vtree "):
        raise CircuitError("missing vtree header")
    count = int(lines[0].split()[1])
    if len(lines) - 1 != count:
        raise CircuitError("vtree header declares %d nodes, got %d"
                           % (count, len(lines) - 1))
    left = [-1] * count
    right = [-1] * count
    label = [0] * count
    last = None
    for ln in lines[1:]:
        parts = ln.split()
        tag = parts[0]
        nid = int(parts[1])
        if not 0 <= nid < count:
            raise CircuitError("vtree node id %d out of range" % nid)
        if tag == "L":
            label[nid] = int(parts[2])
        elif tag == "U":
            pass
        elif tag == "I":
            left[nid], right[nid] = int(parts[2]), int(parts[3])
        else:
            raise CircuitError("unknown vtree line %r" % ln)
        last = nid
    return Vtree(left, right, label, last)


def circuit_to_text(circuit: StructuredCircuit) -> str:
    lines = ["sdnnf %d %d" % (circuit.num_gates, circuit.vtree.num_nodes)]
    for g in range(circuit.num_gates):
        kind = circuit.kinds[g]
        home = circuit.homes[g]
        if kind == LIT:
            lines.append("L %d %d %d" % (g, circuit.args[g], home))
        elif kind == TRUE:
            lines.append("T %d %d" % (g, home))
        elif kind == FALSE:
            lines.append("F %d %d" % (g, home))
        elif kind == AND:
            kids = circuit.args[g]
            if len(kids) != 2:
                raise CircuitError(
                    "only binary AND gates serialize; gate %d has %d children"
                    % (g, len(kids)))
            lines.append("A %d %d %d %d" % (g, kids[0], kids[1], home))
        else:
            kids = circuit.args[g]
            lines.append("O %d %d %s%d" % (
                g, len(kids),
                "".join("%d " % c for c in kids), home))
    for name in sorted(circuit.outputs):
        lines.append("out %s %d" % (name, circuit.outputs[name]))
    return "\n".join(lines) + "\n"


def parse_circuit(text: str, vtree: Vtree,
                  deterministic: bool = False) -> StructuredCircuit:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("sdnnf "):
        raise CircuitError("missing sdnnf header")
    _, gate_count, vnode_count = lines[0].split()
    gate_count, vnode_count = int(gate_count), int(vnode_count)
    if vnode_count != vtree.num_nodes:
        raise CircuitError("circuit written for a %d-node vtree, got %d nodes"
                           % (vnode_count, vtree.num_nodes))
    out = StructuredCircuit(vtree, deterministic)
    rows = []
    outputs = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "out":
            outputs.append((parts[1], int(parts[2])))
        else:
            rows.append(parts)
    if len(rows) != gate_count:
        raise CircuitError("header declares %d gates, got %d"
                           % (gate_count, len(rows)))
    for parts in rows:
        tag = parts[0]
        gid = int(parts[1])
        if gid != out.num_gates:
            raise CircuitError("gate ids must be dense and ascending, got %d"
                               % gid)
        if tag == "L":
            out.add_literal(int(parts[2]), int(parts[3]))
        elif tag == "T":
            out.add_true(int(parts[2]))
        elif tag == "F":
            out.add_false(int(parts[2]))
        elif tag == "A":
            out.add_and((int(parts[2]), int(parts[3])), int(parts[4]))
        elif tag == "O":
            k = int(parts[2])
            kids = tuple(int(x) for x in parts[3:3 + k])
            if len(kids) != k or len(parts) != 4 + k:
                raise CircuitError("bad OR line %r" % " ".join(parts))
            out.add_or(kids, int(parts[3 + k]))
        else:
            raise CircuitError("unknown circuit line tag %r" % tag)
    for g in range(out.num_gates):
        for c in out.children_of(g):
            if c >= g:
                raise CircuitError("gate %d references later gate %d" % (g, c))
    for name, g in outputs:
        if not 0 <= g < out.num_gates:
            raise CircuitError("output %r references missing gate %d" % (name, g))
        out.set_output(name, g)
    if not outputs:
        raise CircuitError("circuit file lists no outputs")
    return out
