"""Shape-based quantifier elimination on complete structured DNNF.

Projecting a variable set Z out of a width-w circuit runs a subset
construction over the OR gates of each vtree node: the state reached by an
assignment of the kept variables below a node is its *shape*, the set of
gates there that some extension over the forgotten variables satisfies.
Shapes combine across an internal node by firing its AND/OR layer, and the
output circuit carries one deterministic OR gate per realized shape, so its
width is at most 2^w.  Both the projection and its complement fall out of
the same construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import (AND, LIT, OR, TRUE, CircuitError, StructuredCircuit,
                      Vtree, VtreeBuilder, dedup_and_gates, evaluate,
                      garbage_collect, remove_constant_leaves, width)


@dataclass(frozen=True)
class Shape:
    """The set of satisfiable-under-some-extension gates at a vtree node
    (OR gates at internal nodes, input gates at leaves)."""

    node: int
    gates: frozenset[int]


class ScopeSplit:
    """Per-node split of the variables below into forgotten (in Z) and kept."""

    def __init__(self, vtree: Vtree, z):
        z = frozenset(z)
        self.z = z
        self.below: list[frozenset[int]] = [frozenset()] * vtree.num_nodes
        for node in vtree.postorder():
            if vtree.is_leaf(node):
                lbl = vtree.label[node]
                self.below[node] = frozenset((lbl,)) if lbl else frozenset()
            else:
                l, r = vtree.children(node)
                self.below[node] = self.below[l] | self.below[r]

    def forgot(self, node: int) -> frozenset[int]:
        return self.below[node] & self.z

    def kept(self, node: int) -> frozenset[int]:
        return self.below[node] - self.z


def normalize_root(circuit: StructuredCircuit,
                   out: str = "main") -> StructuredCircuit:
    """Ensure the named output is an OR gate homed at the vtree root.

    An AND output gets a fan-in-one OR wrapper (root OR count grows by one);
    anything else cannot be completed here and raises.
    """
    root_gate = circuit.output(out)
    vt = circuit.vtree
    if circuit.homes[root_gate] != vt.root:
        raise CircuitError("output gate is not homed at the vtree root; "
                           "the circuit is not complete")
    kind = circuit.kinds[root_gate]
    if kind == OR:
        return circuit
    if kind != AND:
        raise CircuitError("cannot normalize a %s output" %
                           ("constant" if kind in (TRUE,) else "literal"))
    out_c = StructuredCircuit(vt, circuit.deterministic)
    for g in range(circuit.num_gates):
        out_c._add(circuit.kinds[g], circuit.args[g], circuit.homes[g])
    wrapper = out_c.add_or((root_gate,), vt.root)
    for name, g in circuit.outputs.items():
        out_c.set_output(name, wrapper if name == out else g)
    return out_c


def _ref_gates(circuit: StructuredCircuit, node: int) -> list[int]:
    """Gates at a node that the layer above may reference: inputs on leaves,
    OR gates elsewhere."""
    if circuit.vtree.is_leaf(node):
        return [g for g in circuit.gates_at(node)
                if circuit.kinds[g] != OR and circuit.kinds[g] != AND]
    return [g for g in circuit.gates_at(node) if circuit.kinds[g] == OR]


def _layer(circuit: StructuredCircuit, node: int, idx1, idx2):
    """Precompute the AND/OR layer of a node for fast shape joins.

    Returns (needs, ors, or_masks): per AND gate the pair of required-child
    bitmasks over the two children's reference gates, the OR gates, and per
    OR its AND-children bitmask.
    """
    vt = circuit.vtree
    t1, t2 = vt.children(node)
    ands = []
    ors = []
    for g in circuit.gates_at(node):
        kind = circuit.kinds[g]
        if kind == AND:
            ands.append(g)
        elif kind == OR:
            ors.append(g)
    and_pos = {a: i for i, a in enumerate(ands)}
    needs = []
    for a in ands:
        n1 = n2 = 0
        for ch in circuit.args[a]:
            home = circuit.homes[ch]
            if home == t1:
                n1 |= 1 << idx1[ch]
            elif home == t2:
                n2 |= 1 << idx2[ch]
            else:
                raise CircuitError("AND %d child %d homed outside node %d"
                                   % (a, ch, node))
        needs.append((n1, n2))
    or_masks = []
    for o in ors:
        m = 0
        for ch in circuit.args[o]:
            if ch not in and_pos:
                raise CircuitError("OR %d child %d is not an AND at node %d"
                                   % (o, ch, node))
            m |= 1 << and_pos[ch]
        or_masks.append(m)
    return ands, needs, ors, or_masks


def join_shapes(circuit: StructuredCircuit, node: int,
                s1: Shape, s2: Shape) -> Shape:
    """Combine child shapes across a node by firing its AND/OR layer: an AND
    fires when each child lies in its side's shape, an OR fires when some
    AND child does."""
    vt = circuit.vtree
    t1, t2 = vt.children(node)
    if {s1.node, s2.node} != {t1, t2}:
        raise CircuitError("shapes are not at the children of node %d" % node)
    if s1.node == t2:
        s1, s2 = s2, s1
    idx1 = {g: i for i, g in enumerate(_ref_gates(circuit, t1))}
    idx2 = {g: i for i, g in enumerate(_ref_gates(circuit, t2))}
    m1 = sum(1 << idx1[g] for g in s1.gates)
    m2 = sum(1 << idx2[g] for g in s2.gates)
    _, needs, ors, or_masks = _layer(circuit, node, idx1, idx2)
    fired = 0
    for i, (n1, n2) in enumerate(needs):
        if n1 & ~m1 == 0 and n2 & ~m2 == 0:
            fired |= 1 << i
    out = frozenset(o for o, om in zip(ors, or_masks) if fired & om)
    return Shape(node, out)


def _project_single_var(circuit, z, out):
    """Projection over a vtree that is a single (possibly labeled) leaf."""
    vt = circuit.vtree
    var = vt.label[vt.root]
    if var == 0 or var in z:
        if var == 0:
            v = evaluate(circuit, {}, out)
            ex, nex = v, not v
        else:
            v1 = evaluate(circuit, {var: True}, out)
            v0 = evaluate(circuit, {var: False}, out)
            ex, nex = (v1 or v0), not (v1 or v0)
        b = VtreeBuilder()
        nv = b.build(b.add_leaf(0))
        d = StructuredCircuit(nv, True)
        d.set_output("exists", d.add_true(0) if ex else d.add_false(0))
        d.set_output("not_exists", d.add_true(0) if nex else d.add_false(0))
        return d
    v1 = evaluate(circuit, {var: True}, out)
    v0 = evaluate(circuit, {var: False}, out)
    b = VtreeBuilder()
    leaf = b.add_leaf(var)
    extra = b.add_leaf(0)
    nv = b.build(b.add_internal(leaf, extra))
    d = StructuredCircuit(nv, True)
    one = d.add_true(extra)
    pos = d.add_and((d.add_literal(var, leaf), one), nv.root)
    neg = d.add_and((d.add_literal(-var, leaf), one), nv.root)
    d.set_output("exists", d.add_or(tuple(
        g for g, v in ((pos, v1), (neg, v0)) if v), nv.root))
    d.set_output("not_exists", d.add_or(tuple(
        g for g, v in ((pos, not v1), (neg, not v0)) if v), nv.root))
    return remove_constant_leaves(d)


def project(circuit: StructuredCircuit, z,
            out: str = "main") -> StructuredCircuit:
    """Existential projection with its complement.

    Returns a complete structured d-DNNF over the vtree with the Z leaves
    removed, with outputs ``exists`` (the projection) and ``not_exists``
    (its complement).  The result is deterministic even when the input is
    not, and its width is at most 2^max(w,1) for input width w (asserted).
    """
    z = frozenset(z)
    labeled = circuit.vtree.labeled_vars()
    unknown = z - labeled
    if unknown:
        raise CircuitError("projecting unknown variables %s" % sorted(unknown))
    w_in = width(circuit)
    if circuit.vtree.is_leaf(circuit.vtree.root):
        return _project_single_var(circuit, z, out)

    c = garbage_collect(circuit, [out])
    c = normalize_root(c, out)
    root_or = c.output(out)
    vt = c.vtree

    # same tree, Z leaves lose their labels
    new_vt = Vtree(vt.left, vt.right,
                   [0 if lbl in z else lbl for lbl in vt.label], vt.root)
    d = StructuredCircuit(new_vt, True)

    pair_cap = 4 ** max(w_in, 1)
    node_shapes: dict[int, dict[int, int]] = {}
    ref_index: dict[int, dict[int, int]] = {}
    for node in vt.postorder():
        if vt.is_leaf(node):
            gates = _ref_gates(c, node)
            idx = {g: i for i, g in enumerate(gates)}
            ref_index[node] = idx
            var = vt.label[node]
            shapes: dict[int, int] = {}
            if var and var not in z:
                m1 = sum(1 << idx[g] for g in gates
                         if c.kinds[g] == LIT and c.args[g] > 0)
                m0 = sum(1 << idx[g] for g in gates
                         if c.kinds[g] == LIT and c.args[g] < 0)
                if not gates or m1 == m0:
                    raise CircuitError(
                        "leaf of variable %d does not distinguish its two "
                        "assignments; circuit is not complete" % var)
                shapes[m1] = d.add_literal(var, node)
                shapes[m0] = d.add_literal(-var, node)
            else:
                # forgotten or constant leaf: a single empty kept-assignment
                if var:  # every literal has a satisfying extension
                    mask = sum(1 << idx[g] for g in gates)
                else:  # constants: only the true gates are satisfiable
                    mask = sum(1 << idx[g] for g in gates
                               if c.kinds[g] == TRUE)
                shapes[mask] = d.add_true(node)
            node_shapes[node] = shapes
            continue

        t1, t2 = vt.children(node)
        idx1, idx2 = ref_index[t1], ref_index[t2]
        ands, needs, ors, or_masks = _layer(c, node, idx1, idx2)
        ref_index[node] = {g: i for i, g in enumerate(ors)}
        sh1, sh2 = node_shapes[t1], node_shapes[t2]
        if len(sh1) * len(sh2) > pair_cap:
            raise CircuitError(
                "shape pair count %d exceeds the 4^w bound %d at node %d"
                % (len(sh1) * len(sh2), pair_cap, node))
        fired2 = {}
        for s2 in sh2:
            f = 0
            for i, (_, n2) in enumerate(needs):
                if n2 & ~s2 == 0:
                    f |= 1 << i
            fired2[s2] = f
        joined_cache: dict[int, int] = {}
        buckets: dict[int, list] = {}
        for s1, g1 in sh1.items():
            f1 = 0
            for i, (n1, _) in enumerate(needs):
                if n1 & ~s1 == 0:
                    f1 |= 1 << i
            for s2, g2 in sh2.items():
                fired = f1 & fired2[s2]
                joined = joined_cache.get(fired)
                if joined is None:
                    joined = 0
                    for k, om in enumerate(or_masks):
                        if fired & om:
                            joined |= 1 << k
                    joined_cache[fired] = joined
                buckets.setdefault(joined, []).append((g1, g2))
        shapes = {}
        for joined, pairs in buckets.items():
            and_gates = tuple(d.add_and(pair, node) for pair in pairs)
            shapes[joined] = d.add_or(and_gates, node)
        node_shapes[node] = shapes

    root_shapes = node_shapes[vt.root]
    r_bit = 1 << ref_index[vt.root][root_or]
    stray = set(root_shapes) - {0, r_bit}
    if stray:
        raise CircuitError("unexpected root shapes %s after normalization"
                           % sorted(stray))
    ex = root_shapes.get(r_bit)
    nex = root_shapes.get(0)
    d.set_output("exists", ex if ex is not None else d.add_or((), vt.root))
    d.set_output("not_exists",
                 nex if nex is not None else d.add_or((), vt.root))
    d = remove_constant_leaves(d)
    d = dedup_and_gates(d)
    w_out = width(d)
    bound = 2 ** max(w_in, 1)
    if w_out > bound:
        raise CircuitError("projected width %d exceeds 2^w bound %d"
                           % (w_out, bound))
    return d


def negate(circuit: StructuredCircuit, out: str = "main") -> StructuredCircuit:
    """Complement a circuit: projection with an empty variable set, keeping
    the ``not_exists`` side.  Width at most 2^max(w,1)."""
    p = project(circuit, frozenset(), out)
    result = garbage_collect(p, ["not_exists"])
    gate = result.outputs.pop("not_exists")
    result.set_output("main", gate)
    return result


def forall_project(circuit: StructuredCircuit, z) -> StructuredCircuit:
    """Universal projection of a dual-output circuit via the complement side:
    forall Z D = not exists Z (not D).  Swaps the dual outputs back so the
    result again carries ``exists``/``not_exists`` in the usual sense."""
    if "not_exists" not in circuit.outputs:
        raise CircuitError("universal projection needs the dual output")
    p = project(circuit, z, out="not_exists")
    ex, nex = p.outputs["exists"], p.outputs["not_exists"]
    p.outputs["exists"], p.outputs["not_exists"] = nex, ex
    return p
