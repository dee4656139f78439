"""Same-vtree transformations: conjunction, disjunction, vtree alignment.

Conjunction is the gate-product construction: one output gate per reachable
pair of same-type input gates, so the width multiplies.  Disjunction routes
through the shape-partition circuits of both inputs (projection with an
empty variable set), conjoins them, and ORs the accepting partition cells;
its width is bounded by 2^(w+w') plus the one root output gate.
"""

from __future__ import annotations

from .circuit import (AND, FALSE, LIT, OR, TRUE, CircuitError,
                      StructuredCircuit, Vtree, VtreeBuilder,
                      garbage_collect, width)
from .project import project

_ZERO = -1  # product sentinel: the pair is unsatisfiable


class VtreeMismatch(CircuitError):
    pass


def align_vtree(circuit: StructuredCircuit, target: Vtree) -> StructuredCircuit:
    """Renumber the circuit onto a structurally identical vtree.

    Only identity-on-labels isomorphism is supported; structurally different
    vtrees (even mirrored ones) are rejected, as general re-structuring is
    a different problem.
    """
    mapping = circuit.vtree.structural_map(target)
    if mapping is None:
        raise VtreeMismatch("unsupported: target vtree is not label-identical")
    out = StructuredCircuit(target, circuit.deterministic)
    for g in range(circuit.num_gates):
        out._add(circuit.kinds[g], circuit.args[g], mapping[circuit.homes[g]])
    for name, g in circuit.outputs.items():
        out.set_output(name, g)
    return out


def _sides(circuit, gate, left, right, node_of):
    """Split an AND gate's children by vtree side; ``node_of`` maps the
    child's home into the reference vtree."""
    l = r = None
    for ch in circuit.args[gate]:
        home = node_of(circuit.homes[ch])
        if home == left:
            l = ch
        elif home == right:
            r = ch
        else:
            raise CircuitError("AND child outside its node's children")
    return l, r


def _product(c1: StructuredCircuit, c2: StructuredCircuit, seeds: dict,
             deterministic: bool):
    """Pairwise product of two same-vtree circuits.

    ``seeds`` maps output names to (gate-in-c1, gate-in-c2) pairs; the result
    holds one gate per reachable same-type pair (or the _ZERO sentinel).
    Returns (circuit, {name: gate or _ZERO}).
    """
    mapping = c1.vtree.structural_map(c2.vtree)
    if mapping is None:
        raise VtreeMismatch("conjoin requires identical vtrees")
    inverse = {b: a for a, b in mapping.items()}
    vt = c1.vtree
    out = StructuredCircuit(vt, deterministic)
    memo: dict[tuple[int, int], int] = {}

    def child_pairs(g1, g2):
        k1, k2 = c1.kinds[g1], c2.kinds[g2]
        if k1 == AND and k2 == AND:
            node = c1.homes[g1]
            left, right = vt.children(node)
            l1, r1 = _sides(c1, g1, left, right, lambda h: h)
            l2, r2 = _sides(c2, g2, left, right, lambda h: inverse[h])
            if (l1 is None) != (l2 is None) or (r1 is None) != (r2 is None):
                raise CircuitError(
                    "conjoin of mixed fan-in AND gates is unsupported")
            return [p for p in ((l1, l2), (r1, r2)) if p[0] is not None]
        if k1 == OR and k2 == OR:
            return [(a, b) for a in c1.args[g1] for b in c2.args[g2]]
        if k1 in (AND, OR) or k2 in (AND, OR):
            raise CircuitError("conjoin pairs gates of different types")
        return []

    def combine(g1, g2):
        k1, k2 = c1.kinds[g1], c2.kinds[g2]
        node = c1.homes[g1]
        if k1 not in (AND, OR):
            if k1 == FALSE or k2 == FALSE:
                return _ZERO
            if k1 == LIT and k2 == LIT:
                if c1.args[g1] != c2.args[g2]:
                    return _ZERO
                return out.add_literal(c1.args[g1], node)
            if k1 == LIT:
                return out.add_literal(c1.args[g1], node)
            if k2 == LIT:
                return out.add_literal(c2.args[g2], node)
            return out.add_true(node)
        pairs = child_pairs(g1, g2)
        results = [memo[p] for p in pairs]
        if k1 == AND:
            if _ZERO in results:
                return _ZERO
            return out.add_and(tuple(results), node)
        kids = []
        seen = set()
        for r in results:
            if r != _ZERO and r not in seen:
                seen.add(r)
                kids.append(r)
        if not kids:
            return _ZERO
        return out.add_or(tuple(kids), node)

    for pair in seeds.values():
        stack = [(pair, False)]
        while stack:
            (g1, g2), expanded = stack.pop()
            if (g1, g2) in memo:
                continue
            if expanded:
                memo[(g1, g2)] = combine(g1, g2)
                continue
            if c2.homes[g2] != mapping[c1.homes[g1]]:
                raise CircuitError("paired gates live on different vtree nodes")
            stack.append(((g1, g2), True))
            for p in child_pairs(g1, g2):
                if p not in memo:
                    stack.append((p, False))
    return out, {name: memo[pair] for name, pair in seeds.items()}


def _widen_single_leaf(vt: Vtree) -> Vtree:
    b = VtreeBuilder()
    leaf = b.add_leaf(vt.label[vt.root])
    return b.build(b.add_internal(leaf, b.add_leaf(0)))


def conjoin(c1: StructuredCircuit, c2: StructuredCircuit,
            out1: str = "main", out2: str = "main") -> StructuredCircuit:
    """Conjunction of two circuits over the same vtree; output ``main``.

    Width is at most width(c1) * width(c2), asserted.  The result keeps the
    deterministic flag only when both inputs carry it.
    """
    det = c1.deterministic and c2.deterministic
    seeds = {"main": (c1.output(out1), c2.output(out2))}
    prod, gates = _product(c1, c2, seeds, det)
    if gates["main"] == _ZERO:
        vt = prod.vtree
        if vt.is_leaf(vt.root):
            vt = _widen_single_leaf(vt)
        result = StructuredCircuit(vt, True)
        result.set_output("main", result.add_or((), vt.root))
        return result
    prod.set_output("main", gates["main"])
    result = garbage_collect(prod, ["main"])
    bound = max(1, width(c1)) * max(1, width(c2))
    got = width(result)
    if got > bound:
        raise CircuitError("conjoined width %d exceeds w*w' = %d" % (got, bound))
    return result


def _tiny_disjoin(c1, c2, out1, out2):
    """Zero- or one-variable disjunction by enumeration."""
    from .circuit import evaluate

    labeled = sorted(c1.vtree.labeled_vars())
    b = VtreeBuilder()
    if not labeled:
        vt = b.build(b.add_leaf(0))
        result = StructuredCircuit(vt, True)
        v = evaluate(c1, {}, out1) or evaluate(c2, {}, out2)
        result.set_output("main", result.add_true(0) if v else result.add_false(0))
        return result
    x = labeled[0]
    v1 = evaluate(c1, {x: True}, out1) or evaluate(c2, {x: True}, out2)
    v0 = evaluate(c1, {x: False}, out1) or evaluate(c2, {x: False}, out2)
    leaf = b.add_leaf(x)
    if v1 and v0:
        extra = b.add_leaf(0)
        vt = b.build(b.add_internal(leaf, extra))
        result = StructuredCircuit(vt, True)
        one = result.add_true(extra)
        result.set_output("main", result.add_or(
            (result.add_and((result.add_literal(x, leaf), one), vt.root),
             result.add_and((result.add_literal(-x, leaf), one), vt.root)),
            vt.root))
        return result
    vt = b.build(leaf)
    result = StructuredCircuit(vt, True)
    if v1:
        result.set_output("main", result.add_literal(x, leaf))
    elif v0:
        result.set_output("main", result.add_literal(-x, leaf))
    else:
        vt2 = _widen_single_leaf(vt)
        result = StructuredCircuit(vt2, True)
        result.set_output("main", result.add_or((), vt2.root))
    return result


def disjoin(c1: StructuredCircuit, c2: StructuredCircuit,
            out1: str = "main", out2: str = "main") -> StructuredCircuit:
    """Disjunction of two circuits over the same vtree; output ``main``.

    Both inputs are first rewritten as shape partitions (projection over no
    variables), the partitions are conjoined pairwise, and the cells where
    either side accepts are collected under one deterministic OR.  Width is
    at most 2^(w+w'); whether the extra root gate counts is ambiguous, so the
    assertion allows it as +1.
    """
    if len(c1.vtree.labeled_vars()) <= 1:
        return _tiny_disjoin(c1, c2, out1, out2)
    p1 = project(c1, frozenset(), out1)
    p2 = project(c2, frozenset(), out2)
    aligned = align_vtree(p2, p1.vtree)
    names = {}
    for n1 in ("exists", "not_exists"):
        for n2 in ("exists", "not_exists"):
            names[(n1, n2)] = (p1.output(n1), aligned.output(n2))
    prod, gates = _product(p1, aligned, names, True)
    vt = prod.vtree
    branches = []
    seen = set()
    for key, g in gates.items():
        if key == ("not_exists", "not_exists") or g == _ZERO:
            continue
        for ch in prod.args[g]:
            if ch not in seen:
                seen.add(ch)
                branches.append(ch)
    prod.set_output("main", prod.add_or(tuple(branches), vt.root))
    result = garbage_collect(prod, ["main"])
    bound = 2 ** (max(1, width(c1)) + max(1, width(c2))) + 1
    got = width(result)
    if got > bound:
        raise CircuitError("disjoined width %d exceeds 2^(w+w')+1 = %d"
                           % (got, bound))
    return result
