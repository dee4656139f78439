"""Tree decompositions: min-fill construction, nice form, validation."""

from __future__ import annotations

import heapq

from .formula import Graph


class CheckResult:
    """Boolean check outcome carrying a diagnostic reason."""

    def __init__(self, ok: bool, reason: str = ""):
        self.ok = ok
        self.reason = reason

    def __bool__(self):
        return self.ok

    def __repr__(self):
        return "CheckResult(%r, %r)" % (self.ok, self.reason)


class TreeDecomposition:
    """Rooted tree of bags.  Node ids are 0..n-1; ``parent[root] == -1``."""

    def __init__(self, bags, parent, root):
        self.bags = [frozenset(b) for b in bags]
        self.parent = list(parent)
        self.root = root
        self.children = [[] for _ in self.bags]
        for i, p in enumerate(self.parent):
            if p >= 0:
                self.children[p].append(i)

    def __len__(self):
        return len(self.bags)

    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1

    def postorder(self) -> list[int]:
        order = []
        stack = [self.root]
        while stack:
            n = stack.pop()
            order.append(n)
            stack.extend(self.children[n])
        order.reverse()
        return order

    def to_pace(self) -> str:
        """PACE-style .td dump (debug aid, not a stability contract)."""
        nverts = max((max(b) for b in self.bags if b), default=0)
        lines = ["s td %d %d %d" % (len(self.bags), max(len(b) for b in self.bags), nverts)]
        for i, bag in enumerate(self.bags):
            lines.append("b %d %s" % (i + 1, " ".join(str(v) for v in sorted(bag))))
        for i, p in enumerate(self.parent):
            if p >= 0:
                lines.append("%d %d" % (p + 1, i + 1))
        return "\n".join(lines) + "\n"


LEAF = "leaf"
INTRODUCE = "introduce"
FORGET = "forget"
JOIN = "join"


class NiceTreeDecomposition(TreeDecomposition):
    """Tree decomposition whose internal nodes are introduce/forget/join and
    whose leaf and root bags are empty."""

    def __init__(self, bags, parent, root, kinds, kind_vars):
        super().__init__(bags, parent, root)
        self.kinds = list(kinds)
        self.kind_vars = list(kind_vars)  # introduced/forgotten variable, else None

    def max_bag(self) -> int:
        return max(len(b) for b in self.bags)


def _fill_count(g_adj, v):
    neigh = sorted(g_adj[v])
    missing = 0
    for i, a in enumerate(neigh):
        adj_a = g_adj[a]
        for b in neigh[i + 1:]:
            if b not in adj_a:
                missing += 1
    return missing


def min_fill_order(g: Graph) -> list[int]:
    """Elimination order chosen greedily by minimum fill-in, ties by id."""
    adj = {v: set(g.neighbors(v)) for v in g.vertices()}
    heap = [(_fill_count(adj, v), v) for v in adj]
    heapq.heapify(heap)
    eliminated = set()
    order = []
    while heap:
        fill, v = heapq.heappop(heap)
        if v in eliminated:
            continue
        if fill != _fill_count(adj, v):
            heapq.heappush(heap, (_fill_count(adj, v), v))
            continue
        order.append(v)
        eliminated.add(v)
        neigh = sorted(adj[v])
        for i, a in enumerate(neigh):
            for b in neigh[i + 1:]:
                if b not in adj[a]:
                    adj[a].add(b)
                    adj[b].add(a)
        for a in neigh:
            adj[a].discard(v)
            heapq.heappush(heap, (_fill_count(adj, a), a))
        del adj[v]
    return order


def decomposition_from_order(g: Graph, order) -> TreeDecomposition:
    """Standard elimination-order construction: bag(v) = {v} + later neighbors;
    bag(v) hangs below the bag of the earliest later neighbor."""
    if g.num_vertices == 0:
        return TreeDecomposition([frozenset()], [-1], 0)
    pos = {v: i for i, v in enumerate(order)}
    adj = {v: set(g.neighbors(v)) for v in g.vertices()}
    bags = []
    later_bags = []  # per node: neighbors eliminated after v
    for v in order:
        neigh = sorted(adj[v])
        bags.append(frozenset([v]) | frozenset(neigh))
        later_bags.append(neigh)
        for i, a in enumerate(neigh):
            for b in neigh[i + 1:]:
                adj[a].add(b)
                adj[b].add(a)
        for a in neigh:
            adj[a].discard(v)
    parent = [-1] * len(order)
    root = len(order) - 1
    for i in range(len(order)):
        later = later_bags[i]
        if later:
            parent[i] = min(pos[a] for a in later)
        elif i != root:
            parent[i] = root  # isolated component: attach under the last bag
    return TreeDecomposition(bags, parent, root)


def min_fill_decomposition(g: Graph) -> TreeDecomposition:
    """Heuristic tree decomposition; always valid, width not guaranteed."""
    return decomposition_from_order(g, min_fill_order(g))


def exact_decomposition(g: Graph, max_vertices: int = 20) -> TreeDecomposition:
    """Exact-width decomposition by branch and bound over elimination orders.

    Memoizes on the set of remaining vertices; practical well below the
    ``max_vertices`` guard.
    """
    if g.num_vertices > max_vertices:
        raise ValueError("exact decomposition capped at %d vertices" % max_vertices)
    if g.num_vertices == 0:
        return TreeDecomposition([frozenset()], [-1], 0)

    verts = list(g.vertices())
    best_order = min_fill_order(g)
    best_width = decomposition_from_order(g, best_order).width()
    memo = {}

    def degree_after(adj, v):
        return len(adj[v])

    def search(adj, remaining, current_max, order):
        nonlocal best_order, best_width
        if current_max >= best_width:
            return
        if not remaining:
            best_width = current_max
            best_order = order[:]
            return
        key = remaining
        seen = memo.get(key)
        if seen is not None and seen <= current_max:
            return
        memo[key] = current_max
        cands = sorted(remaining, key=lambda v: degree_after(adj, v))
        for v in cands:
            deg = len(adj[v])
            new_max = max(current_max, deg)
            if new_max >= best_width:
                continue
            neigh = sorted(adj[v])
            added = []
            for i, a in enumerate(neigh):
                for b in neigh[i + 1:]:
                    if b not in adj[a]:
                        adj[a].add(b)
                        adj[b].add(a)
                        added.append((a, b))
            for a in neigh:
                adj[a].discard(v)
            order.append(v)
            search(adj, remaining - {v}, new_max, order)
            order.pop()
            for a in neigh:
                adj[a].add(v)
            for a, b in added:
                adj[a].discard(b)
                adj[b].discard(a)

    adj = {v: set(g.neighbors(v)) for v in verts}
    search(adj, frozenset(verts), 0, [])
    return decomposition_from_order(g, best_order)


def validate(td: TreeDecomposition, g: Graph) -> CheckResult:
    """Check decomposition invariants; for nice decompositions also the
    per-node shape rules and empty leaf/root bags."""
    n = len(td.bags)
    if td.root < 0 or td.root >= n or td.parent[td.root] != -1:
        return CheckResult(False, "bad root")
    # every vertex in some bag, occurrences connected
    tops = {}
    for i, bag in enumerate(td.bags):
        for v in bag:
            p = td.parent[i]
            if p == -1 or v not in td.bags[p]:
                if v in tops:
                    return CheckResult(
                        False, "occurrences of vertex %d are disconnected" % v)
                tops[v] = i
    for v in g.vertices():
        if v not in tops:
            return CheckResult(False, "vertex %d in no bag" % v)
    for u, v in g.edges():
        if not any(u in bag and v in bag for bag in td.bags):
            return CheckResult(False, "edge {%d,%d} covered by no bag" % (u, v))

    if isinstance(td, NiceTreeDecomposition):
        for i in range(n):
            kind = td.kinds[i]
            kids = td.children[i]
            bag = td.bags[i]
            if kind == LEAF:
                if kids or bag:
                    return CheckResult(False, "leaf node %d not an empty leaf" % i)
            elif kind == INTRODUCE:
                v = td.kind_vars[i]
                if len(kids) != 1 or v in td.bags[kids[0]] or \
                        bag != td.bags[kids[0]] | {v}:
                    return CheckResult(False, "bad introduce node %d" % i)
            elif kind == FORGET:
                v = td.kind_vars[i]
                if len(kids) != 1 or v not in td.bags[kids[0]] or \
                        bag != td.bags[kids[0]] - {v}:
                    return CheckResult(False, "bad forget node %d" % i)
            elif kind == JOIN:
                if len(kids) != 2 or any(td.bags[k] != bag for k in kids):
                    return CheckResult(False, "bad join node %d" % i)
            else:
                return CheckResult(False, "unknown node kind %r" % kind)
        if td.bags[td.root]:
            return CheckResult(False, "root bag not empty")
    return CheckResult(True)


class _NiceBuilder:
    def __init__(self):
        self.bags = []
        self.parent = []
        self.kinds = []
        self.kind_vars = []

    def add(self, bag, kind, var=None) -> int:
        self.bags.append(frozenset(bag))
        self.parent.append(-1)
        self.kinds.append(kind)
        self.kind_vars.append(var)
        return len(self.bags) - 1

    def link(self, child, parent):
        self.parent[child] = parent


def make_nice(td: TreeDecomposition) -> NiceTreeDecomposition:
    """Rebuild a valid decomposition with introduce/forget/join nodes only.

    Chains between adjacent bags forget then introduce in ascending variable
    order; joins with more than two children are binarized as a left comb.
    The width never changes.  Iterative so deep decompositions are fine.
    """
    b = _NiceBuilder()

    def intro_chain_up(top_node, from_bag, to_bag):
        """Nodes from from_bag up to to_bag (from_bag ⊆ to_bag); returns top id."""
        bag = set(from_bag)
        node = top_node
        for v in sorted(to_bag - from_bag):
            bag.add(v)
            nxt = b.add(bag, INTRODUCE, v)
            b.link(node, nxt)
            node = nxt
        return node

    def forget_chain_up(top_node, from_bag, to_bag):
        bag = set(from_bag)
        node = top_node
        for v in sorted(from_bag - to_bag):
            bag.discard(v)
            nxt = b.add(bag, FORGET, v)
            b.link(node, nxt)
            node = nxt
        return node

    def chain_between(node, from_bag, to_bag):
        mid = from_bag & to_bag
        node = forget_chain_up(node, from_bag, mid)
        return intro_chain_up(node, mid, to_bag)

    # post-order build: each original node yields a nice subtree topped by its bag
    top_of = {}
    for t in td.postorder():
        bag = td.bags[t]
        kids = td.children[t]
        if not kids:
            leaf = b.add(frozenset(), LEAF)
            top_of[t] = intro_chain_up(leaf, frozenset(), bag)
            continue
        branches = [chain_between(top_of[k], td.bags[k], bag) for k in kids]
        node = branches[0]
        for other in branches[1:]:
            join = b.add(bag, JOIN)
            b.link(node, join)
            b.link(other, join)
            node = join
        top_of[t] = node

    root_top = forget_chain_up(top_of[td.root], td.bags[td.root], frozenset())
    return NiceTreeDecomposition(b.bags, b.parent, root_top, b.kinds, b.kind_vars)
