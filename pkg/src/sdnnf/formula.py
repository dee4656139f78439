"""CNF and QBF formulas, DIMACS/QDIMACS parsing, and the primal graph."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


class ParseError(Exception):
    """Raised on malformed DIMACS/QDIMACS input; carries the offending line."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)


@dataclass(frozen=True, order=True)
class Literal:
    """A variable occurrence with a sign.  ``var`` is a 1-based id."""

    var: int
    positive: bool = True

    def __post_init__(self):
        if self.var < 1:
            raise ValueError("variable ids are positive integers, got %r" % (self.var,))

    @staticmethod
    def from_int(lit: int) -> "Literal":
        if lit == 0:
            raise ValueError("0 is not a literal")
        return Literal(abs(lit), lit > 0)

    def to_int(self) -> int:
        return self.var if self.positive else -self.var

    def negate(self) -> "Literal":
        return Literal(self.var, not self.positive)

    def __str__(self):
        return str(self.to_int())


@dataclass(frozen=True)
class Clause:
    """A disjunction of literals over distinct variables.

    Duplicate literals are collapsed on construction.  A clause that contains
    both ``x`` and ``not x`` is kept with both occurrences and flagged
    ``tautology``; downstream code treats such clauses as always satisfied.
    """

    literals: tuple[Literal, ...]
    tautology: bool = field(default=False, compare=False)

    def __init__(self, literals: Iterable[Literal]):
        seen = {}
        out = []
        taut = False
        for lit in literals:
            prev = seen.get(lit.var)
            if prev is None:
                seen[lit.var] = lit.positive
                out.append(lit)
            elif prev != lit.positive:
                taut = True
                out.append(lit)
                seen[lit.var] = lit.positive
            # same literal twice: collapsed
        object.__setattr__(self, "literals", tuple(out))
        object.__setattr__(self, "tautology", taut)

    def __len__(self):
        return len(self.literals)

    def variables(self) -> frozenset[int]:
        return frozenset(lit.var for lit in self.literals)

    def __str__(self):
        return " ".join(str(lit) for lit in self.literals) + " 0"


@dataclass(frozen=True)
class CnfFormula:
    """A CNF formula over variables ``1..num_vars``.

    Variables declared in the header but occurring in no clause are genuine
    (unconstrained) variables; model counts range over all declared variables.
    """

    num_vars: int
    clauses: tuple[Clause, ...]

    def __init__(self, num_vars: int, clauses: Iterable[Clause]):
        clauses = tuple(clauses)
        for cl in clauses:
            for lit in cl.literals:
                if lit.var > num_vars:
                    raise ValueError("literal %s out of range 1..%d" % (lit, num_vars))
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "clauses", clauses)

    def size(self) -> int:
        """Total number of literal occurrences."""
        return sum(len(cl) for cl in self.clauses)

    def variables(self) -> frozenset[int]:
        return frozenset(range(1, self.num_vars + 1))

    def to_dimacs(self) -> str:
        lines = ["p cnf %d %d" % (self.num_vars, len(self.clauses))]
        lines.extend(str(cl) for cl in self.clauses)
        return "\n".join(lines) + "\n"


EXISTS = "e"
FORALL = "a"


@dataclass(frozen=True)
class QbfFormula:
    """A prenex QBF: alternating quantifier blocks over a CNF matrix.

    Adjacent blocks carry distinct quantifiers and blocks are pairwise
    disjoint.  Matrix variables in no block are free.  The innermost block is
    not forced to be existential; the solver handles either polarity.
    """

    prefix: tuple[tuple[str, frozenset[int]], ...]
    matrix: CnfFormula

    def __init__(self, prefix, matrix: CnfFormula):
        prefix = tuple((q, frozenset(xs)) for q, xs in prefix)
        seen: set[int] = set()
        prev_q = None
        for q, xs in prefix:
            if q not in (EXISTS, FORALL):
                raise ValueError("unknown quantifier %r" % (q,))
            if not xs:
                raise ValueError("empty quantifier block")
            if q == prev_q:
                raise ValueError("adjacent blocks share quantifier %r" % (q,))
            if seen & xs:
                raise ValueError("variables quantified twice: %s" % sorted(seen & xs))
            for v in xs:
                if not 1 <= v <= matrix.num_vars:
                    raise ValueError("quantified variable %d out of range" % v)
            seen |= xs
            prev_q = q
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "matrix", matrix)

    def quantified_variables(self) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for _, xs in self.prefix:
            out |= xs
        return out

    def free_variables(self) -> frozenset[int]:
        return self.matrix.variables() - self.quantified_variables()

    def alternation(self) -> int:
        return len(self.prefix)

    def to_qdimacs(self) -> str:
        lines = ["p cnf %d %d" % (self.matrix.num_vars, len(self.matrix.clauses))]
        for q, xs in self.prefix:
            lines.append("%s %s 0" % (q, " ".join(str(v) for v in sorted(xs))))
        lines.extend(str(cl) for cl in self.matrix.clauses)
        return "\n".join(lines) + "\n"


class Graph:
    """Simple undirected graph on vertices ``1..n`` without self-loops."""

    def __init__(self, num_vertices: int):
        self.num_vertices = num_vertices
        self.adj: list[set[int]] = [set() for _ in range(num_vertices + 1)]

    def add_edge(self, u: int, v: int):
        if u == v:
            return
        if not (1 <= u <= self.num_vertices and 1 <= v <= self.num_vertices):
            raise ValueError("vertex out of range: %d-%d" % (u, v))
        self.adj[u].add(v)
        self.adj[v].add(u)

    def neighbors(self, v: int) -> set[int]:
        return self.adj[v]

    def edges(self):
        for u in range(1, self.num_vertices + 1):
            for v in self.adj[u]:
                if u < v:
                    yield (u, v)

    def num_edges(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def vertices(self):
        return range(1, self.num_vertices + 1)


def primal_graph(formula: CnfFormula) -> Graph:
    """Graph on the variables; each clause's variable set forms a clique."""
    g = Graph(formula.num_vars)
    for cl in formula.clauses:
        vs = sorted(cl.variables())
        for i, u in enumerate(vs):
            for v in vs[i + 1:]:
                g.add_edge(u, v)
    return g


def _tokenize(text: str):
    """Yield (token, line_number) skipping comment lines."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        for tok in stripped.split():
            yield tok, lineno


def _read_header(tokens, kind="cnf"):
    try:
        tok, line = next(tokens)
    except StopIteration:
        raise ParseError("missing 'p %s' header" % kind) from None
    if tok != "p":
        raise ParseError("expected 'p %s' header, got %r" % (kind, tok), line)
    try:
        fmt = next(tokens)[0]
        nv_tok, line = next(tokens)
        nc_tok, line = next(tokens)
        num_vars, num_clauses = int(nv_tok), int(nc_tok)
    except (StopIteration, ValueError):
        raise ParseError("malformed header", line) from None
    if fmt != kind or num_vars < 0 or num_clauses < 0:
        raise ParseError("malformed header 'p %s %s %s'" % (fmt, nv_tok, nc_tok), line)
    return num_vars, num_clauses


def _read_clauses(tokens, num_vars, num_clauses):
    clauses = []
    current: list[Literal] = []
    last_line = None
    for tok, line in tokens:
        last_line = line
        try:
            lit = int(tok)
        except ValueError:
            raise ParseError("expected literal, got %r" % tok, line) from None
        if lit == 0:
            clauses.append(Clause(current))
            current = []
            continue
        if abs(lit) > num_vars:
            raise ParseError("literal %d out of range 1..%d" % (lit, num_vars), line)
        current.append(Literal.from_int(lit))
    if current:
        raise ParseError("clause missing terminating 0", last_line)
    if len(clauses) != num_clauses:
        raise ParseError(
            "header declares %d clauses but %d found" % (num_clauses, len(clauses)),
            last_line,
        )
    return clauses


def parse_dimacs(text) -> CnfFormula:
    """Parse DIMACS CNF.  Comment lines starting with 'c' are ignored anywhere."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    tokens = _tokenize(text)
    num_vars, num_clauses = _read_header(tokens)
    clauses = _read_clauses(tokens, num_vars, num_clauses)
    return CnfFormula(num_vars, clauses)


def parse_qdimacs(text) -> QbfFormula:
    """Parse QDIMACS.  Consecutive same-quantifier lines merge into one block."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    tokens = _tokenize(text)
    num_vars, num_clauses = _read_header(tokens)

    blocks: list[tuple[str, set[int]]] = []
    quantified: set[int] = set()
    pending = None  # first literal token after the prefix
    for tok, line in tokens:
        if tok in (EXISTS, FORALL):
            block: set[int] = set()
            for vtok, vline in tokens:
                try:
                    v = int(vtok)
                except ValueError:
                    raise ParseError("expected variable, got %r" % vtok, vline) from None
                if v == 0:
                    break
                if v < 0 or v > num_vars:
                    raise ParseError("quantified variable %d out of range" % v, vline)
                if v in quantified:
                    raise ParseError("variable %d quantified twice" % v, vline)
                quantified.add(v)
                block.add(v)
            else:
                raise ParseError("quantifier line missing terminating 0", line)
            if not block:
                raise ParseError("empty quantifier block", line)
            if blocks and blocks[-1][0] == tok:
                blocks[-1][1].update(block)
            else:
                blocks.append((tok, block))
        else:
            pending = (tok, line)
            break

    def remaining():
        if pending is not None:
            yield pending
        yield from tokens

    clauses = _read_clauses(remaining(), num_vars, num_clauses)
    matrix = CnfFormula(num_vars, clauses)
    return QbfFormula(blocks, matrix)
