"""Permanent side: weighted digraphs, Ryser's formula, the 3x3 coupling
gadget, rosettes and the reduction of exponential sums over a formula to a
permanent projection."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .abp import is_variable, prune, weakly_skew_to_abp
from .circuit import Circuit, classify
from .det_embed import PER, ProjectionMatrix, simple_abp
from .errors import (
    BudgetExceeded,
    CharacteristicTwo,
    CircuitSyntaxError,
    DuplicateEdge,
    NotAFormula,
    SharedEndpoints,
    SizeBoundViolated,
    UnknownVariable,
    UnusedYVariable,
)
from .field import Field, Raw, field_from_spec
from .matrices import (
    entry_value,
    is_var_entry,
    leibniz,
    matrix_variables,
    symbolic_per,
)
from .poly import DEFAULT_BUDGET, SparsePolynomial, expand

# ----------------------------------------------------------------------
# digraphs


class WeightedDigraph:
    """Digraph with at most one edge per ordered node pair (loops allowed).

    Weights are raw constants or variable names; the permanent of the
    adjacency matrix sums the weights of all cycle covers.
    """

    def __init__(self, field: Field, variables: Sequence[str] = ()):
        self.field = field
        self.variables = tuple(variables)
        self.nodes: list = []
        self._node_set: set = set()
        self.edges: dict[tuple, object] = {}

    def add_node(self, v) -> None:
        if v not in self._node_set:
            self._node_set.add(v)
            self.nodes.append(v)

    def add_edge(self, u, v, w) -> None:
        if (u, v) in self.edges:
            raise DuplicateEdge(f"edge {u}->{v} already present")
        if is_variable(w) and w not in self.variables:
            raise UnknownVariable(w)
        self.add_node(u)
        self.add_node(v)
        self.edges[(u, v)] = w

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def matrix(self, order: Sequence | None = None) -> list[list]:
        order = list(self.nodes if order is None else order)
        pos = {v: k for k, v in enumerate(order)}
        f = self.field
        m = [[f.zero] * len(order) for _ in order]
        for (u, v), w in self.edges.items():
            m[pos[u]][pos[v]] = w
        return m

    def permanent(self, method: str = "auto", budget: int = DEFAULT_BUDGET) -> SparsePolynomial:
        return symbolic_per(self.matrix(), self.field, self.variables, method, budget)

    def edge_list(self) -> list[tuple]:
        return [(u, v, w) for (u, v), w in self.edges.items()]


def digraph_from_edges(field: Field, variables, nodes, edges) -> WeightedDigraph:
    g = WeightedDigraph(field, variables)
    for v in nodes:
        g.add_node(v)
    for u, v, w in edges:
        g.add_edge(u, v, w)
    return g


def serialize_digraph(g: WeightedDigraph) -> str:
    f = g.field
    lines = ["digraph", f"field {f.spec()}"]
    if g.variables:
        lines.append("var " + " ".join(g.variables))
    lines.extend(f"node {v}" for v in g.nodes)
    for (u, v), w in g.edges.items():
        wt = w if is_variable(w) else f.format(w)
        lines.append(f"loop {u} {wt}" if u == v else f"edge {u} {v} {wt}")
    return "\n".join(lines) + "\n"


def parse_digraph(text: str) -> WeightedDigraph:
    from .abp import parse_weight

    g = None
    field = None
    variables: list[str] = []
    pending = []
    header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0]
        if head == "digraph" and len(toks) == 1:
            header = True
        elif head == "field":
            field = field_from_spec(" ".join(toks[1:]))
        elif head == "var":
            variables.extend(toks[1:])
        elif head in ("node", "edge", "loop"):
            pending.append((lineno, toks))
        else:
            raise CircuitSyntaxError(lineno, f"cannot parse {line!r}")
    if not header or field is None:
        raise CircuitSyntaxError(1, "digraph file needs 'digraph' and field lines")
    g = WeightedDigraph(field, variables)
    for lineno, toks in pending:
        if toks[0] == "node" and len(toks) == 2:
            g.add_node(toks[1])
        elif toks[0] == "edge" and len(toks) == 4:
            g.add_edge(toks[1], toks[2], parse_weight(toks[3], field, variables))
        elif toks[0] == "loop" and len(toks) == 3:
            g.add_edge(toks[1], toks[1], parse_weight(toks[2], field, variables))
        else:
            raise CircuitSyntaxError(lineno, f"cannot parse {' '.join(toks)!r}")
    return g


# ----------------------------------------------------------------------
# cycle covers of multigraphs


def edge_cycle_covers(nodes: Sequence, edges: Sequence[tuple]) -> Iterable[tuple[int, ...]]:
    """Cycle covers of a digraph that may have parallel edges, each given as
    the tuple of edge indices it uses (one outgoing edge per node)."""
    pos = {v: k for k, v in enumerate(nodes)}
    n = len(nodes)
    out: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for k, (u, v, _w) in enumerate(edges):
        out[pos[u]].append((pos[v], k))
    chosen = [-1] * n
    covered = [False] * n

    def extend(start: int, cur: int):
        for j, k in out[cur]:
            if j == start:
                chosen[cur] = k
                yield from new_cycle()
                chosen[cur] = -1
            elif not covered[j] and j > start:
                covered[j] = True
                chosen[cur] = k
                yield from extend(start, j)
                chosen[cur] = -1
                covered[j] = False

    def new_cycle():
        start = next((i for i in range(n) if not covered[i]), None)
        if start is None:
            yield tuple(chosen)
            return
        covered[start] = True
        yield from extend(start, start)
        covered[start] = False

    yield from new_cycle()


def cover_sum(field: Field, variables, nodes, edges, keep=None) -> SparsePolynomial:
    """Sum of cover weights over the covers accepted by ``keep`` (a predicate
    on the set of used edge indices)."""
    total = SparsePolynomial(field, variables)
    for cover in edge_cycle_covers(nodes, edges):
        used = set(cover)
        if keep is not None and not keep(used):
            continue
        term = SparsePolynomial.constant(field, 1, variables)
        for k in cover:
            w = edges[k][2]
            term = term * (SparsePolynomial.variable(field, w, variables) if is_variable(w)
                           else SparsePolynomial.constant(field, w, variables))
        total = total + term
    return total


def both_or_neither_sum(field: Field, variables, nodes, edges, pairs) -> SparsePolynomial:
    """Cover-weight sum restricted to covers that, for every pair of edge
    indices, use both edges or neither."""
    return cover_sum(field, variables, nodes, edges,
                     lambda used: all((a in used) == (b in used) for a, b in pairs))


# ----------------------------------------------------------------------
# the coupling gadget


def k_gadget(f: Field) -> list[list[Raw]]:
    if f.characteristic == 2:
        raise CharacteristicTwo("the coupling gadget needs 1/2")
    h = f.half()
    return [[f.minus_one, f.one, h], [f.one, f.one, f.neg(h)], [f.one, f.one, f.neg(h)]]


def submatrix_without(m, rows: Sequence[int], cols: Sequence[int]):
    """Remove the given 1-based rows and columns."""
    return [
        [x for j, x in enumerate(row, 1) if j not in cols]
        for i, row in enumerate(m, 1)
        if i not in rows
    ]


def numeric_per(m, f: Field) -> Raw:
    if not m:
        return f.one
    return leibniz(m, f, False, ()).coefficient({}).value


def k_identities(f: Field) -> dict[str, Raw]:
    k = k_gadget(f)
    cases = {
        "per(K)": ((), ()),
        "per(K[2,3|1,3])": ((2, 3), (1, 3)),
        "per(K[2|1])": ((2,), (1,)),
        "per(K[2|3])": ((2,), (3,)),
        "per(K[3|1])": ((3,), (1,)),
        "per(K[3|3])": ((3,), (3,)),
    }
    return {name: numeric_per(submatrix_without(k, r, c), f) for name, (r, c) in cases.items()}


EXPECTED_K = {
    "per(K)": 1,
    "per(K[2,3|1,3])": 1,
    "per(K[2|1])": 0,
    "per(K[2|3])": 0,
    "per(K[3|1])": 0,
    "per(K[3|3])": 0,
}


def _check_k(f: Field) -> None:
    got = k_identities(f)
    bad = {k: v for k, v in got.items() if v != f.coerce(EXPECTED_K[k])}
    assert not bad, f"coupling gadget identities fail: {bad}"


class EdgeMultigraph:
    """Mutable node list plus edges keyed by integer ids (parallel edges allowed)."""

    def __init__(self, field: Field, variables=()):
        self.field = field
        self.variables = tuple(variables)
        self.nodes: list = []
        self.edges: dict[int, tuple] = {}
        self._next = 0

    def add_node(self, v) -> None:
        self.nodes.append(v)

    def add_edge(self, u, v, w) -> int:
        k = self._next
        self._next += 1
        self.edges[k] = (u, v, w)
        return k

    def edge_list(self) -> tuple[list[int], list[tuple]]:
        ids = sorted(self.edges)
        return ids, [self.edges[k] for k in ids]

    def to_digraph(self) -> WeightedDigraph:
        g = WeightedDigraph(self.field, self.variables)
        for v in self.nodes:
            g.add_node(v)
        for k in sorted(self.edges):
            g.add_edge(*self.edges[k])
        return g


def couple(g: EdgeMultigraph, c: int, c2: int, tag: str) -> tuple[str, str, str]:
    """Insert the gadget between edges ``c`` and ``c2`` (edge ids) in place.

    c = (u, v) becomes u -> p1 (old weight) and p2 -> v (weight 1);
    c2 = (u2, v2) becomes u2 -> p3 (old weight) and p3 -> v2 (weight 1);
    the gadget entries give the edges among p1, p2, p3.  Either edge may be
    a loop; the two edges must not share an endpoint.
    """
    f = g.field
    k = k_gadget(f)
    u, v, w = g.edges[c]
    u2, v2, w2 = g.edges[c2]
    if {u, v} & {u2, v2}:
        raise SharedEndpoints(f"edges {u}->{v} and {u2}->{v2} share an endpoint")
    p = (f"{tag}p1", f"{tag}p2", f"{tag}p3")
    for x in p:
        g.add_node(x)
    del g.edges[c]
    del g.edges[c2]
    g.add_edge(u, p[0], w)
    g.add_edge(p[1], v, f.one)
    g.add_edge(u2, p[2], w2)
    g.add_edge(p[2], v2, f.one)
    for i in range(3):
        for j in range(3):
            if k[i][j]:
                g.add_edge(p[i], p[j], k[i][j])
    return p


def iff_couple(g: WeightedDigraph, c: tuple, c2: tuple, tag: str = "k") -> WeightedDigraph:
    """Digraph whose permanent is the cover sum of ``g`` over covers that use
    both edges ``c`` and ``c2`` or neither."""
    _check_k(g.field)
    for e in (c, c2):
        if e not in g.edges:
            raise KeyError(f"no edge {e[0]}->{e[1]}")
    m = EdgeMultigraph(g.field, g.variables)
    m.nodes = list(g.nodes)
    ids = {}
    for e, w in g.edges.items():
        ids[e] = m.add_edge(e[0], e[1], w)
    while any(x.startswith(tag) for x in map(str, g.nodes)):
        tag += "_"
    couple(m, ids[c], ids[c2], tag)
    return m.to_digraph()


# ----------------------------------------------------------------------
# rosettes


@dataclass
class Rosette:
    mu: int
    nodes: list
    edges: list  # (u, v, w); for mu = 1 the connector is a second loop at u1
    connectors: list[int]  # indices into edges


def build_rosette(mu: int, f: Field, prefix: str = "") -> Rosette:
    """Cycle u1 -> ... -> u_mu of connector edges, a detour u_i -> v_i ->
    u_{i+1} next to each connector and a loop at every node."""
    if mu < 1:
        raise ValueError("rosette needs mu >= 1")
    u = [f"{prefix}u{i + 1}" for i in range(mu)]
    v = [f"{prefix}v{i + 1}" for i in range(mu)]
    edges: list[tuple] = []
    connectors = []
    for i in range(mu):
        connectors.append(len(edges))
        edges.append((u[i], u[(i + 1) % mu], f.one))
    for i in range(mu):
        edges.append((u[i], v[i], f.one))
        edges.append((v[i], u[(i + 1) % mu], f.one))
    for x in u + v:
        edges.append((x, x, f.one))
    nodes = [x for pair in zip(u, v) for x in pair]
    return Rosette(mu, nodes, edges, connectors)


def rosette_digraph(r: Rosette, f: Field) -> WeightedDigraph:
    """The rosette as a simple digraph; only defined for mu >= 2, since for
    mu = 1 the connector is parallel to the loop at u1."""
    return digraph_from_edges(f, (), r.nodes, r.edges)


# ----------------------------------------------------------------------
# formulas and exponential sums


def formula_to_per_digraph(c: Circuit) -> WeightedDigraph:
    """Digraph whose permanent is the polynomial of the formula ``c``.

    Source and sink of the formula's branching program are merged into node
    n0 and every other node gets a loop of weight 1; each source-sink path
    then closes into the one non-loop cycle of a cover.
    """
    if not classify(c).is_formula:
        raise NotAFormula("expected a formula")
    a = simple_abp(prune(weakly_skew_to_abp(c)))
    inner = [v for v in a.order if v not in (a.source, a.sink)]
    name = {a.source: "n0", a.sink: "n0"}
    for k, v in enumerate(inner, 1):
        name[v] = f"n{k}"
    g = WeightedDigraph(c.field, c.variables)
    g.add_node("n0")
    for v in inner:
        g.add_node(name[v])
    f = c.field
    for u, v, w in a.edges:
        if is_variable(w) or w != f.zero:
            g.add_edge(name[u], name[v], w)
    for v in inner:
        g.add_edge(name[v], name[v], f.one)
    return g


def sum_over_cube(p: SparsePolynomial, ys: Sequence[str]) -> SparsePolynomial:
    """Sum of p over all 0/1 assignments of the variables ``ys``."""
    total = p
    rest = tuple(v for v in p.variables if v not in ys)
    for y in ys:
        total = total.substitute({y: 0}) + total.substitute({y: 1})
    return total.with_variables(rest) if total.occurring_variables() <= set(rest) else total


@dataclass(frozen=True)
class SumToPerReport:
    matrix: ProjectionMatrix
    digraph: WeightedDigraph
    formula_nodes: int
    multiplicities: tuple[int, ...]
    size_bound: int

    @property
    def side(self) -> int:
        return self.matrix.side


def valiant_sum_to_per(g: Circuit, y_vars: Sequence[str], s: int | None = None) -> SumToPerReport:
    """Matrix over constants and the remaining variables whose permanent is
    the sum of ``g`` over all 0/1 values of ``y_vars``.

    Every edge of the formula's digraph carrying y_i is given weight 1 and
    coupled to a connector of a private rosette with one connector per
    occurrence of y_i.
    """
    f = g.field
    if f.characteristic == 2:
        raise CharacteristicTwo("the reduction needs characteristic other than 2")
    for y in y_vars:
        if y not in g.variables:
            raise UnknownVariable(y)
    s = g.size + 1 if s is None else s
    if g.size >= s:
        raise ValueError(f"formula size {g.size} is not below s = {s}")
    _check_k(f)
    base = formula_to_per_digraph(g)
    xs = tuple(v for v in g.variables if v not in y_vars)
    m = EdgeMultigraph(f, xs)
    m.nodes = list(base.nodes)
    d_edges: dict[str, list[int]] = {y: [] for y in y_vars}
    for (u, v), w in base.edges.items():
        if is_variable(w) and w in d_edges:
            d_edges[w].append(m.add_edge(u, v, f.one))
        else:
            m.add_edge(u, v, w)
    mus = tuple(len(d_edges[y]) for y in y_vars)
    for y, mu in zip(y_vars, mus):
        if mu == 0:
            raise UnusedYVariable(y)
    couplings = []
    for i, y in enumerate(y_vars):
        r = build_rosette(len(d_edges[y]), f, prefix=f"r{i + 1}")
        m.nodes.extend(r.nodes)
        ids = [m.add_edge(*e) for e in r.edges]
        for j, d in enumerate(d_edges[y]):
            couplings.append((ids[r.connectors[j]], d, f"c{i + 1}_{j + 1}"))
    for c, d, tag in couplings:
        couple(m, c, d, tag)
    graph = m.to_digraph()
    expected_nodes = base.num_nodes + 5 * sum(mus)
    if graph.num_nodes != expected_nodes or graph.num_nodes > 6 * s:
        raise SizeBoundViolated(
            f"{graph.num_nodes} nodes (expected {expected_nodes}, bound {6 * s})"
        )
    target = sum_over_cube(expand(g), y_vars).with_variables(xs)
    pm = ProjectionMatrix(
        f, xs, tuple(tuple(r) for r in graph.matrix()), PER, target,
        (
            f"formula of size {g.size}, s = {s}",
            f"formula digraph: {base.num_nodes} nodes",
            "occurrences per summed variable: " + ", ".join(map(str, mus)),
            f"after coupling: {graph.num_nodes} nodes (bound {6 * s})",
        ),
    )
    return SumToPerReport(pm, graph, base.num_nodes, mus, 6 * s)


# ----------------------------------------------------------------------
# permanents


def brute_per(m, f: Field, variables=None) -> SparsePolynomial:
    """Permanent by enumerating all permutations."""
    if len(m) > 7:
        raise BudgetExceeded(f"brute-force permanent limited to n <= 7, got {len(m)}")
    return leibniz(m, f, False, variables)


@njit(cache=True)
def _ryser_kernel(a, order, p, logt, expt):
    """Ryser's formula mod p for a batch of matrices sharing one zero pattern.

    ``a`` has shape (points, n, n).  Column subsets are enumerated depth
    first in ``order``; a branch is cut as soon as some row has all its
    support columns excluded, since every subset below it gives a zero
    product.  With log tables (``logt`` nonempty) the product of the row
    sums is kept as a discrete-log sum plus a count of zero rows.
    """
    pts, n = a.shape[0], a.shape[1]
    support = np.zeros((n, n), np.int64)  # column -> rows with a nonzero
    counts = np.zeros(n, np.int64)
    rem = np.zeros(n, np.int64)  # undecided support columns per row
    for j in range(n):
        for i in range(n):
            nz = False
            for t in range(pts):
                if a[t, i, j]:
                    nz = True
            if nz:
                support[j, counts[j]] = i
                counts[j] += 1
                rem[i] += 1
    total = np.zeros(pts, np.int64)
    for i in range(n):
        if rem[i] == 0:
            return total
    use_logs = logt.shape[0] > 0
    hit = np.zeros(n, np.int64)
    rowsum = np.zeros((pts, n), np.int64)
    zeros = np.full(pts, n, np.int64)
    logsum = np.zeros(pts, np.int64)
    choice = np.full(n + 1, -1, np.int64)
    chosen = 0
    depth = 0
    while depth >= 0:
        if depth == n:
            neg = (n - chosen) & 1
            for t in range(pts):
                if use_logs:
                    if zeros[t]:
                        continue
                    val = expt[logsum[t] % (p - 1)]
                else:
                    val = 1
                    for i in range(n):
                        val = val * rowsum[t, i] % p
                if neg:
                    total[t] = (total[t] - val) % p
                else:
                    total[t] = (total[t] + val) % p
            depth -= 1
            continue
        j = order[depth]
        c = choice[depth]
        if c >= 0:
            for k in range(counts[j]):
                i = support[j, k]
                rem[i] += 1
                if c == 1:
                    hit[i] -= 1
                    for t in range(pts):
                        old = rowsum[t, i]
                        new = old - a[t, i, j]
                        if new < 0:
                            new += p
                        if use_logs:
                            if old:
                                logsum[t] -= logt[old]
                            else:
                                zeros[t] -= 1
                            if new:
                                logsum[t] += logt[new]
                            else:
                                zeros[t] += 1
                        rowsum[t, i] = new
            if c == 1:
                chosen -= 1
                choice[depth] = -1
                depth -= 1
                continue
        c += 1
        choice[depth] = c
        dead = False
        for k in range(counts[j]):
            i = support[j, k]
            rem[i] -= 1
            if c == 1:
                hit[i] += 1
                for t in range(pts):
                    old = rowsum[t, i]
                    new = old + a[t, i, j]
                    if new >= p:
                        new -= p
                    if use_logs:
                        if old:
                            logsum[t] -= logt[old]
                        else:
                            zeros[t] -= 1
                        if new:
                            logsum[t] += logt[new]
                        else:
                            zeros[t] += 1
                    rowsum[t, i] = new
            elif rem[i] == 0 and hit[i] == 0:
                dead = True
        if c == 1:
            chosen += 1
        if not dead:
            depth += 1
            choice[depth] = -1
    return total


def _primitive_root(p: int) -> int:
    if p == 2:
        return 1
    q, m, factors = 2, p - 1, set()
    while q * q <= m:
        while m % q == 0:
            factors.add(q)
            m //= q
        q += 1
    if m > 1:
        factors.add(m)
    for g in range(2, p):
        if all(pow(g, (p - 1) // r, p) != 1 for r in factors):
            return g
    raise ValueError(p)


_LOG_TABLES: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _log_tables(p: int):
    if p >= (1 << 20):
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    if p not in _LOG_TABLES:
        g = _primitive_root(p)
        expt = np.zeros(p - 1, np.int64)
        logt = np.zeros(p, np.int64)
        x = 1
        for k in range(p - 1):
            expt[k] = x
            logt[x] = k
            x = x * g % p
        _LOG_TABLES[p] = (logt, expt)
    return _LOG_TABLES[p]


def _column_order(pattern) -> np.ndarray:
    """Columns in breadth-first order over shared rows, so that row supports
    are completed early and dead branches are cut high in the search."""
    n = len(pattern)
    cols_of_row = [[j for j in range(n) if pattern[i][j]] for i in range(n)]
    rows_of_col = [[i for i in range(n) if pattern[i][j]] for j in range(n)]
    seen = [False] * n
    order: list[int] = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        queue = [start]
        while queue:
            j = queue.pop(0)
            order.append(j)
            for i in rows_of_col[j]:
                for k in cols_of_row[i]:
                    if not seen[k]:
                        seen[k] = True
                        queue.append(k)
    return np.array(order, dtype=np.int64)


def ryser_batch(mats: Sequence[Sequence[Sequence[Raw]]], f: Field) -> list[Raw]:
    """Permanents of several constant matrices of one side over 𝔽_p, p < 2^31."""
    p = f.characteristic
    n = len(mats[0])
    if n == 0:
        return [f.one] * len(mats)
    arr = np.array([[[f.coerce(x) for x in row] for row in m] for m in mats], dtype=np.int64)
    pattern = (arr != 0).any(axis=0)
    logt, expt = _log_tables(p)
    return [int(v) for v in _ryser_kernel(arr, _column_order(pattern.tolist()), p, logt, expt)]


def _ryser_generic(a, f: Field) -> Raw:
    n = len(a)
    rowsum = [f.zero] * n
    total = f.zero
    gray = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        gray ^= 1 << j
        op = f.add if (gray >> j) & 1 else f.sub
        for i in range(n):
            if a[i][j]:
                rowsum[i] = op(rowsum[i], a[i][j])
        prod = f.one
        for x in rowsum:
            prod = f.mul(prod, x)
            if not prod:
                break
        if prod:
            total = f.sub(total, prod) if (n - bin(gray).count("1")) & 1 else f.add(total, prod)
    return total


def ryser_numeric(a: Sequence[Sequence[Raw]], f: Field) -> Raw:
    """Permanent of a constant matrix, n <= 30."""
    n = len(a)
    if n == 0:
        return f.one
    if n > 30:
        raise BudgetExceeded(f"Ryser limited to n <= 30, got {n}")
    a = [[f.coerce(x) for x in row] for row in a]
    p = f.characteristic
    if p and p < (1 << 31):
        return ryser_batch([a], f)[0]
    return _ryser_generic(a, f)


def ryser_symbolic(m, f: Field, variables=None, budget: int = DEFAULT_BUDGET) -> SparsePolynomial:
    """Ryser's formula with polynomial row sums."""
    variables = tuple(variables) if variables is not None else matrix_variables(m)
    n = len(m)
    if n and (1 << n) * n > 64 * budget:
        raise BudgetExceeded(f"2^{n} subsets exceed the budget")

    def entry_poly(e):
        if isinstance(e, str):
            return SparsePolynomial.variable(f, e, variables)
        if isinstance(e, tuple):
            return SparsePolynomial.variable(f, e[1], variables).scale(e[0])
        return SparsePolynomial.constant(f, e, variables)

    cells = [[entry_poly(e) for e in row] for row in m]
    total = SparsePolynomial.constant(f, 1 if n == 0 else 0, variables)
    for size in range(1, n + 1):
        sign = -1 if (n - size) % 2 else 1
        for cols in itertools.combinations(range(n), size):
            prod = SparsePolynomial.constant(f, 1, variables)
            for i in range(n):
                rs = SparsePolynomial(f, variables)
                for j in cols:
                    rs = rs + cells[i][j]
                prod = prod * rs
                if not prod.terms:
                    break
            if prod.terms:
                total = total + prod if sign > 0 else total - prod
                if len(total.terms) > budget:
                    raise BudgetExceeded(f"{len(total.terms)} terms")
    return total


def ryser(m, f: Field, variables=None, budget: int = DEFAULT_BUDGET):
    """Numeric permanent (raw value) for constant matrices, polynomial otherwise."""
    if any(is_var_entry(e) for row in m for e in row):
        return ryser_symbolic(m, f, variables, budget)
    return ryser_numeric(m, f)


def per_at(m, point, f: Field) -> Raw:
    """Ryser evaluation of a matrix of constants and variables at a point."""
    return ryser_numeric([[entry_value(e, point, f) for e in row] for row in m], f)


def per_at_points(m, points, f: Field) -> list[Raw]:
    """Ryser evaluation at several points in one pass (prime fields) or one
    by one (rationals)."""
    mats = [[[entry_value(e, pt, f) for e in row] for row in m] for pt in points]
    p = f.characteristic
    if p and p < (1 << 31) and len(m) <= 62:
        return ryser_batch(mats, f)
    return [ryser_numeric(x, f) for x in mats]
