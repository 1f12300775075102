"""Algebraic branching programs.

An ABP is an acyclic digraph with a source and a sink whose edges carry a
field constant or a variable.  It computes the sum over source-sink paths of
the product of the edge weights.
"""

from __future__ import annotations

import sys
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Mapping, Sequence

from .circuit import ADD, Circuit, CircuitBuilder, classify, unshare_inputs
from .errors import (
    CircuitSyntaxError,
    CycleDetected,
    MissingAssignment,
    NotWeaklySkew,
    UnknownGateRef,
    UnknownVariable,
)
from .field import Field, Raw, field_from_spec
from .poly import DEFAULT_BUDGET, SLOT, BudgetExceeded, SparsePolynomial, add_terms, mul_terms

Node = Hashable


def is_variable(w) -> bool:
    return isinstance(w, str)


@dataclass(frozen=True)
class Abp:
    field: Field
    variables: tuple[str, ...]
    nodes: tuple
    edges: tuple  # (from, to, weight); weight is a variable name or a raw constant
    source: Node
    sink: Node

    def __post_init__(self):
        nodeset = set(self.nodes)
        if len(nodeset) != len(self.nodes):
            raise ValueError("duplicate node ids")
        if self.source == self.sink:
            raise ValueError("source and sink must differ")
        for x in (self.source, self.sink):
            if x not in nodeset:
                raise UnknownGateRef(f"node {x}")
        varset = set(self.variables)
        for u, v, w in self.edges:
            if u not in nodeset or v not in nodeset:
                raise UnknownGateRef(f"edge {u}->{v}")
            if is_variable(w) and w not in varset:
                raise UnknownVariable(w)
        _ = self.order  # acyclicity

    @cached_property
    def order(self) -> tuple:
        """Topological order (Kahn), ties broken by node list position."""
        pos = {v: i for i, v in enumerate(self.nodes)}
        indeg = {v: 0 for v in self.nodes}
        succ = defaultdict(list)
        for u, v, _ in self.edges:
            indeg[v] += 1
            succ[u].append(v)
        import heapq

        ready = [pos[v] for v in self.nodes if indeg[v] == 0]
        heapq.heapify(ready)
        out = []
        while ready:
            u = self.nodes[heapq.heappop(ready)]
            out.append(u)
            for v in succ[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    heapq.heappush(ready, pos[v])
        if len(out) != len(self.nodes):
            raise CycleDetected("branching program graph has a cycle")
        return tuple(out)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def in_edges(self):
        ins = defaultdict(list)
        for u, v, w in self.edges:
            ins[v].append((u, w))
        return ins


# ----------------------------------------------------------------------
# semantics


def _weight_terms(w, f: Field, var_key: Mapping[str, int]) -> dict:
    if is_variable(w):
        return {var_key[w]: 1}
    return {0: w} if w else {}


def abp_expand(a: Abp, budget: int = DEFAULT_BUDGET) -> SparsePolynomial:
    """Path-weight sum by dynamic programming over a topological order."""
    f = a.field
    n = len(a.variables)
    var_key = {v: 1 << (SLOT * (n - 1 - i)) for i, v in enumerate(a.variables)}
    ins = a.in_edges()
    val: dict = {a.source: {0: 1}}
    for v in a.order:
        if v == a.source:
            continue
        acc: dict = {}
        for u, w in ins[v]:
            tu = val.get(u)
            if tu:
                acc = add_terms(acc, mul_terms(tu, _weight_terms(w, f, var_key), f), f)
        if len(acc) > budget:
            raise BudgetExceeded(f"node {v} carries {len(acc)} terms")
        val[v] = acc
    return SparsePolynomial(f, a.variables, val.get(a.sink, {}))


def abp_eval(a: Abp, point: Mapping[str, object]):
    f = a.field
    raw = {}
    for v in a.variables:
        if v in point:
            raw[v] = f.coerce(point[v])
    return f.element(abp_eval_raw(a, raw))


def abp_eval_raw(a: Abp, point: Mapping[str, Raw]) -> Raw:
    f = a.field
    ins = a.in_edges()
    val = {a.source: f.one}
    for v in a.order:
        if v == a.source:
            continue
        acc = f.zero
        for u, w in ins[v]:
            x = val.get(u)
            if x:
                if is_variable(w):
                    try:
                        w = point[w]
                    except KeyError:
                        raise MissingAssignment(w) from None
                acc = f.add(acc, f.mul(x, w))
        val[v] = acc
    return val.get(a.sink, f.zero)


def path_sum(a: Abp) -> SparsePolynomial:
    """The definition: enumerate every source-sink path (small programs only)."""
    f = a.field
    out = defaultdict(list)
    for u, v, w in a.edges:
        out[u].append((v, w))
    total = SparsePolynomial(f, a.variables)
    one = SparsePolynomial.constant(f, 1, a.variables)
    stack = [(a.source, one)]
    while stack:
        u, prod = stack.pop()
        if u == a.sink:
            total = total + prod
            continue
        for v, w in out[u]:
            wp = (
                SparsePolynomial.variable(f, w, a.variables)
                if is_variable(w)
                else SparsePolynomial.constant(f, w, a.variables)
            )
            stack.append((v, prod * wp))
    return total


def prune(a: Abp) -> Abp:
    """Drop nodes that lie on no source-sink path (and their edges)."""
    fwd, bwd = defaultdict(list), defaultdict(list)
    for u, v, _ in a.edges:
        fwd[u].append(v)
        bwd[v].append(u)

    def reach(start, adj):
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    alive = reach(a.source, fwd) & reach(a.sink, bwd)
    alive |= {a.source, a.sink}
    nodes = tuple(v for v in a.nodes if v in alive)
    edges = tuple(e for e in a.edges if e[0] in alive and e[1] in alive)
    return Abp(a.field, a.variables, nodes, edges, a.source, a.sink)


# ----------------------------------------------------------------------
# composition


def _tagged(a: Abp, tag: str, rename: dict):
    m = {v: rename.get(v, f"{tag}{v}") for v in a.nodes}
    return [m[v] for v in a.nodes], [(m[u], m[v], w) for u, v, w in a.edges], m


def _merge_vars(a: Abp, b: Abp) -> tuple[str, ...]:
    seen = list(a.variables)
    seen.extend(v for v in b.variables if v not in a.variables)
    return tuple(seen)


def series(a: Abp, b: Abp) -> Abp:
    """Identify the sink of ``a`` with the source of ``b``: the product."""
    na, ea, ma = _tagged(a, "L", {a.sink: "mid"})
    nb, eb, mb = _tagged(b, "R", {b.source: "mid"})
    nodes = na + [v for v in nb if v != "mid"]
    return Abp(a.field, _merge_vars(a, b), tuple(nodes), tuple(ea + eb), ma[a.source], mb[b.sink])


def parallel(a: Abp, b: Abp) -> Abp:
    """Identify the two sources and the two sinks: the sum."""
    na, ea, _ = _tagged(a, "L", {a.source: "s", a.sink: "t"})
    nb, eb, _ = _tagged(b, "R", {b.source: "s", b.sink: "t"})
    nodes = na + [v for v in nb if v not in ("s", "t")]
    return Abp(a.field, _merge_vars(a, b), tuple(nodes), tuple(ea + eb), "s", "t")


# ----------------------------------------------------------------------
# circuits <-> branching programs


def weakly_skew_to_abp(c: Circuit) -> Abp:
    """Branching program computing the first output of a weakly-skew circuit.

    Sums identify the sinks of their private summands; a product glues its
    private factor's program onto the sink of the other factor.  Gates used
    several times are built once and joined with weight-1 edges.
    """
    c = unshare_inputs(c.restrict())
    flags = classify(c)
    if not flags.is_weakly_skew:
        raise NotWeaklySkew("; ".join(f"{g}: {r}" for g, r in flags.failures.items()))
    idx = c.index
    ch = c.child_indices
    consumers = c.consumers
    gates = c.gates
    edges: list[tuple] = []
    count = [0]
    memo: dict[int, int] = {}
    connector: dict[tuple[int, int], int] = {}  # (from, to) -> edge position

    def new_node() -> int:
        count[0] += 1
        return count[0] - 1

    def private(i: int) -> bool:
        return len(consumers[i]) <= 1

    def shared(i: int, s: int) -> int:
        if i not in memo:
            memo[i] = build(i, s, None)
        return memo[i]

    def build(i: int, s: int, t: int | None) -> int:
        g = gates[i]
        if g.is_input:
            t = new_node() if t is None else t
            edges.append((s, t, g.args[0]))
            return t
        if g.op == ADD:
            t = new_node() if t is None else t
            for x in ch[i]:
                if private(x):
                    build(x, s, t)
                else:
                    # a reused gate is joined by a constant edge; repeated
                    # joins between the same nodes add up on one edge
                    u = shared(x, s)
                    k = connector.get((u, t))
                    if k is None:
                        connector[(u, t)] = len(edges)
                        edges.append((u, t, c.field.one))
                    else:
                        edges[k] = (u, t, c.field.add(edges[k][2], c.field.one))
            return t
        dist = idx[flags.distinguished[g.gid]]
        a, b = ch[i]
        other = b if dist == a else a
        mid = build(other, s, None) if private(other) else shared(other, s)
        return build(dist, mid, t)

    source = new_node()
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * len(gates) + 1000))
    try:
        sink = build(idx[c.outputs[0]], source, None)
    finally:
        sys.setrecursionlimit(limit)
    return Abp(c.field, c.variables, tuple(range(count[0])), tuple(edges), source, sink)


def abp_to_skew_circuit(a: Abp) -> Circuit:
    """Skew circuit whose gate for node v computes the source-to-v path sum."""
    a = prune(a)
    b = CircuitBuilder(a.field, a.variables, prefix="s")
    ins = a.in_edges()
    val: dict = {}

    def weight_gate(w) -> str:
        return b.input(w) if is_variable(w) else b.const(w)

    for v in a.order:
        if v == a.source:
            continue
        terms = []
        for u, w in ins[v]:
            if u == a.source:
                terms.append(weight_gate(w))
            elif u in val:
                if not is_variable(w) and w == a.field.one:
                    terms.append(val[u])
                else:
                    terms.append(b.mul(weight_gate(w), val[u]))
        if terms:
            acc = terms[0]
            for t in terms[1:]:
                acc = b.add(acc, t)
            val[v] = acc
    out = val.get(a.sink)
    if out is None:
        out = b.const(0)
    return b.build(out).restrict(out)


# ----------------------------------------------------------------------
# text format


def _fmt_weight(w, f: Field) -> str:
    return w if is_variable(w) else f.format(w)


def serialize_abp(a: Abp) -> str:
    lines = ["abp", f"field {a.field.spec()}"]
    if a.variables:
        lines.append("var " + " ".join(a.variables))
    lines.extend(f"node {v}" for v in a.nodes)
    lines.extend(f"edge {u} {v} {_fmt_weight(w, a.field)}" for u, v, w in a.edges)
    lines.append(f"source {a.source}")
    lines.append(f"sink {a.sink}")
    return "\n".join(lines) + "\n"


def parse_weight(tok: str, f: Field, variables: Sequence[str]):
    if tok[0].isalpha() or tok[0] == "_":
        if tok not in variables:
            raise UnknownVariable(tok)
        return tok
    return f.parse_literal(tok)


def parse_abp(text: str) -> Abp:
    field = None
    variables: list[str] = []
    nodes: list[str] = []
    edges = []
    source = sink = None
    header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0]
        if head == "abp" and len(toks) == 1:
            header = True
        elif head == "field":
            field = field_from_spec(" ".join(toks[1:]))
        elif head == "var":
            variables.extend(toks[1:])
        elif head == "node" and len(toks) == 2:
            nodes.append(toks[1])
        elif head == "edge" and len(toks) == 4:
            if field is None:
                raise CircuitSyntaxError(lineno, "field must precede edges")
            edges.append((toks[1], toks[2], parse_weight(toks[3], field, variables)))
        elif head == "source" and len(toks) == 2:
            source = toks[1]
        elif head == "sink" and len(toks) == 2:
            sink = toks[1]
        else:
            raise CircuitSyntaxError(lineno, f"cannot parse {line!r}")
    if not header or field is None or source is None or sink is None:
        raise CircuitSyntaxError(1, "abp file needs 'abp', field, source and sink lines")
    return Abp(field, tuple(variables), tuple(nodes), tuple(edges), source, sink)
