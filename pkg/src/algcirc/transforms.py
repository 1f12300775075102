"""Circuit-to-circuit transformations: homogenization, multiplicative
disjointness and formula balancing."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

from .circuit import ADD, CONST, INPUT, MUL, Circuit, CircuitBuilder, classify, formal_degrees, metrics
from .errors import BudgetExceeded, DegreeBoundTooSmall, NotAFormula
from .poly import DEFAULT_BUDGET, expand, expand_many


@dataclass(frozen=True)
class TransformReport:
    name: str
    input_size: int
    input_depth: int
    input_degree: int
    output_size: int
    output_depth: int
    output_degree: int
    verified: str  # "oracle", "pit" or "skipped"
    constant: float  # measured constant of the size or depth bound

    @property
    def size_ratio(self) -> float:
        return self.output_size / max(1, self.input_size)

    @property
    def depth_ratio(self) -> float:
        return self.output_depth / max(1, self.input_depth)

    def to_text(self) -> str:
        rows = [
            ("transform", self.name),
            ("input_size", self.input_size),
            ("input_depth", self.input_depth),
            ("input_degree", self.input_degree),
            ("output_size", self.output_size),
            ("output_depth", self.output_depth),
            ("output_degree", self.output_degree),
            ("size_ratio", f"{self.size_ratio:.4f}"),
            ("depth_ratio", f"{self.depth_ratio:.4f}"),
            ("constant", f"{self.constant:.4f}"),
            ("verified", self.verified),
        ]
        return "".join(f"{k}: {v}\n" for k, v in rows)


def make_report(name: str, before: Circuit, after: Circuit, verified: str, constant: float) -> TransformReport:
    m1, m2 = metrics(before), metrics(after)
    return TransformReport(
        name, m1.size, m1.depth, m1.degree, m2.size, m2.depth, m2.degree, verified, constant
    )


# ----------------------------------------------------------------------
# homogenization


def homogenize(c: Circuit, d: int, gate: str | None = None, budget: int = DEFAULT_BUDGET) -> Circuit:
    """Circuit whose k-th output (k = 0..d) is the degree-k part of ``gate``.

    Every gate (v, k) of the result computes the degree-k part of gate v,
    with products convolved and truncated above d.
    """
    if d < 1:
        raise ValueError("degree bound must be at least 1")
    gid = c.outputs[0] if gate is None else gate
    target = c.index[gid]
    degs = formal_degrees(c)
    if degs[target] > d:
        actual = expand(c, gid, budget).degree()
        if actual > d:
            raise DegreeBoundTooSmall(f"polynomial has degree {actual} > {d}")
    mask = c.cone_masks[target]
    ch = c.child_indices
    b = CircuitBuilder(c.field, c.variables, prefix="h")
    comps: dict[int, list[str | None]] = {}
    for i, g in enumerate(c.gates[: target + 1]):
        if not (mask >> i) & 1:
            continue
        row: list[str | None] = [None] * (d + 1)
        if g.op == INPUT:
            row[1] = b.input(g.var)
        elif g.op == CONST:
            if g.value:
                row[0] = b.const(g.value)
        elif g.op == ADD:
            left, right = (comps[k] for k in ch[i])
            for k in range(d + 1):
                x, y = left[k], right[k]
                row[k] = b.add(x, y) if x and y else (x or y)
        else:
            left, right = (comps[k] for k in ch[i])
            for k in range(d + 1):
                parts = [
                    b.mul(left[j], right[k - j])
                    for j in range(k + 1)
                    if left[j] and right[k - j]
                ]
                acc = None
                for p in parts:
                    acc = p if acc is None else b.add(acc, p)
                row[k] = acc
        comps[i] = row
    zero = None
    outs = []
    for k in range(d + 1):
        x = comps[target][k]
        if x is None:
            if zero is None:
                zero = b.const(0)
            x = zero
        outs.append(x)
    return b.build(outs)


# ----------------------------------------------------------------------
# multiplicative disjointness


def make_mult_disjoint(c: Circuit) -> Circuit:
    """Equivalent circuit in which the two factors of every product share no gate.

    Each gate v of positive formal degree is copied as (v, t) for offsets t in
    [0, deg(output)); the factors of (v, t) = (a, t) * (b, t + deg a) then
    live in disjoint offset windows.  Gates of degree 0 compute constants and
    are folded into a private constant gate at each use.
    """
    if classify(c).is_mult_disjoint:
        return c
    degs = formal_degrees(c)
    ch = c.child_indices
    f = c.field
    n = len(c.gates)
    # values of the variable-free gates
    const_val: dict[int, object] = {}
    for i, g in enumerate(c.gates):
        if degs[i]:
            continue
        if g.op == CONST:
            const_val[i] = g.value
        elif g.op in (ADD, MUL):
            a, bb = ch[i]
            op = f.add if g.op == ADD else f.mul
            const_val[i] = op(const_val[a], const_val[bb])
    out_idx = [c.index[o] for o in c.outputs]
    needed: list[set[int]] = [set() for _ in range(n)]
    for i in out_idx:
        if degs[i]:
            needed[i].add(0)
    for i in range(n - 1, -1, -1):
        g = c.gates[i]
        if g.op not in (ADD, MUL) or not needed[i]:
            continue
        a, bb = ch[i]
        for t in needed[i]:
            if g.op == ADD:
                for x in (a, bb):
                    if degs[x]:
                        needed[x].add(t)
            else:
                if degs[a]:
                    needed[a].add(t)
                if degs[bb]:
                    needed[bb].add(t + degs[a])
    b = CircuitBuilder(f, c.variables, prefix="m")
    copy: dict[tuple[int, int], str] = {}

    def operand(x: int, t: int) -> str:
        return copy[(x, t)] if degs[x] else b.const(const_val[x])

    for i, g in enumerate(c.gates):
        for t in sorted(needed[i]):
            if g.op == INPUT:
                copy[(i, t)] = b.input(g.var)
            elif g.op == ADD:
                a, bb = ch[i]
                copy[(i, t)] = b.add(operand(a, t), operand(bb, t))
            elif g.op == MUL:
                a, bb = ch[i]
                copy[(i, t)] = b.mul(operand(a, t), operand(bb, t + degs[a]))
    outs = [copy[(i, 0)] if degs[i] else b.const(const_val[i]) for i in out_idx]
    return b.build(outs)


# ----------------------------------------------------------------------
# formula balancing


class _Node:
    __slots__ = ("op", "left", "right", "payload", "leaves", "depth")

    def __init__(self, op, left=None, right=None, payload=None):
        self.op = op
        self.left = left
        self.right = right
        self.payload = payload
        if left is None:
            self.leaves, self.depth = 1, 0
        else:
            self.leaves = left.leaves + right.leaves
            self.depth = 1 + max(left.depth, right.depth)


def _tree_of(c: Circuit, gid: str) -> _Node:
    nodes: dict[int, _Node] = {}
    mask = c.cone_masks[c.index[gid]]
    ch = c.child_indices
    for i, g in enumerate(c.gates[: c.index[gid] + 1]):
        if not (mask >> i) & 1:
            continue
        if g.op in (INPUT, CONST):
            nodes[i] = _Node(g.op, payload=g.args[0])
        else:
            a, bb = ch[i]
            nodes[i] = _Node(g.op, nodes[a], nodes[bb])
    return nodes[c.index[gid]]


def _emit(b: CircuitBuilder, root: _Node) -> str:
    """Write a tree as gates; a node object reachable twice is emitted twice."""
    stack = [(root, False)]
    out: list[str] = []
    while stack:
        node, done = stack.pop()
        if node.left is None:
            out.append(b.input(node.payload) if node.op == INPUT else b.const(node.payload))
        elif done:
            r = out.pop()
            l = out.pop()
            out.append((b.add if node.op == ADD else b.mul)(l, r))
        else:
            stack.extend([(node, True), (node.right, False), (node.left, False)])
    return out[0]


def _product_by_depth(factors: list[_Node]) -> _Node:
    heap = [(f.depth, k, f) for k, f in enumerate(factors)]
    heapq.heapify(heap)
    k = len(heap)
    while len(heap) > 1:
        _, _, x = heapq.heappop(heap)
        _, _, y = heapq.heappop(heap)
        node = _Node(MUL, x, y)
        heapq.heappush(heap, (node.depth, k, node))
        k += 1
    return heap[0][2]


def _balance(t: _Node) -> _Node:
    if t.leaves <= 4:
        return t
    limit = 2 * t.leaves / 3
    path: list[_Node] = []
    node = t
    while node.leaves > limit:
        path.append(node)
        node = node.left if node.left.leaves >= node.right.leaves else node.right
    sep = node
    # bottom-up, the path acts on the separator value z as z -> A z + B
    a_factors: list[_Node] = []
    b_tree: _Node | None = None
    below = sep
    for u in reversed(path):
        sib = u.right if u.left is below else u.left
        if u.op == ADD:
            b_tree = sib if b_tree is None else _Node(ADD, b_tree, sib)
        else:
            a_factors.append(sib)
            if b_tree is not None:
                b_tree = _Node(MUL, b_tree, sib)
        below = u
    g = _balance(sep)
    if a_factors:
        g = _Node(MUL, _product_by_depth([_balance(s) for s in a_factors]), g)
    if b_tree is not None:
        g = _Node(ADD, g, _balance(b_tree))
    return g


def balance_formula(c: Circuit) -> Circuit:
    """Equivalent formula of depth O(log size), for every output."""
    if not classify(c).is_formula:
        raise NotAFormula("balancing needs a formula")
    b = CircuitBuilder(c.field, c.variables, prefix="b")
    outs = [_emit(b, _balance(_tree_of(c, o))) for o in c.outputs]
    return b.build(outs)


def depth_constant(c: Circuit, depth: int) -> float:
    """kappa with depth = kappa * log2(size + 2)."""
    return depth / math.log2(c.size + 2)


# ----------------------------------------------------------------------
# verification helper


def check_equivalent(c1: Circuit, c2: Circuit, outputs1: Sequence[str] | None = None,
                     outputs2: Sequence[str] | None = None, budget: int = DEFAULT_BUDGET,
                     seed: int = 0) -> str:
    """Return "oracle" or "pit" after confirming equality, raise AssertionError otherwise."""
    o1 = list(outputs1 or c1.outputs)
    o2 = list(outputs2 or c2.outputs)
    try:
        p1 = expand_many(c1, o1, budget)
        p2 = expand_many(c2, o2, budget)
    except BudgetExceeded:
        from .pit import pit_random

        for a, bb in zip(o1, o2):
            verdict = pit_random(c1.restrict(a), c2.restrict(bb), trials=None, seed=seed)
            if verdict.verdict != "Zero":
                raise AssertionError(f"circuits differ at {verdict.witness}")
        return "pit"
    if any(x != y for x, y in zip(p1, p2)):
        raise AssertionError("circuits compute different polynomials")
    return "oracle"
