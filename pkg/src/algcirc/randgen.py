"""Seeded random circuit generators used by the test suites and the CLI."""

from __future__ import annotations

from typing import Sequence

from .circuit import ADD, MUL, Circuit, CircuitBuilder
from .field import Field
from .rng import SplitMix64

DEFAULT_CONSTS = (-1, 0, 1, 2, 3)


def _leaf(rng: SplitMix64, b: CircuitBuilder, variables: Sequence[str], consts, var_prob: float) -> str:
    if variables and (not consts or rng.random() < var_prob):
        return b.input(rng.choice(variables))
    return b.const(rng.choice(consts))


def random_formula(
    rng: SplitMix64,
    field: Field,
    size: int,
    variables: Sequence[str],
    consts: Sequence[int] = DEFAULT_CONSTS,
    var_prob: float = 0.75,
    mul_prob: float = 0.5,
) -> Circuit:
    """Random formula with exactly ``size`` operation gates.

    The tree shape comes from repeatedly splitting a uniformly chosen leaf.
    """
    kinds: list[str | None] = [None]
    kids: list[tuple[int, int] | None] = [None]
    leaves = [0]
    for _ in range(size):
        k = rng.below(len(leaves))
        node = leaves[k]
        leaves[k] = leaves[-1]
        leaves.pop()
        kinds[node] = MUL if rng.random() < mul_prob else ADD
        left, right = len(kinds), len(kinds) + 1
        kinds.extend([None, None])
        kids.extend([None, None])
        kids[node] = (left, right)
        leaves.extend([left, right])
    b = CircuitBuilder(field, variables)
    return b.build(_emit_tree(rng, b, kinds, kids, variables, consts, var_prob))


def _emit_tree(rng, b, kinds, kids, variables, consts, var_prob) -> str:
    gid: dict[int, str] = {}
    stack = [(0, False)]
    while stack:
        node, done = stack.pop()
        if kinds[node] is None:
            gid[node] = _leaf(rng, b, variables, consts, var_prob)
        elif done:
            left, right = kids[node]
            op = b.add if kinds[node] == ADD else b.mul
            gid[node] = op(gid[left], gid[right])
        else:
            left, right = kids[node]
            stack.extend([(node, True), (right, False), (left, False)])
    return gid[0]


def comb_formula(field: Field, op: str, variables: Sequence[str]) -> Circuit:
    """Left comb ``((x1 op x2) op x3) ...``."""
    b = CircuitBuilder(field, variables)
    acc = b.input(variables[0])
    for v in variables[1:]:
        acc = (b.add if op == ADD else b.mul)(acc, b.input(v))
    return b.build(acc)


def random_circuit(
    rng: SplitMix64,
    field: Field,
    n_ops: int,
    variables: Sequence[str],
    consts: Sequence[int] = DEFAULT_CONSTS,
    mul_prob: float = 0.5,
) -> Circuit:
    """Random DAG: every operation picks two earlier gates (sharing allowed)."""
    b = CircuitBuilder(field, variables)
    pool = [b.input(v) for v in variables]
    if consts:
        pool.append(b.const(rng.choice(consts)))
    for _ in range(n_ops):
        # favour recent gates so the output depends on most of the circuit
        def pick():
            k = len(pool)
            return pool[k - 1 - min(rng.below(k), rng.below(k))]

        left, right = pick(), pick()
        pool.append((b.mul if rng.random() < mul_prob else b.add)(left, right))
    return b.build(pool[-1])


def random_weakly_skew(
    rng: SplitMix64,
    field: Field,
    n_ops: int,
    variables: Sequence[str],
    consts: Sequence[int] = DEFAULT_CONSTS,
    mul_prob: float = 0.5,
    share_prob: float = 0.5,
) -> Circuit:
    """Random weakly-skew circuit restricted to the cone of its output.

    The second factor of each multiplication is a freshly generated block whose
    gates are invisible to the rest of the circuit; the first factor and both
    summands may be reused gates.
    """
    b = CircuitBuilder(field, variables)

    def block(ops: int) -> str:
        pool: list[str] = []
        last = None
        while ops > 0:
            def operand():
                if pool and rng.random() < share_prob:
                    return rng.choice(pool)
                return _leaf(rng, b, variables, consts, 0.75)

            if rng.random() < mul_prob:
                inner = rng.below(ops)
                left = last if last is not None and rng.random() < 0.5 else operand()
                right = block(inner)
                ops -= inner + 1
                last = b.mul(left, right)
            else:
                left = last if last is not None and rng.random() < 0.7 else operand()
                last = b.add(left, operand())
                ops -= 1
            pool.append(last)
        return last if last is not None else _leaf(rng, b, variables, consts, 0.75)

    out = block(n_ops)
    return b.build(out).restrict(out)


def random_constant_free_md(
    rng: SplitMix64,
    field: Field,
    n_ops: int,
    variables: Sequence[str],
    mul_prob: float = 0.5,
) -> Circuit:
    """Random constant-free multiplicatively disjoint circuit (sharing allowed
    except across the two factors of a product)."""
    b = CircuitBuilder(field, variables)
    pool: list[tuple[str, int]] = []  # (gate id, cone bitset over pool positions)
    consts = (-1, 0, 1)

    def fresh_leaf() -> tuple[str, int]:
        gid = _leaf(rng, b, variables, consts, 0.7)
        pool.append((gid, 1 << len(pool)))
        return pool[-1]

    for _ in range(n_ops):
        if not pool or rng.random() < 0.3:
            a = fresh_leaf()
        else:
            a = pool[len(pool) - 1 - min(rng.below(len(pool)), rng.below(len(pool)))]
        if rng.random() < mul_prob:
            options = [g for g in pool if not g[1] & a[1]]
            right = rng.choice(options) if options and rng.random() < 0.7 else fresh_leaf()
            gid = b.mul(a[0], right[0])
        else:
            right = rng.choice(pool) if rng.random() < 0.7 else fresh_leaf()
            gid = b.add(a[0], right[0])
        pool.append((gid, a[1] | right[1] | (1 << len(pool))))
    if not pool:
        fresh_leaf()
    out = pool[-1][0]
    return b.build(out).restrict(out)
