import math

import pytest
from hypothesis import given, settings, strategies as st

from algcirc.circuit import ADD, MUL, CircuitBuilder, classify, metrics
from algcirc.errors import DegreeBoundTooSmall, NotAFormula
from algcirc.field import QQ, prime_field
from algcirc.poly import expand, expand_many, parse_polynomial
from algcirc.randgen import comb_formula, random_circuit, random_formula
from algcirc.rng import SplitMix64
from algcirc.transforms import (
    balance_formula,
    check_equivalent,
    depth_constant,
    homogenize,
    make_mult_disjoint,
)

KAPPA = 10


def P(text):
    return parse_polynomial(text, QQ, ("x", "y"))


def components(c, d):
    h = homogenize(c, d)
    return [p.with_variables(("x", "y")) for p in expand_many(h, list(h.outputs))]


def test_square_of_shifted_variable():
    b = CircuitBuilder(QQ, ["x", "y"])
    s = b.add(b.input("x"), b.const(1))
    comps = components(b.build(b.mul(s, s)), 2)
    assert comps == [P("1"), P("2 * x"), P("1 * x^2")]


def test_homogeneous_input():
    b = CircuitBuilder(QQ, ["x", "y"])
    comps = components(b.build(b.mul(b.input("x"), b.input("y"))), 2)
    assert comps == [P("0"), P("0"), P("1 * x * y")]


def test_seven_gate_sample_components(seven):
    comps = components(seven, 3)
    assert sum(comps[1:], comps[0]) == expand(seven)
    assert comps[3] == P("-1 * x^3")
    assert all(p.is_homogeneous() and (p.is_zero() or p.degree() == k) for k, p in enumerate(comps))


def test_degree_bound_too_small(seven):
    with pytest.raises(DegreeBoundTooSmall):
        homogenize(seven, 2)


def test_mult_disjoint_identity_fast_path():
    c = random_formula(SplitMix64(1), QQ, 6, ["x", "y"])
    assert make_mult_disjoint(c) is c


def test_square_of_product():
    b = CircuitBuilder(QQ, ["x", "y"])
    g = b.mul(b.input("x"), b.input("y"))
    c = b.build(b.mul(g, g))
    out = make_mult_disjoint(c)
    assert classify(out).is_mult_disjoint
    assert out.size <= 3 * c.size * metrics(c).degree
    assert expand(out) == P("1 * x^2 * y^2")


def test_repeated_squaring_chain():
    b = CircuitBuilder(QQ, ["x"])
    g = b.input("x")
    for _ in range(4):
        g = b.mul(g, g)
    out = make_mult_disjoint(b.build(g))
    assert classify(out).is_mult_disjoint
    assert out.size <= 3 * 4 * 16
    assert expand(out) == parse_polynomial("1 * x^16", QQ)


def test_sum_comb_balances():
    c = comb_formula(QQ, ADD, [f"x{i}" for i in range(1, 9)])
    assert metrics(c).depth == 7
    out = balance_formula(c)
    assert metrics(out).depth <= KAPPA * math.log2(10)
    assert expand(out) == expand(c)


def test_product_comb_balances():
    c = comb_formula(QQ, MUL, [f"x{i}" for i in range(1, 33)])
    assert metrics(c).depth == 31
    out = balance_formula(c)
    assert metrics(out).depth <= KAPPA * math.log2(34)
    assert expand(out) == expand(c)


def test_single_product_stays_shallow():
    b = CircuitBuilder(QQ, ["x", "y"])
    out = balance_formula(b.build(b.mul(b.input("x"), b.input("y"))))
    assert metrics(out).depth == 1


def test_balance_rejects_shared_gates():
    b = CircuitBuilder(QQ, ["x"])
    g = b.add(b.input("x"), b.const(1))
    with pytest.raises(NotAFormula):
        balance_formula(b.build(b.mul(g, g)))


def test_deep_random_formula_depth_constant():
    rng = SplitMix64(99)
    c = random_formula(rng, prime_field(2**31 - 1), 800, [f"x{i}" for i in range(6)])
    out = balance_formula(c)
    assert classify(out).is_formula
    assert depth_constant(c, metrics(out).depth) <= KAPPA
    assert check_equivalent(c, out) in ("oracle", "pit")


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**40), st.integers(min_value=1, max_value=10))
def test_transforms_preserve_polynomial(seed, ops):
    rng = SplitMix64(seed)
    c = random_circuit(rng, QQ, ops, ["x", "y"])
    d = max(1, metrics(c).degree)
    comps = components(c, d)
    assert sum(comps[1:], comps[0]) == expand(c).with_variables(("x", "y"))
    md = make_mult_disjoint(c)
    assert classify(md).is_mult_disjoint
    assert expand(md) == expand(c)
