import math

import pytest
from hypothesis import given, settings, strategies as st

from algcirc.circuit import (
    CircuitBuilder,
    classify,
    metrics,
    parse_circuit,
    serialize_circuit,
    unshare_inputs,
)
from algcirc.errors import CircuitSyntaxError, CycleDetected, DuplicateGateId, UnknownGateRef
from algcirc.field import QQ, prime_field
from algcirc.poly import evaluate, expand
from algcirc.randgen import random_circuit, random_formula
from algcirc.rng import SplitMix64

SQUARE = "field Fp 7\nvar x\ng1 = input x\ng2 = mul g1 g1\noutput g2"


def test_parse_single_square():
    c = parse_circuit(SQUARE)
    assert c.size == 1
    assert c.outputs == ("g2",)
    assert c.field == prime_field(7)


def test_undefined_reference():
    with pytest.raises(UnknownGateRef):
        parse_circuit("field Q\nvar x\ng1 = input x\ng2 = add g1 g9\noutput g2")


def test_self_loop_is_a_cycle():
    with pytest.raises(CycleDetected):
        parse_circuit("field Q\nvar x\ng1 = add g1 g1\noutput g1")


def test_two_gate_cycle():
    with pytest.raises(CycleDetected):
        parse_circuit("field Q\nvar x\nx1 = input x\na = add x1 b\nb = add a x1\noutput b")


def test_duplicate_gate_id():
    with pytest.raises(DuplicateGateId):
        parse_circuit("field Q\nvar x\ng1 = input x\ng1 = input x\noutput g1")


@pytest.mark.parametrize("text", [
    "var x\ng1 = input x\noutput g1",
    "field Q\nvar x\ng1 = input x",
    "field Q\nvar x\ng1 = pow g1 g1\noutput g1",
    "field Q\nvar x\ng1 = input y\noutput g1",
])
def test_syntax_errors(text):
    with pytest.raises(CircuitSyntaxError):
        parse_circuit(text)


def test_product_metrics():
    b = CircuitBuilder(QQ, ["x", "y"])
    c = b.build(b.mul(b.input("x"), b.input("y")))
    m = metrics(c)
    assert (m.size, m.depth, m.degree) == (1, 1, 2)


def test_repeated_squaring_metrics():
    b = CircuitBuilder(QQ, ["x"])
    g = b.input("x")
    for _ in range(3):
        g = b.mul(g, g)
    m = metrics(b.build(g))
    assert (m.size, m.depth, m.degree) == (3, 3, 8)
    assert m.size >= math.log2(m.degree)


def test_seven_gate_sample(seven):
    m = metrics(seven)
    assert (m.size, m.depth, m.degree) == (7, 6, 3)
    again = parse_circuit(serialize_circuit(seven))
    assert metrics(again).size == 7 and expand(again) == expand(seven)
    assert evaluate(seven, {"x": 1, "y": 1})[0].value == 0


def test_formula_flags():
    rng = SplitMix64(3)
    for _ in range(50):
        c = random_formula(rng, QQ, rng.randint(1, 12), ["x", "y", "z"])
        flags = classify(c)
        assert flags.is_formula and flags.is_weakly_skew and flags.is_mult_disjoint


def test_shared_operands_break_weak_skewness_only():
    text = """field Q
var x y
x1 = input x
x2 = input x
y1 = input y
y2 = input y
g = add x1 x2
k = add y1 y2
m1 = mul g k
m2 = mul g k
out = add m1 m2
output out
"""
    flags = classify(parse_circuit(text))
    assert not flags.is_weakly_skew
    assert flags.is_mult_disjoint
    assert set(flags.failures) == {"m1", "m2"}


def test_squaring_a_product_is_not_mult_disjoint():
    b = CircuitBuilder(QQ, ["x", "y"])
    g = b.mul(b.input("x"), b.input("y"))
    flags = classify(b.build(b.mul(g, g)))
    assert not flags.is_mult_disjoint and not flags.is_weakly_skew


def test_unshare_inputs_keeps_polynomial():
    rng = SplitMix64(5)
    for _ in range(30):
        c = random_circuit(rng, QQ, 6, ["x", "y"])
        u = unshare_inputs(c)
        assert u.size == c.size
        assert expand(u) == expand(c)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=1, max_value=15))
def test_serialization_round_trip(seed, ops):
    rng = SplitMix64(seed)
    c = random_circuit(rng, prime_field(101), ops, ["x", "y", "z"])
    back = parse_circuit(serialize_circuit(c))
    assert back == c
