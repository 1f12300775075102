
import pytest
from hypothesis import given, settings, strategies as st

from algcirc.abp import (
    Abp,
    abp_eval,
    abp_expand,
    abp_to_skew_circuit,
    parallel,
    parse_abp,
    path_sum,
    prune,
    serialize_abp,
    series,
    weakly_skew_to_abp,
)
from algcirc.circuit import CircuitBuilder, classify
from algcirc.errors import CycleDetected, NotWeaklySkew
from algcirc.field import QQ, prime_field
from algcirc.poly import SparsePolynomial, expand, parse_polynomial
from algcirc.randgen import random_formula, random_weakly_skew
from algcirc.rng import SplitMix64

F101 = prime_field(101)


def xy_plus_z():
    b = CircuitBuilder(QQ, ["x", "y", "z"])
    return b.build(b.add(b.mul(b.input("x"), b.input("y")), b.input("z")))


def enumerate_paths(a):
    """Independent oracle: list every source-sink path explicitly."""
    out = {}
    for k, (u, v, w) in enumerate(a.edges):
        out.setdefault(u, []).append(k)
    total = SparsePolynomial(a.field, a.variables)

    def walk(node, weight):
        nonlocal total
        if node == a.sink:
            total = total + weight
            return
        for k in out.get(node, []):
            _, v, w = a.edges[k]
            factor = (SparsePolynomial.variable(a.field, w, a.variables) if isinstance(w, str)
                      else SparsePolynomial.constant(a.field, w, a.variables))
            walk(v, weight * factor)

    walk(a.source, SparsePolynomial.constant(a.field, 1, a.variables))
    return total


def test_xy_plus_z():
    a = weakly_skew_to_abp(xy_plus_z())
    assert a.num_nodes <= 4 and a.num_edges <= 3
    assert abp_expand(a) == parse_polynomial("1 * x * y\n1 * z", QQ)


def test_single_variable():
    b = CircuitBuilder(QQ, ["x"])
    a = weakly_skew_to_abp(b.build(b.input("x")))
    assert a.num_nodes == 2 and a.num_edges == 1
    assert a.edges[0][2] == "x"


def test_sum_of_constants():
    b = CircuitBuilder(QQ, [])
    a = weakly_skew_to_abp(b.build(b.add(b.const(2), b.const(3))))
    assert abp_expand(a) == SparsePolynomial.constant(QQ, 5)
    assert a.num_edges == 2 and {e[:2] for e in a.edges} == {(a.source, a.sink)}


def test_parallel_and_series_programs():
    par = Abp(QQ, ("x", "y"), ("s", "t"), (("s", "t", "x"), ("s", "t", "y")), "s", "t")
    assert abp_expand(par) == parse_polynomial("1 * x\n1 * y", QQ)
    path = Abp(QQ, ("x", "y"), ("s", "m", "t"), (("s", "m", "x"), ("m", "t", "y")), "s", "t")
    assert abp_expand(path) == parse_polynomial("1 * x * y", QQ)
    assert abp_expand(series(par, path)) == abp_expand(par) * abp_expand(path)
    assert abp_expand(parallel(par, path)) == abp_expand(par) + abp_expand(path)


def test_layered_grid_against_path_enumeration():
    names = [f"w{k}" for k in range(8)]
    nodes = ("s", "a1", "a2", "b1", "b2", "t")
    edges = (("s", "a1", "w0"), ("s", "a2", "w1"), ("a1", "b1", "w2"), ("a1", "b2", "w3"),
             ("a2", "b1", "w4"), ("a2", "b2", "w5"), ("b1", "t", "w6"), ("b2", "t", "w7"))
    a = Abp(QQ, tuple(names), nodes, edges, "s", "t")
    assert abp_expand(a) == enumerate_paths(a) == path_sum(a)
    assert len(abp_expand(a).terms) == 4


def test_cyclic_program_rejected():
    with pytest.raises(CycleDetected):
        Abp(QQ, ("x",), ("s", "a", "t"), (("s", "a", "x"), ("a", "s", 1), ("a", "t", 1)), "s", "t")


def test_not_weakly_skew():
    b = CircuitBuilder(QQ, ["x", "y"])
    g = b.mul(b.input("x"), b.input("y"))
    with pytest.raises(NotWeaklySkew):
        weakly_skew_to_abp(b.build(b.mul(g, g)))


def test_back_to_skew_circuit():
    a = weakly_skew_to_abp(xy_plus_z())
    c = abp_to_skew_circuit(a)
    assert classify(c).is_skew
    assert expand(c) == parse_polynomial("1 * x * y\n1 * z", QQ)
    one = Abp(QQ, ("x",), ("s", "t"), (("s", "t", "x"),), "s", "t")
    c1 = abp_to_skew_circuit(one)
    assert c1.size <= 1 and expand(c1) == parse_polynomial("1 * x", QQ)


def test_round_trip_on_200_weakly_skew_circuits():
    rng = SplitMix64(11)
    for k in range(200):
        f = QQ if k % 2 else F101
        c = random_weakly_skew(rng, f, rng.randint(1, 8), ["x", "y", "z", "w"])
        a = weakly_skew_to_abp(c)
        back = abp_to_skew_circuit(a)
        assert expand(back).with_variables(c.variables) == expand(c)


def test_formula_bounds_on_random_suite():
    rng = SplitMix64(12)
    for _ in range(300):
        c = random_formula(rng, QQ, rng.randint(0, 12), ["x", "y", "z"])
        a = weakly_skew_to_abp(c)
        assert a.num_nodes <= c.size + 2
        assert a.num_edges <= c.size + 1
        assert abp_expand(a) == expand(c)


def test_text_round_trip():
    a = weakly_skew_to_abp(xy_plus_z())
    b = parse_abp(serialize_abp(a))
    assert abp_expand(b) == abp_expand(a)


def test_prune_keeps_value():
    a = Abp(QQ, ("x", "y"), ("s", "d", "t"), (("s", "t", "x"), ("s", "d", "y")), "s", "t")
    p = prune(a)
    assert p.num_nodes == 2 and abp_expand(p) == abp_expand(a)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**40))
def test_evaluation_matches_expansion(seed):
    rng = SplitMix64(seed)
    c = random_weakly_skew(rng, F101, rng.randint(1, 8), ["x", "y", "z"])
    a = weakly_skew_to_abp(c)
    pt = {v: rng.below(101) for v in a.variables}
    assert abp_eval(a, pt).value == abp_expand(a).evaluate(pt).value == enumerate_paths(a).evaluate(pt).value
