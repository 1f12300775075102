import pytest
from hypothesis import given, settings, strategies as st

from algcirc.abp import Abp, weakly_skew_to_abp
from algcirc.circuit import CircuitBuilder, classify
from algcirc.det_embed import (
    abp_to_det_projection,
    berkowitz_det_circuit,
    charpoly_at,
    csanky_charpoly,
    parse_projection,
    per2_as_det,
    reduce_det,
    serialize_projection,
)
from algcirc.errors import CharacteristicTooSmall, CircuitSyntaxError
from algcirc.field import QQ, prime_field
from algcirc.linalg import det_bareiss
from algcirc.matrices import symbolic_det, symbolic_per
from algcirc.poly import evaluate, expand, parse_polynomial
from algcirc.randgen import random_weakly_skew
from algcirc.rng import SplitMix64

F2 = prime_field(2)
F5 = prime_field(5)
F101 = prime_field(101)


def generic(n):
    return [[f"x{i}_{j}" for j in range(1, n + 1)] for i in range(1, n + 1)]


def xy_plus_z():
    b = CircuitBuilder(QQ, ["x", "y", "z"])
    return b.build(b.add(b.mul(b.input("x"), b.input("y")), b.input("z")))


def test_xy_plus_z_projection():
    pm = reduce_det(xy_plus_z())
    assert pm.side == 3
    assert pm.compute() == parse_polynomial("1 * x * y\n1 * z", QQ)
    assert pm.compute(method="leibniz") == pm.target


def test_single_edge_program():
    a = Abp(QQ, ("x",), ("s", "t"), (("s", "t", "x"),), "s", "t")
    pm = abp_to_det_projection(a)
    assert pm.entries == (("x",),)
    assert pm.compute() == parse_polynomial("1 * x", QQ)


def test_projection_keeps_unit_loops():
    rng = SplitMix64(8)
    for _ in range(50):
        c = random_weakly_skew(rng, F101, rng.randint(1, 8), ["x", "y", "z"])
        pm = abp_to_det_projection(weakly_skew_to_abp(c))
        assert pm.compute() == expand(c).with_variables(pm.variables)
        assert all(pm.entries[i][i] == 1 for i in range(1, pm.side))


def test_padding_preserves_determinant():
    pm = reduce_det(xy_plus_z())
    big = pm.padded(6)
    assert big.side == 6 and big.compute() == pm.target


def test_permanent_sign_trick():
    pm = per2_as_det(QQ)
    assert pm.compute() == symbolic_per([["a", "b"], ["c", "d"]], QQ)
    assert pm.compute() == parse_polynomial("1 * a * d\n1 * b * c", QQ)


def test_projection_text_round_trip():
    pm = reduce_det(xy_plus_z())
    text = serialize_projection(pm)
    back = parse_projection(text)
    assert back.entries == pm.entries and back.target == pm.target
    with pytest.raises(CircuitSyntaxError):
        parse_projection(text.replace("1 * z", "2 * z"))


def test_csanky_diagonal():
    assert csanky_charpoly([[2, 0], [0, 3]], QQ) == [5, -6]


def test_csanky_zero_matrix():
    assert csanky_charpoly([[0] * 4 for _ in range(4)], QQ) == [0, 0, 0, 0]


def test_csanky_against_determinant():
    rng = SplitMix64(21)
    for n in range(1, 7):
        a = [[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)]
        coeffs = csanky_charpoly(a, QQ)
        for t in range(-4, 6):
            shifted = [[(t if i == j else 0) - a[i][j] for j in range(n)] for i in range(n)]
            assert charpoly_at(coeffs, t, QQ) == det_bareiss(shifted, QQ)


def test_csanky_needs_characteristic_above_n():
    with pytest.raises(CharacteristicTooSmall):
        csanky_charpoly([[1] * 6 for _ in range(6)], F5)
    assert len(csanky_charpoly([[1] * 4 for _ in range(4)], F5)) == 4


def test_berkowitz_small_cases():
    c1 = berkowitz_det_circuit(1, QQ)
    assert expand(c1) == parse_polynomial("1 * x1_1", QQ)
    for n in (2, 3):
        c = berkowitz_det_circuit(n, QQ)
        assert classify(c).is_weakly_skew
        assert expand(c) == symbolic_det(generic(n), QQ, c.variables)


def test_berkowitz_characteristic_two():
    c = berkowitz_det_circuit(6, F2)
    rng = SplitMix64(5)
    for _ in range(20):
        pt = {v: rng.below(2) for v in c.variables}
        m = [[pt[f"x{i}_{j}"] for j in range(1, 7)] for i in range(1, 7)]
        assert evaluate(c, pt)[0].value == det_bareiss(m, F2)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**40))
def test_projection_determinant_property(seed):
    rng = SplitMix64(seed)
    f = QQ if seed % 2 else F101
    c = random_weakly_skew(rng, f, rng.randint(1, 8), ["x", "y", "z", "w"])
    pm = reduce_det(c)
    assert pm.side >= c.size + 1
    assert pm.compute() == expand(c)
