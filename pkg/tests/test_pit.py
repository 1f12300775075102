from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from algcirc.circuit import CircuitBuilder, metrics
from algcirc.errors import (
    DegreeBoundTooSmall,
    FieldTooSmall,
    NotConstantFree,
    NotMultDisjoint,
    TooManyVariables,
)
from algcirc.field import QQ, prime_field
from algcirc.pit import (
    NONZERO,
    ZERO,
    SditInstance,
    equ_slp,
    grid_zero_test,
    parse_sdit,
    pit_random,
    pit_zero,
    sdit_build,
    sdit_decide,
    serialize_sdit,
    trials_for,
)
from algcirc.poly import expand
from algcirc.randgen import random_circuit, random_constant_free_md, random_weakly_skew
from algcirc.rng import SplitMix64

F2 = prime_field(2)
F101 = prime_field(101)


def square_of_sum(f):
    b = CircuitBuilder(f, ["x", "y"])
    s = b.add(b.input("x"), b.input("y"))
    return b.build(b.mul(s, s))


def expanded_square(f):
    b = CircuitBuilder(f, ["x", "y"])
    x2 = b.mul(b.input("x"), b.input("x"))
    xy = b.mul(b.input("x"), b.input("y"))
    y2 = b.mul(b.input("y"), b.input("y"))
    return b.build(b.sum([x2, b.add(xy, xy), y2]))


def single(f, var, names=("x", "y")):
    b = CircuitBuilder(f, list(names))
    return b.build(b.input(var))


def test_equal_polynomials_are_zero():
    for seed in range(20):
        v = pit_random(square_of_sum(F101), expanded_square(F101), seed=seed)
        assert v.verdict == ZERO and v.witness is None
        assert v.error_bound <= Fraction(1, 2**40)


def test_small_field_rejected():
    b = CircuitBuilder(F2, ["x"])
    x = b.input("x")
    c = b.build(b.add(b.mul(x, x), b.mul(b.const(-1), x)))
    with pytest.raises(FieldTooSmall):
        pit_zero(c)


def test_distinct_variables_found():
    v = pit_random(single(F101, "x"), single(F101, "y"), trials=20, seed=3)
    assert v.verdict == NONZERO
    assert v.witness["x"] != v.witness["y"]
    assert v.error_bound == 0


def test_rational_sample_set():
    v = pit_random(square_of_sum(QQ), expanded_square(QQ), trials=5, seed=1)
    assert v.sample_size == 5 and v.error_bound == Fraction(2, 5) ** 5


def test_trials_for_target():
    k = trials_for(2, 101)
    assert Fraction(2, 101) ** k <= Fraction(1, 2**40) < Fraction(2, 101) ** (k - 1)


def test_grid_examples():
    b = CircuitBuilder(QQ, ["x"])
    x = b.input("x")
    c = b.build(b.mul(b.add(x, b.const(-1)), b.add(b.input("x"), b.const(-2))))
    v = grid_zero_test(c, 2)
    assert v.verdict == NONZERO and v.witness == {"x": 0}
    b = CircuitBuilder(QQ, ["x"])
    zero = b.build(b.add(b.input("x"), b.mul(b.const(-1), b.input("x"))))
    assert grid_zero_test(zero, 3).verdict == ZERO
    with pytest.raises(DegreeBoundTooSmall):
        grid_zero_test(c, 1)
    with pytest.raises(TooManyVariables):
        grid_zero_test(single(QQ, "a", ["a", "b", "c", "d", "e"]), 2)


def test_grid_agrees_with_expansion():
    rng = SplitMix64(19)
    done = 0
    while done < 100:
        c = random_circuit(rng, F101, rng.randint(1, 6), ["x", "y"], consts=(0, 1, -1, 2))
        d = metrics(c).degree
        if d > 6:
            continue
        want = ZERO if expand(c).is_zero() else NONZERO
        assert grid_zero_test(c, max(d, 1)).verdict == want
        done += 1


def ones_sum(b, n):
    """n as a sum of fresh 1-constants (constant-free, no sharing)."""
    return b.sum([b.const(1) for _ in range(n)])


def power_of_two(b, k):
    """2^k as a balanced product of fresh (1 + 1) gates."""
    return b.product([ones_sum(b, 2) for _ in range(k)])


def test_equ_slp_examples():
    b = CircuitBuilder(QQ, [])
    prod = b.mul(ones_sum(b, 3), ones_sum(b, 5))
    c = b.build(b.add(prod, b.mul(b.const(-1), ones_sum(b, 15))))
    assert equ_slp(c).verdict == ZERO

    for n, want in ((1024, ZERO), (1023, NONZERO)):
        b = CircuitBuilder(QQ, [])
        c = b.build(b.add(power_of_two(b, 10), b.mul(b.const(-1), ones_sum(b, n))))
        res = equ_slp(c)
        assert res.verdict == want
        prod = 1
        for q in res.primes:
            prod *= q
        assert prod > 2 ** res.bound_bits


def test_equ_slp_preconditions():
    b = CircuitBuilder(QQ, [])
    c = b.build(b.mul(b.const(3), b.const(5)))
    with pytest.raises(NotConstantFree):
        equ_slp(c)
    b = CircuitBuilder(QQ, [])
    g = ones_sum(b, 2)
    with pytest.raises(NotMultDisjoint):
        equ_slp(b.build(b.mul(g, g)))
    with pytest.raises(TooManyVariables):
        equ_slp(single(QQ, "x"))


def test_equ_slp_random():
    rng = SplitMix64(23)
    for _ in range(100):
        c = random_constant_free_md(rng, QQ, rng.randint(1, 30), [])
        value = expand(c).coefficient({}).value
        assert equ_slp(c).verdict == (ZERO if value == 0 else NONZERO)


def test_sdit_examples():
    v = sdit_decide(sdit_build(single(F101, "x", ["x"])), seed=1)
    assert v.verdict == NONZERO
    b = CircuitBuilder(F101, ["x"])
    zero = b.build(b.add(b.input("x"), b.mul(b.const(-1), b.input("x"))))
    assert sdit_decide(sdit_build(zero), seed=1).verdict == ZERO


def test_sdit_pencils():
    eye = SditInstance(F101, ("x1",), (((1, 0), (0, 1)),))
    assert sdit_decide(eye).verdict == NONZERO
    e11 = ((1, 0), (0, 0))
    e12 = ((0, 1), (0, 0))
    assert sdit_decide(SditInstance(F101, ("x1", "x2"), (e11, e12))).verdict == ZERO
    full = ((3, 1, 4), (1, 5, 9), (2, 6, 5))
    assert sdit_decide(SditInstance(F101, ("x1",), (full,))).verdict == NONZERO


def test_sdit_agrees_with_expansion():
    rng = SplitMix64(29)
    for _ in range(100):
        c = random_weakly_skew(rng, F101, rng.randint(1, 8), ["x", "y", "z"], consts=(1, -1, 2))
        want = ZERO if expand(c).is_zero() else NONZERO
        assert sdit_decide(sdit_build(c), seed=4).verdict == want


def test_sdit_text_round_trip():
    inst = sdit_build(expanded_square(F101))
    back = parse_sdit(serialize_sdit(inst))
    assert back.matrices == inst.matrices and back.variables == inst.variables


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**63))
def test_never_false_nonzero(seed):
    assert pit_random(square_of_sum(F101), expanded_square(F101), trials=3, seed=seed).verdict == ZERO
