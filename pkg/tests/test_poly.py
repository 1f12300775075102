import pytest
import sympy
from hypothesis import given, settings, strategies as st

from algcirc.circuit import CircuitBuilder
from algcirc.errors import (
    BlocksNotPartition,
    BudgetExceeded,
    MissingAssignment,
    NonIntegerCoefficients,
    NotMultilinear,
)
from algcirc.field import QQ, prime_field
from algcirc.poly import (
    SparsePolynomial,
    evaluate,
    expand,
    format_polynomial,
    parse_polynomial,
    pd_matrix_rank,
    poly_equal,
    weight,
)
from algcirc.randgen import random_circuit
from algcirc.rng import SplitMix64

F2 = prime_field(2)


def P(text, f=QQ, variables=None):
    return parse_polynomial(text, f, variables)


def square_of_sum(f=QQ):
    b = CircuitBuilder(f, ["x", "y"])
    s = b.add(b.input("x"), b.input("y"))
    return b.build(b.mul(s, s))


def sympy_of_circuit(c):
    """Independent oracle: replay the gates in sympy."""
    vals = {}
    for g in c.gates:
        if g.op == "input":
            vals[g.gid] = sympy.Symbol(g.var)
        elif g.op == "const":
            vals[g.gid] = sympy.Rational(str(g.value))
        elif g.op == "add":
            vals[g.gid] = vals[g.left] + vals[g.right]
        else:
            vals[g.gid] = vals[g.left] * vals[g.right]
    return sympy.Poly(sympy.expand(vals[c.outputs[0]]), *[sympy.Symbol(v) for v in c.variables])


def ours_as_sympy(p):
    syms = [sympy.Symbol(v) for v in p.variables]
    expr = sum((sympy.Rational(str(c)) * sympy.prod([s**e for s, e in zip(syms, exps)])
                for exps, c in p.items()), sympy.Integer(0))
    return sympy.Poly(expr, *syms)


def test_square_of_sum():
    assert expand(square_of_sum()) == P("1 * x^2\n2 * x * y\n1 * y^2")


def test_seven_gate_sample_expands(seven):
    assert expand(seven) == P("-1 * x^3\n1 * x * y\n1 * y^2\n-1")


def test_repeated_squaring():
    b = CircuitBuilder(QQ, ["x"])
    g = b.input("x")
    for _ in range(3):
        g = b.mul(g, g)
    assert expand(b.build(g)) == P("1 * x^8")


def test_equality_is_polynomial_not_function():
    p = P("1 * x^2\n-1 * x", F2)
    assert not poly_equal(p, SparsePolynomial(F2, ("x",)))
    assert all(p.evaluate({"x": v}).value == 0 for v in (0, 1))


def test_absent_variable_does_not_matter():
    p = P("1 * x * y")
    q = p.with_variables(("z", "y", "x"))
    assert p == q and hash(p) == hash(q)


def test_coefficients():
    p = expand(square_of_sum())
    assert p.coefficient({"x": 1, "y": 1}).value == 2
    assert p.coefficient({"x": 5}).value == 0


def test_coefficient_extraction_gives_permanent():
    n = 3
    b = CircuitBuilder(QQ, [f"x{i}_{j}" for i in range(1, n + 1) for j in range(1, n + 1)]
                       + [f"y{j}" for j in range(1, n + 1)])
    factors = []
    for i in range(1, n + 1):
        factors.append(b.sum([b.mul(b.input(f"x{i}_{j}"), b.input(f"y{j}")) for j in range(1, n + 1)]))
    p = expand(b.build(b.product(factors)))
    per3 = SparsePolynomial(QQ, p.variables)
    import itertools

    for sigma in itertools.permutations(range(1, n + 1)):
        per3 = per3 + SparsePolynomial.from_terms(
            QQ, p.variables, [({f"x{i}_{sigma[i - 1]}": 1 for i in range(1, n + 1)}, 1)])
    got = SparsePolynomial(QQ, p.variables, {})
    for exps, c in p.items():
        mono = dict(zip(p.variables, exps))
        if all(mono[f"y{j}"] == 1 for j in range(1, n + 1)):
            rest = {v: e for v, e in mono.items() if not v.startswith("y")}
            got = got + SparsePolynomial.from_terms(QQ, p.variables, [(rest, c)])
    assert got == per3


def test_weight_examples():
    assert weight(P("3 * x^2\n-2 * x\n1")) == 6
    assert weight(SparsePolynomial(QQ, ())) == 0
    with pytest.raises(NonIntegerCoefficients):
        weight(P("1/2 * x"))


def test_evaluate_examples(seven):
    assert evaluate(square_of_sum(), {"x": 2, "y": 3})[0].value == 25
    assert evaluate(seven, {"x": 1, "y": 1})[0].value == 0
    with pytest.raises(MissingAssignment):
        P("1 * x").evaluate({})


def test_budget():
    b = CircuitBuilder(QQ, [f"x{i}" for i in range(12)])
    s = b.sum([b.input(f"x{i}") for i in range(12)])
    g = s
    for _ in range(5):
        g = b.mul(g, s)
    with pytest.raises(BudgetExceeded):
        expand(b.build(g), budget=500)


def test_partial_derivative_ranks():
    assert pd_matrix_rank(P("1 * x1 * y1"), ["x1"], ["y1"]).rank == 1
    det2 = P("1 * x11 * x22\n-1 * x12 * x21")
    per2 = P("1 * x11 * x22\n1 * x12 * x21")
    assert pd_matrix_rank(det2, ["x11", "x12"], ["x21", "x22"]).rank == 2
    assert pd_matrix_rank(per2, ["x11", "x12"], ["x21", "x22"]).rank == 2
    with pytest.raises(BlocksNotPartition):
        pd_matrix_rank(det2, ["x11", "x12"], ["x12", "x21", "x22"])
    with pytest.raises(NotMultilinear):
        pd_matrix_rank(P("1 * x^2"), ["x"], [])


def test_text_round_trip():
    p = P("-1 * x^3\n1/2 * x * y\n7")
    assert parse_polynomial(format_polynomial(p), QQ) == p


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**40), st.integers(min_value=1, max_value=10))
def test_expand_matches_sympy(seed, ops):
    c = random_circuit(SplitMix64(seed), QQ, ops, ["x", "y", "z"])
    assert ours_as_sympy(expand(c)) == sympy_of_circuit(c)


poly_terms = st.lists(
    st.tuples(st.tuples(*[st.integers(0, 3)] * 3), st.integers(-5, 5)), max_size=6)


@settings(max_examples=100, deadline=None)
@given(poly_terms, poly_terms, poly_terms)
def test_ring_laws(a, b, c):
    v = ("x", "y", "z")
    p, q, r = (SparsePolynomial.from_terms(QQ, v, t) for t in (a, b, c))
    assert p * (q + r) == p * q + p * r
    assert (p * q) * r == p * (q * r)
    assert p - p == SparsePolynomial(QQ, v)
    assert weight(p + q) <= weight(p) + weight(q)
    assert weight(p * q) <= weight(p) * weight(q)


def test_weight_laws_on_500_pairs():
    rng = SplitMix64(2024)
    v = ("x", "y")

    def rand_poly():
        items = [((rng.below(4), rng.below(4)), rng.randint(-9, 9)) for _ in range(rng.randint(0, 5))]
        return SparsePolynomial.from_terms(QQ, v, items)

    for _ in range(500):
        p, q = rand_poly(), rand_poly()
        assert weight(p + q) <= weight(p) + weight(q)
        assert weight(p * q) <= weight(p) * weight(q)
