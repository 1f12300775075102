"""Named polynomial families: a circuit construction for each, plus an
enumeration oracle that does not look at the construction."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Sequence

from .circuit import Circuit, CircuitBuilder, classify, metrics
from .det_embed import berkowitz_gates, berkowitz_det_circuit
from .errors import BudgetExceeded, FieldTooSmall, NotPrime, ParamOutOfRange, UnknownVariable
from .field import Field, Raw, is_prime
from .matrices import count_cycles, leibniz
from .perm_embed import sum_over_cube
from .poly import DEFAULT_BUDGET, SparsePolynomial, expand
from .rng import SplitMix64

FAMILIES = ("det", "per", "hc", "imm", "esym", "cut", "trees")

# inclusive parameter ranges for generation
LIMITS = {
    "det": {"n": (1, 16)},
    "per": {"n": (1, 10)},
    "hc": {"n": (2, 8)},
    "imm": {"n": (1, 8), "d": (1, 12)},
    "esym": {"n": (1, 16), "d": (0, 16)},
    "cut": {"n": (2, 8), "q": (2, 97)},
    "trees": {"n": (2, 9)},
}
DECLARED = {
    "det": "weakly-skew",
    "per": "formula",
    "hc": "formula",
    "imm": "skew",
    "esym": "formula",
    "cut": "formula",
    "trees": "weakly-skew",
}


def xvar(i: int, j: int) -> str:
    """Matrix variable x{i}_{j}, 1-based."""
    return f"x{i}_{j}"


def matrix_names(n: int) -> list[str]:
    return [xvar(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]


def edge_names(n: int) -> list[str]:
    """Undirected edge variables of K_n with i < j."""
    return [xvar(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def edge_var(i: int, j: int) -> str:
    return xvar(min(i, j), max(i, j))


def imm_names(n: int, d: int) -> list[str]:
    return [f"{_letter(k)}{i}_{j}" for k in range(d) for i in range(1, n + 1) for j in range(1, n + 1)]


def _letter(k: int) -> str:
    s = ""
    k += 1
    while k:
        k, r = divmod(k - 1, 26)
        s = chr(97 + r) + s
    return s


# ----------------------------------------------------------------------
# constructions


def _per_formula(f: Field, n: int) -> Circuit:
    """Ryser's inclusion-exclusion written out as a formula."""
    names = matrix_names(n)
    b = CircuitBuilder(f, names)
    terms = []
    for size in range(1, n + 1):
        for cols in itertools.combinations(range(1, n + 1), size):
            rows = [b.sum([b.input(xvar(i, j)) for j in cols]) for i in range(1, n + 1)]
            prod = b.product(rows)
            if (n - size) % 2:
                prod = b.mul(b.const(-1), prod)
            terms.append(prod)
    return b.build(b.sum(terms))


def _hc_formula(f: Field, n: int) -> Circuit:
    """Sum over cyclic orders 1 -> p_1 -> ... -> p_{n-1} -> 1."""
    names = matrix_names(n)
    b = CircuitBuilder(f, names)
    terms = []
    for rest in itertools.permutations(range(2, n + 1)):
        cyc = (1,) + rest
        terms.append(b.product([b.input(xvar(cyc[k], cyc[(k + 1) % n])) for k in range(n)]))
    return b.build(b.sum(terms))


def _imm_circuit(f: Field, n: int, d: int) -> Circuit:
    """Trace of the product of d generic n x n matrices, as a skew circuit:
    for each i, the row vector e_i^T M_1 ... M_k is pushed through one
    matrix at a time, every product taking a fresh input gate."""
    names = imm_names(n, d)
    b = CircuitBuilder(f, names)
    diag = []
    for i in range(1, n + 1):
        row = [b.input(f"a{i}_{j}") for j in range(1, n + 1)]
        for k in range(1, d):
            m = _letter(k)
            row = [
                b.sum([b.mul(row[l - 1], b.input(f"{m}{l}_{j}")) for l in range(1, n + 1)])
                for j in range(1, n + 1)
            ]
        diag.append(row[i - 1])
    return b.build(b.sum(diag))


def _interpolation_weights(f: Field, points: Sequence[Raw], d: int) -> list[Raw]:
    """Weights w_k with sum_k w_k P(t_k) = coefficient of t^d, for every
    polynomial P of degree < len(points) (row d of the inverse Vandermonde)."""
    m = len(points)
    # solve V^T w = e_d, V[k][j] = t_k^j
    a = [[f.pow(points[k], j) for k in range(m)] + [f.one if j == d else f.zero] for j in range(m)]
    for col in range(m):
        piv = next(r for r in range(col, m) if a[r][col] != f.zero)
        a[col], a[piv] = a[piv], a[col]
        inv = f.inv(a[col][col])
        a[col] = [f.mul(inv, x) for x in a[col]]
        for r in range(m):
            if r != col and a[r][col] != f.zero:
                factor = a[r][col]
                a[r] = [f.sub(x, f.mul(factor, y)) for x, y in zip(a[r], a[col])]
    return [a[k][m] for k in range(m)]


def _esym_formula(f: Field, n: int, d: int) -> Circuit:
    """e_d(x_1..x_n) as the t^d coefficient of prod_i (1 + t x_i),
    recovered by interpolation at t = 0, 1, ..., n."""
    if f.characteristic and f.characteristic < n + 1:
        raise FieldTooSmall(f"interpolation needs {n + 1} distinct points, field has {f.characteristic}")
    names = [f"x{i}" for i in range(1, n + 1)]
    points = [f.coerce(k) for k in range(n + 1)]
    weights = _interpolation_weights(f, points, d)
    b = CircuitBuilder(f, names)
    terms = []
    for t, w in zip(points, weights):
        if w == f.zero:
            continue
        factors = []
        for v in names:
            if t == f.zero:
                continue
            x = b.input(v) if t == f.one else b.mul(b.const(t), b.input(v))
            factors.append(b.add(b.const(1), x))
        prod = b.product(factors) if factors else b.const(1)
        terms.append(prod if w == f.one else b.mul(b.const(w), prod))
    out = b.sum(terms) if terms else b.const(0)
    return b.build(out)


def _cuts(n: int):
    """Unordered cuts {A, B} of {1..n}, both parts nonempty; A holds 1."""
    for mask in range(1 << (n - 1)):
        a = [1] + [i + 2 for i in range(n - 1) if (mask >> i) & 1]
        if len(a) == n:
            continue
        yield a, [i for i in range(1, n + 1) if i not in a]


def _check_cut_field(f: Field, q: int) -> None:
    if not is_prime(q):
        raise NotPrime(f"cut enumerator needs a prime q, got {q}")
    if f.characteristic != q:
        raise FieldTooSmall(f"cut enumerator with q = {q} is defined over F_{q}, got {f.spec()}")


def _cut_formula(f: Field, n: int, q: int) -> Circuit:
    _check_cut_field(f, q)
    names = edge_names(n)
    b = CircuitBuilder(f, names)
    terms = []
    for a, rest in _cuts(n):
        factors = [b.input(edge_var(i, j)) for i in a for j in rest for _ in range(q - 1)]
        terms.append(b.product(factors))
    return b.build(b.sum(terms))


def _trees_circuit(f: Field, n: int) -> Circuit:
    """Determinant of the Laplacian of K_n with the last row and column
    removed, through the Berkowitz construction; each matrix entry is
    rebuilt from fresh input gates at every use."""
    names = edge_names(n)
    b = CircuitBuilder(f, names)
    m = n - 1

    def entry(i: int, j: int) -> str:
        if i == j:
            return b.sum([b.input(edge_var(i + 1, l)) for l in range(1, n + 1) if l != i + 1])
        return b.mul(b.const(-1), b.input(edge_var(i + 1, j + 1)))

    if m == 1:
        return b.build(entry(0, 0))
    out = berkowitz_gates(b, m, entry)
    return b.build(out).restrict(out)


def construct(name: str, params: dict, f: Field) -> Circuit:
    n = params["n"]
    if name == "det":
        return berkowitz_det_circuit(n, f)
    if name == "per":
        return _per_formula(f, n)
    if name == "hc":
        return _hc_formula(f, n)
    if name == "imm":
        return _imm_circuit(f, n, params["d"])
    if name == "esym":
        return _esym_formula(f, n, params["d"])
    if name == "cut":
        return _cut_formula(f, n, params["q"])
    if name == "trees":
        return _trees_circuit(f, n)
    raise ParamOutOfRange(f"unknown family {name!r}")


# ----------------------------------------------------------------------
# oracles


ORACLE_LIMITS = {"det": 7, "per": 7, "hc": 8, "imm": 4, "esym": 16, "cut": 8, "trees": 7}


def _generic(n: int) -> list[list[str]]:
    return [[xvar(i, j) for j in range(1, n + 1)] for i in range(1, n + 1)]


def _monomial(f: Field, names: Sequence[str], factors: Sequence[str]) -> SparsePolynomial:
    exps = {}
    for v in factors:
        exps[v] = exps.get(v, 0) + 1
    return SparsePolynomial.from_terms(f, names, [(exps, 1)])


def family_oracle(name: str, params: dict, f: Field) -> SparsePolynomial:
    """The defining sum of the family, by direct enumeration."""
    n = params["n"]
    if n > ORACLE_LIMITS.get(name, 0):
        raise BudgetExceeded(f"{name} oracle limited to n <= {ORACLE_LIMITS.get(name)}")
    if name in ("det", "per"):
        return leibniz(_generic(n), f, name == "det", matrix_names(n))
    if name == "hc":
        names = matrix_names(n)
        total = SparsePolynomial(f, names)
        for perm in itertools.permutations(range(n)):
            if count_cycles(perm) == 1:
                total = total + _monomial(f, names, [xvar(i + 1, perm[i] + 1) for i in range(n)])
        return total
    if name == "imm":
        d = params["d"]
        names = imm_names(n, d)
        total = SparsePolynomial(f, names)
        for idx in itertools.product(range(1, n + 1), repeat=d):
            factors = [f"{_letter(k)}{idx[k]}_{idx[(k + 1) % d]}" for k in range(d)]
            total = total + _monomial(f, names, factors)
        return total
    if name == "esym":
        d = params["d"]
        names = [f"x{i}" for i in range(1, n + 1)]
        total = SparsePolynomial(f, names)
        for subset in itertools.combinations(names, d):
            total = total + _monomial(f, names, subset)
        return total
    if name == "cut":
        q = params["q"]
        _check_cut_field(f, q)
        names = edge_names(n)
        total = SparsePolynomial(f, names)
        seen = set()
        for mask in range(1, (1 << n) - 1):
            side = frozenset(i + 1 for i in range(n) if (mask >> i) & 1)
            key = frozenset({side, frozenset(range(1, n + 1)) - side})
            if key in seen:
                continue
            seen.add(key)
            crossing = [edge_var(i, j) for i in side for j in range(1, n + 1) if j not in side]
            total = total + _monomial(f, names, crossing * (q - 1))
        return total
    if name == "trees":
        names = edge_names(n)
        edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
        total = SparsePolynomial(f, names)
        for chosen in itertools.combinations(edges, n - 1):
            if _is_spanning_tree(n, chosen):
                total = total + _monomial(f, names, [xvar(i, j) for i, j in chosen])
        return total
    raise ParamOutOfRange(f"unknown family {name!r}")


def _is_spanning_tree(n: int, edges) -> bool:
    parent = list(range(n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        a, b = find(i), find(j)
        if a == b:
            return False
        parent[a] = b
    return True


def perfect_matchings_gf(n: int, f: Field) -> SparsePolynomial:
    """Generating function of the perfect matchings of K_{n,n}, edge
    (i, j) weighted x{i}_{j}, built by matching left vertices in turn."""
    names = matrix_names(n)
    total = SparsePolynomial(f, names)

    def extend(i: int, used: int, picked: list[str]):
        nonlocal total
        if i > n:
            total = total + _monomial(f, names, picked)
            return
        for j in range(1, n + 1):
            if not (used >> j) & 1:
                picked.append(xvar(i, j))
                extend(i + 1, used | (1 << j), picked)
                picked.pop()

    extend(1, 0, [])
    return total


# ----------------------------------------------------------------------
# descriptor


@dataclass
class FamilyDescriptor:
    name: str
    params: dict
    field: Field
    construction: Circuit
    declared: str
    meta: dict = dc_field(default_factory=dict)

    def reference(self) -> SparsePolynomial:
        return family_oracle(self.name, self.params, self.field)

    def verify(self, points: int = 20, seed: int = 0, budget: int = DEFAULT_BUDGET) -> tuple[bool, str]:
        """Check the construction against the oracle: symbolically when the
        oracle is in range, else the declared class only plus random-point
        agreement with an independent evaluator where one exists."""
        try:
            ref = self.reference()
            got = expand(self.construction, budget=budget)
            return got == ref, "oracle"
        except BudgetExceeded:
            pass
        ok = numeric_check(self, points, seed)
        return ok, "random points"

    def sidecar(self, verified: str | None = None) -> str:
        lines = [
            "family " + self.name,
            "params " + " ".join(f"{k}={v}" for k, v in sorted(self.params.items())),
            "field " + self.field.spec(),
            "declared " + self.declared,
        ]
        for k, v in self.meta.items():
            lines.append(f"{k} {v}")
        if verified is not None:
            lines.append("verified " + verified)
        return "\n".join(lines) + "\n"


def check_params(name: str, params: dict) -> dict:
    if name not in FAMILIES:
        raise ParamOutOfRange(f"unknown family {name!r}; expected one of {', '.join(FAMILIES)}")
    limits = LIMITS[name]
    missing = [k for k in limits if k not in params]
    if missing:
        raise ParamOutOfRange(f"{name} needs parameters {', '.join(limits)}")
    for k, (lo, hi) in limits.items():
        if not lo <= params[k] <= hi:
            raise ParamOutOfRange(f"{name}: {k} = {params[k]} outside [{lo}, {hi}]")
    if name == "esym" and params["d"] > params["n"]:
        raise ParamOutOfRange("esym needs d <= n")
    return {k: params[k] for k in limits}


def gen_family(name: str, params: dict, f: Field) -> FamilyDescriptor:
    params = check_params(name, params)
    c = construct(name, params, f)
    flags = classify(c)
    m = metrics(c)
    declared = DECLARED[name]
    holds = {
        "formula": flags.is_formula,
        "skew": flags.is_skew,
        "weakly-skew": flags.is_weakly_skew,
    }[declared]
    assert holds, f"{name} construction is not {declared}"
    meta = {"size": m.size, "depth": m.depth, "degree": m.degree}
    return FamilyDescriptor(name, params, f, c, declared, meta)


def numeric_check(desc: FamilyDescriptor, points: int, seed: int) -> bool:
    """Random-point agreement with a definition-level evaluator that avoids
    symbolic expansion (only det, per and trees have one)."""
    from .linalg import det_bareiss
    from .perm_embed import ryser_numeric

    f = desc.field
    rng = SplitMix64(seed)
    c = desc.construction
    n = desc.params["n"]
    span = f.characteristic or 1000
    for _ in range(points):
        pt = {v: f.coerce(rng.below(span)) for v in c.variables}
        got = c.eval_raw(pt)[0]
        if desc.name in ("det", "per"):
            m = [[pt[xvar(i, j)] for j in range(1, n + 1)] for i in range(1, n + 1)]
            want = det_bareiss(m, f) if desc.name == "det" else ryser_numeric(m, f)
        elif desc.name == "trees":
            lap = [[f.zero] * (n - 1) for _ in range(n - 1)]
            for i in range(1, n):
                for j in range(1, n + 1):
                    if i != j:
                        w = pt[edge_var(i, j)]
                        lap[i - 1][i - 1] = f.add(lap[i - 1][i - 1], w)
                        if j < n:
                            lap[i - 1][j - 1] = f.neg(w)
            want = det_bareiss(lap, f)
        else:
            raise BudgetExceeded(f"no numeric evaluator for {desc.name} beyond the oracle range")
        if got != want:
            return False
    return True


# ----------------------------------------------------------------------
# exponential sums


def exponential_sum(g: Circuit, summed: Sequence[str], budget: int = DEFAULT_BUDGET) -> SparsePolynomial:
    """Sum of g over all 0/1 values of the variables ``summed``, as a
    polynomial in the other variables (variable-by-variable halving)."""
    for y in summed:
        if y not in g.variables:
            raise UnknownVariable(y)
    if len(summed) > 20:
        raise BudgetExceeded(f"{len(summed)} summed variables (limit 20)")
    return sum_over_cube(expand(g, budget=budget), summed)


def exponential_sum_enumerated(g: Circuit, summed: Sequence[str], budget: int = DEFAULT_BUDGET) -> SparsePolynomial:
    """Same sum with one substitution per assignment."""
    for y in summed:
        if y not in g.variables:
            raise UnknownVariable(y)
    if len(summed) > 20:
        raise BudgetExceeded(f"{len(summed)} summed variables (limit 20)")
    p = expand(g, budget=budget)
    rest = tuple(v for v in g.variables if v not in summed)
    total = SparsePolynomial(g.field, rest)
    for bits in itertools.product((0, 1), repeat=len(summed)):
        term = p.substitute(dict(zip(summed, bits)))
        total = total + term.with_variables(rest)
    return total
