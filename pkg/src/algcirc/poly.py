"""Sparse multivariate polynomials and circuit expansion.

Monomials are packed into a single integer: the exponent of the i-th variable
occupies a 32-bit slot, with the first variable in the most significant slot.
Multiplying monomials is then integer addition, and sorting packed keys in
decreasing order gives lexicographic order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .circuit import ADD, CONST, INPUT, MUL, Circuit, formal_degrees
from .errors import (
    BlocksNotPartition,
    BudgetExceeded,
    FieldMismatch,
    MissingAssignment,
    NonIntegerCoefficients,
    NotMultilinear,
    UnknownVariable,
)
from .field import Field, FieldElement, Raw

SLOT = 32
SLOT_MASK = (1 << SLOT) - 1
MAX_EXPONENT = SLOT_MASK
DEFAULT_BUDGET = 10**6
# term-pair products allowed per unit of term budget
WORK_FACTOR = 16


def pack(exps: Sequence[int]) -> int:
    key = 0
    for e in exps:
        if e < 0 or e > MAX_EXPONENT:
            raise BudgetExceeded(f"exponent {e} does not fit a monomial slot")
        key = (key << SLOT) | e
    return key


def unpack(key: int, n: int) -> tuple[int, ...]:
    out = [0] * n
    for i in range(n - 1, -1, -1):
        out[i] = key & SLOT_MASK
        key >>= SLOT
    return tuple(out)


class SparsePolynomial:
    """Exact polynomial as a map from packed monomials to nonzero raw coefficients."""

    __slots__ = ("field", "variables", "terms")

    def __init__(self, field: Field, variables: Sequence[str] = (), terms: dict | None = None):
        self.field = field
        self.variables = tuple(variables)
        self.terms: dict[int, Raw] = {} if terms is None else terms

    # -- constructors ----------------------------------------------------
    @classmethod
    def constant(cls, field: Field, value, variables: Sequence[str] = ()) -> "SparsePolynomial":
        c = field.coerce(value)
        return cls(field, variables, {0: c} if c else {})

    @classmethod
    def variable(cls, field: Field, name: str, variables: Sequence[str] | None = None) -> "SparsePolynomial":
        variables = (name,) if variables is None else tuple(variables)
        if name not in variables:
            raise UnknownVariable(name)
        n = len(variables)
        return cls(field, variables, {1 << (SLOT * (n - 1 - variables.index(name))): 1})

    @classmethod
    def from_terms(cls, field: Field, variables: Sequence[str], items: Iterable) -> "SparsePolynomial":
        """Build from ``(exponent tuple or {var: exp}, coefficient)`` pairs."""
        variables = tuple(variables)
        terms: dict[int, Raw] = {}
        for mono, coeff in items:
            key = _mono_key(mono, variables)
            c = field.add(terms.get(key, 0), field.coerce(coeff))
            if c:
                terms[key] = c
            else:
                terms.pop(key, None)
        return cls(field, variables, terms)

    # -- alignment ---------------------------------------------------------
    def with_variables(self, variables: Sequence[str]) -> "SparsePolynomial":
        """Re-key onto a variable order containing all variables that occur."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        n_old, n_new = len(self.variables), len(variables)
        pos = {v: i for i, v in enumerate(variables)}
        used = self.occurring_variables()
        for v in used:
            if v not in pos:
                raise UnknownVariable(v)
        shifts = [
            (SLOT * (n_old - 1 - i), SLOT * (n_new - 1 - pos[v]))
            for i, v in enumerate(self.variables)
            if v in used
        ]
        terms = {}
        for key, c in self.terms.items():
            nk = 0
            for src, dst in shifts:
                nk |= ((key >> src) & SLOT_MASK) << dst
            terms[nk] = c
        return SparsePolynomial(self.field, variables, terms)

    def occurring_variables(self) -> set[str]:
        n = len(self.variables)
        acc = 0
        for key in self.terms:
            acc |= key
        return {
            v for i, v in enumerate(self.variables) if (acc >> (SLOT * (n - 1 - i))) & SLOT_MASK
        }

    def _align(self, other: "SparsePolynomial"):
        if self.field != other.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")
        if self.variables == other.variables:
            return self, other
        merged = list(self.variables)
        seen = set(merged)
        merged.extend(v for v in other.variables if v not in seen)
        return self.with_variables(merged), other.with_variables(merged)

    def _lift(self, other) -> "SparsePolynomial":
        if isinstance(other, SparsePolynomial):
            return other
        return SparsePolynomial.constant(self.field, other, self.variables)

    # -- ring operations -----------------------------------------------------
    def __add__(self, other):
        a, b = self._align(self._lift(other))
        f = a.field
        terms = dict(a.terms)
        for k, c in b.terms.items():
            s = f.add(terms.get(k, 0), c)
            if s:
                terms[k] = s
            else:
                terms.pop(k, None)
        return SparsePolynomial(f, a.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        f = self.field
        return SparsePolynomial(f, self.variables, {k: f.neg(c) for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        a, b = self._align(self._lift(other))
        return SparsePolynomial(a.field, a.variables, mul_terms(a.terms, b.terms, a.field))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = SparsePolynomial.constant(self.field, 1, self.variables)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def scale(self, c) -> "SparsePolynomial":
        f = self.field
        c = f.coerce(c)
        if not c:
            return SparsePolynomial(f, self.variables)
        return SparsePolynomial(f, self.variables, {k: f.mul(v, c) for k, v in self.terms.items()})

    # -- queries -------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, SparsePolynomial):
            if isinstance(other, (int, Fraction, FieldElement)):
                other = self._lift(other)
            else:
                return NotImplemented
        a, b = self._align(other)
        return a.terms == b.terms

    def __hash__(self):
        return hash(frozenset(self.canonical_items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def canonical_items(self):
        """Terms keyed independently of variable order: (sorted (var, exp) pairs, coeff)."""
        n = len(self.variables)
        out = []
        for key, c in self.terms.items():
            exps = unpack(key, n)
            out.append((tuple(sorted((v, e) for v, e in zip(self.variables, exps) if e)), c))
        return out

    def items(self):
        """(exponent tuple, coefficient) in decreasing lexicographic order."""
        n = len(self.variables)
        for key in sorted(self.terms, reverse=True):
            yield unpack(key, n), self.terms[key]

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        n = len(self.variables)
        return max((sum(unpack(k, n)) for k in self.terms), default=-1)

    def degree_in(self, var: str) -> int:
        if var not in self.variables:
            return 0 if self.terms else -1
        n = len(self.variables)
        shift = SLOT * (n - 1 - self.variables.index(var))
        return max(((k >> shift) & SLOT_MASK for k in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        n = len(self.variables)
        return len({sum(unpack(k, n)) for k in self.terms}) <= 1

    def is_multilinear(self) -> bool:
        n = len(self.variables)
        return all(e <= 1 for k in self.terms for e in unpack(k, n))

    def homogeneous_component(self, d: int) -> "SparsePolynomial":
        n = len(self.variables)
        return SparsePolynomial(
            self.field, self.variables, {k: c for k, c in self.terms.items() if sum(unpack(k, n)) == d}
        )

    def coefficient(self, monomial) -> FieldElement:
        """Coefficient of a monomial given as ``{var: exp}`` or an exponent tuple."""
        if isinstance(monomial, Mapping):
            if any(e and v not in self.variables for v, e in monomial.items()):
                return self.field.element(0)
        key = _mono_key(monomial, self.variables)
        return self.field.element(self.terms.get(key, 0))

    def evaluate(self, point: Mapping[str, object]) -> FieldElement:
        f = self.field
        n = len(self.variables)
        used = self.occurring_variables()
        vals = []
        for v in self.variables:
            if v in point:
                vals.append(f.coerce(point[v]))
            elif v in used:
                raise MissingAssignment(v)
            else:
                vals.append(0)
        return f.element(_eval_terms(self.terms, vals, f, n))

    def eval_raw(self, values: Sequence[Raw]) -> Raw:
        return _eval_terms(self.terms, values, self.field, len(self.variables))

    def substitute(self, assignment: Mapping[str, Raw]) -> "SparsePolynomial":
        """Replace some variables by constants; the rest stay symbolic."""
        f = self.field
        n = len(self.variables)
        keep = [v for v in self.variables if v not in assignment]
        keep_pos = {v: i for i, v in enumerate(keep)}
        m = len(keep)
        terms: dict[int, Raw] = {}
        for key, c in self.terms.items():
            exps = unpack(key, n)
            nk = 0
            for v, e in zip(self.variables, exps):
                if not e:
                    continue
                if v in assignment:
                    c = f.mul(c, f.pow(f.coerce(assignment[v]), e))
                else:
                    nk |= e << (SLOT * (m - 1 - keep_pos[v]))
            if c:
                s = f.add(terms.get(nk, 0), c)
                if s:
                    terms[nk] = s
                else:
                    terms.pop(nk, None)
        return SparsePolynomial(f, keep, terms)

    def __repr__(self):
        return f"SparsePolynomial({format_polynomial(self)!r})"

    def __str__(self):
        return format_polynomial(self).replace("\n", " + ")


def _mono_key(mono, variables: tuple[str, ...]) -> int:
    if isinstance(mono, Mapping):
        pos = {v: i for i, v in enumerate(variables)}
        exps = [0] * len(variables)
        for v, e in mono.items():
            if not e:
                continue
            if v not in pos:
                raise UnknownVariable(v)
            exps[pos[v]] = e
        return pack(exps)
    if len(mono) != len(variables):
        raise ValueError("exponent tuple length does not match variable count")
    return pack(mono)


def mul_terms(t1: dict, t2: dict, f: Field) -> dict:
    if len(t1) < len(t2):
        t1, t2 = t2, t1
    out: dict[int, Raw] = {}
    get = out.get
    p = f.modulus
    if p is not None:
        for k2, c2 in t2.items():
            for k1, c1 in t1.items():
                k = k1 + k2
                out[k] = (get(k, 0) + c1 * c2) % p
    else:
        for k2, c2 in t2.items():
            for k1, c1 in t1.items():
                k = k1 + k2
                out[k] = get(k, 0) + c1 * c2
        out = {k: (c.numerator if isinstance(c, Fraction) and c.denominator == 1 else c)
               for k, c in out.items()}
    return {k: c for k, c in out.items() if c}


def add_terms(t1: dict, t2: dict, f: Field) -> dict:
    if len(t1) < len(t2):
        t1, t2 = t2, t1
    out = dict(t1)
    add = f.add
    for k, c in t2.items():
        s = add(out.get(k, 0), c)
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def _eval_terms(terms: dict, values: Sequence[Raw], f: Field, n: int) -> Raw:
    total = 0
    for key, c in terms.items():
        exps = unpack(key, n)
        t = c
        for v, e in zip(values, exps):
            if e:
                t = f.mul(t, f.pow(v, e))
        total = f.add(total, t)
    return total


# ----------------------------------------------------------------------
# circuit expansion


def estimate_terms(c: Circuit, gate: str | None = None) -> int:
    """Upper bound on the number of terms of every intermediate polynomial
    in the cone of ``gate``.

    Per gate the bound is the smaller of the add/mul counting rule and the
    number of monomials of the gate's formal degree in its variables.
    """
    gid = c.outputs[0] if gate is None else gate
    target = c.index[gid]
    mask = c.cone_masks[target]
    degs = formal_degrees(c)
    ch = c.child_indices
    est: dict[int, int] = {}
    nvars: dict[int, frozenset] = {}
    worst = 1
    for i, g in enumerate(c.gates[: target + 1]):
        if not (mask >> i) & 1:
            continue
        if g.op == INPUT:
            est[i], nvars[i] = 1, frozenset([g.var])
            continue
        if g.op == CONST:
            est[i], nvars[i] = 1, frozenset()
            continue
        a, b = ch[i]
        vs = nvars[a] | nvars[b]
        nvars[i] = vs
        rule = est[a] + est[b] if g.op == ADD else est[a] * est[b]
        bound = math.comb(len(vs) + degs[i], degs[i]) if degs[i] < 10**6 else rule
        est[i] = min(rule, bound)
        worst = max(worst, est[i])
    return worst


def expand(c: Circuit, gate: str | None = None, budget: int = DEFAULT_BUDGET) -> SparsePolynomial:
    """Exact polynomial computed at ``gate`` (default: first output).

    Raises BudgetExceeded as soon as an intermediate polynomial exceeds
    ``budget`` terms.
    """
    return expand_many(c, [c.outputs[0] if gate is None else gate], budget)[0]


def expand_many(c: Circuit, gates: Sequence[str], budget: int = DEFAULT_BUDGET) -> list[SparsePolynomial]:
    f = c.field
    n = len(c.variables)
    var_key = {v: 1 << (SLOT * (n - 1 - i)) for i, v in enumerate(c.variables)}
    idx = c.index
    targets = [idx[g] for g in gates]
    mask = 0
    for t in targets:
        mask |= c.cone_masks[t]
    last = max(targets)
    degs = formal_degrees(c)
    if max(degs[i] for i in targets) > MAX_EXPONENT:
        raise BudgetExceeded("formal degree exceeds the supported exponent range")
    ch = c.child_indices
    # reference counts let intermediate polynomials be dropped early
    remaining = [0] * len(c.gates)
    for i in range(last + 1):
        if (mask >> i) & 1:
            for a in ch[i]:
                remaining[a] += 1
    for t in targets:
        remaining[t] += 1
    vals: dict[int, dict] = {}
    work = 0
    for i in range(last + 1):
        if not (mask >> i) & 1:
            continue
        g = c.gates[i]
        if g.op == INPUT:
            vals[i] = {var_key[g.var]: 1}
        elif g.op == CONST:
            vals[i] = {0: g.value} if g.value else {}
        else:
            a, b = ch[i]
            ta, tb = vals[a], vals[b]
            if g.op == MUL:
                work += len(ta) * len(tb)
                if work > WORK_FACTOR * budget:
                    raise BudgetExceeded(
                        f"gate {g.gid}: more than {WORK_FACTOR * budget} term products "
                        f"(term budget {budget})"
                    )
                t = mul_terms(ta, tb, f)
            else:
                t = add_terms(ta, tb, f)
            if len(t) > budget:
                raise BudgetExceeded(
                    f"gate {g.gid} has {len(t)} terms (budget {budget}); "
                    f"estimated bound {estimate_terms(c, g.gid)}"
                )
            vals[i] = t
            for x in (a, b):
                remaining[x] -= 1
                if remaining[x] == 0:
                    del vals[x]
    return [SparsePolynomial(f, c.variables, dict(vals[t])) for t in targets]


def evaluate(c: Circuit, point: Mapping[str, object]) -> list[FieldElement]:
    """Evaluate every output at a point; values may be ints, Fractions or elements."""
    f = c.field
    raw = {}
    for v in c.variables:
        if v in point:
            raw[v] = f.coerce(point[v])
    return [f.element(x) for x in c.eval_raw(raw)]


def poly_equal(p: SparsePolynomial, q: SparsePolynomial) -> bool:
    if p.field != q.field:
        raise FieldMismatch(f"{p.field} vs {q.field}")
    return p == q


def weight(p: SparsePolynomial) -> int:
    """Sum of absolute values of the coefficients of an integer polynomial."""
    if not p.field.is_rational:
        raise NonIntegerCoefficients("weight is defined for integer polynomials over Q")
    total = 0
    for c in p.terms.values():
        if not isinstance(c, int):
            raise NonIntegerCoefficients(str(c))
        total += abs(c)
    return total


# ----------------------------------------------------------------------
# text format


def format_polynomial(p: SparsePolynomial) -> str:
    if not p.terms:
        return "0"
    lines = []
    for exps, c in p.items():
        factors = [p.field.format(c)]
        for v, e in zip(p.variables, exps):
            if e == 1:
                factors.append(v)
            elif e:
                factors.append(f"{v}^{e}")
        lines.append(" * ".join(factors))
    return "\n".join(lines)


def parse_polynomial(text: str, field: Field, variables: Sequence[str] | None = None) -> SparsePolynomial:
    items = []
    order: list[str] = list(variables or ())
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [s.strip() for s in line.split("*")]
        coeff = field.parse_literal(parts[0])
        mono: dict[str, int] = {}
        for fac in parts[1:]:
            name, _, e = fac.partition("^")
            mono[name] = mono.get(name, 0) + (int(e) if e else 1)
            if name not in order:
                if variables is not None:
                    raise UnknownVariable(name)
                order.append(name)
        items.append((mono, coeff))
    return SparsePolynomial.from_terms(field, order, items)


# ----------------------------------------------------------------------
# partial-derivative matrix


@dataclass(frozen=True)
class PDMatrix:
    rows: tuple  # row monomials as frozensets of y-variables
    cols: tuple
    entries: tuple  # tuple of row tuples of raw values
    rank: int


MAX_PD_ENTRIES = 2**20


def pd_matrix_rank(p: SparsePolynomial, y_block: Iterable[str], z_block: Iterable[str]) -> PDMatrix:
    """Coefficient matrix M[r][c] = coeff of r*c over multilinear monomials."""
    from .linalg import rank

    y, z = tuple(y_block), tuple(z_block)
    ys, zs = set(y), set(z)
    if ys & zs or len(ys) != len(y) or len(zs) != len(z) or not p.occurring_variables() <= ys | zs:
        raise BlocksNotPartition(f"{sorted(ys)} / {sorted(zs)}")
    if not p.is_multilinear():
        raise NotMultilinear("partial-derivative matrix needs a multilinear polynomial")
    if 2 ** (len(y) + len(z)) > MAX_PD_ENTRIES:
        raise BudgetExceeded(f"2^{len(y) + len(z)} matrix entries")
    n = len(p.variables)
    ymask = {v: 1 << i for i, v in enumerate(y)}
    zmask = {v: 1 << i for i, v in enumerate(z)}
    nr, nc = 1 << len(y), 1 << len(z)
    mat = [[0] * nc for _ in range(nr)]
    for key, c in p.terms.items():
        exps = unpack(key, n)
        r = col = 0
        for v, e in zip(p.variables, exps):
            if e:
                if v in ymask:
                    r |= ymask[v]
                else:
                    col |= zmask[v]
        mat[r][col] = c
    rows = tuple(frozenset(v for v in y if r & ymask[v]) for r in range(nr))
    cols = tuple(frozenset(v for v in z if k & zmask[v]) for k in range(nc))
    return PDMatrix(rows, cols, tuple(tuple(r) for r in mat), rank(mat, p.field))
