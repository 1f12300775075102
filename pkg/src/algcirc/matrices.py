"""Symbolic matrices whose entries are constants or (scaled) variables, with
exact determinants and permanents.

An entry is one of

* a raw field constant,
* a variable name (``str``),
* a pair ``(coef, name)`` standing for ``coef * name``.
"""

from __future__ import annotations

import itertools
import re
from typing import Iterable, Sequence

from .errors import BudgetExceeded, CircuitSyntaxError, UnknownVariable
from .field import Field, Raw
from .poly import DEFAULT_BUDGET, SLOT, SparsePolynomial, add_terms, mul_terms

Entry = object
_SCALED = re.compile(r"^(-?)(?:([0-9/+-]+)\*)?([A-Za-z_][A-Za-z0-9_]*)$")


def is_var_entry(e) -> bool:
    return isinstance(e, (str, tuple))


def is_bare(e) -> bool:
    """A constant or a single unscaled variable."""
    return not isinstance(e, tuple)


def entry_var(e) -> str | None:
    if isinstance(e, str):
        return e
    if isinstance(e, tuple):
        return e[1]
    return None


def entry_coef(e, f: Field) -> Raw:
    return e[0] if isinstance(e, tuple) else f.one


def scale_entry(e, c: Raw, f: Field):
    """c * e, normalised (coefficient 1 gives a bare variable, 0 gives 0)."""
    if not c:
        return f.zero
    if isinstance(e, str):
        return e if c == f.one else (c, e)
    if isinstance(e, tuple):
        k = f.mul(e[0], c)
        return e[1] if k == f.one else (k, e[1]) if k else f.zero
    return f.mul(e, c)


def is_nonzero(e) -> bool:
    return is_var_entry(e) or bool(e)


def matrix_variables(m: Sequence[Sequence[Entry]]) -> tuple[str, ...]:
    seen: list[str] = []
    for row in m:
        for e in row:
            v = entry_var(e)
            if v is not None and v not in seen:
                seen.append(v)
    return tuple(seen)


def _entry_terms(e, f: Field, var_key) -> dict:
    if isinstance(e, str):
        return {var_key[e]: f.one}
    if isinstance(e, tuple):
        return {var_key[e[1]]: e[0]} if e[0] else {}
    return {0: e} if e else {}


def entry_value(e, point, f: Field) -> Raw:
    if isinstance(e, str):
        return point[e]
    if isinstance(e, tuple):
        return f.mul(e[0], point[e[1]])
    return e


def evaluate_matrix(m, point, f: Field) -> list[list[Raw]]:
    return [[entry_value(e, point, f) for e in row] for row in m]


def _setup(m, f: Field, variables):
    variables = tuple(variables) if variables is not None else matrix_variables(m)
    n = len(variables)
    var_key = {v: 1 << (SLOT * (n - 1 - i)) for i, v in enumerate(variables)}
    for row in m:
        for e in row:
            v = entry_var(e)
            if v is not None and v not in var_key:
                raise UnknownVariable(v)
    return variables, var_key


def _perm_sign(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def leibniz(m, f: Field, signed: bool, variables=None) -> SparsePolynomial:
    """Sum over all permutations (the definition)."""
    variables, var_key = _setup(m, f, variables)
    n = len(m)
    if n > 9:
        raise BudgetExceeded(f"{n}! permutations")
    cells = [[_entry_terms(e, f, var_key) for e in row] for row in m]
    total: dict = {}
    for perm in itertools.permutations(range(n)):
        prod = {0: f.one}
        for i, j in enumerate(perm):
            t = cells[i][j]
            if not t:
                prod = {}
                break
            prod = mul_terms(prod, t, f)
        if not prod:
            continue
        if signed and _perm_sign(perm) < 0:
            prod = {k: f.neg(c) for k, c in prod.items()}
        total = add_terms(total, prod, f)
    return SparsePolynomial(f, variables, total)


def cycle_covers(m) -> Iterable[tuple[int, ...]]:
    """Every cycle cover of the digraph of nonzero entries, as successor tuples.

    A cover is built cycle by cycle, each cycle starting at the smallest node
    not yet covered.
    """
    n = len(m)
    succ = [[j for j in range(n) if is_nonzero(m[i][j])] for i in range(n)]
    nxt = [-1] * n
    covered = [False] * n

    def extend(start: int, cur: int):
        for j in succ[cur]:
            if j == start:
                nxt[cur] = start
                yield from new_cycle()
                nxt[cur] = -1
            elif not covered[j] and j > start:
                covered[j] = True
                nxt[cur] = j
                yield from extend(start, j)
                nxt[cur] = -1
                covered[j] = False

    def new_cycle():
        start = next((i for i in range(n) if not covered[i]), None)
        if start is None:
            yield tuple(nxt)
            return
        covered[start] = True
        yield from extend(start, start)
        covered[start] = False

    yield from new_cycle()


def count_cycles(succ: Sequence[int]) -> int:
    seen = [False] * len(succ)
    k = 0
    for i in range(len(succ)):
        if not seen[i]:
            k += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = succ[j]
    return k


def cycle_cover_sum(m, f: Field, signed: bool, variables=None) -> SparsePolynomial:
    """Determinant (signed) or permanent as a sum over cycle covers."""
    variables, var_key = _setup(m, f, variables)
    n = len(m)
    cells = [[_entry_terms(e, f, var_key) for e in row] for row in m]
    total: dict = {}
    for cover in cycle_covers(m):
        prod = {0: f.one}
        for i, j in enumerate(cover):
            prod = mul_terms(prod, cells[i][j], f)
        if signed and (n - count_cycles(cover)) % 2:
            prod = {k: f.neg(c) for k, c in prod.items()}
        total = add_terms(total, prod, f)
    return SparsePolynomial(f, variables, total)


def minor_expansion(m, f: Field, signed: bool, variables=None, budget: int = DEFAULT_BUDGET) -> SparsePolynomial:
    """Row-by-row expansion keyed by the set of used columns.

    Only column sets reachable through nonzero entries are stored, which keeps
    sparse matrices cheap.
    """
    variables, var_key = _setup(m, f, variables)
    n = len(m)
    states: dict[int, dict] = {0: {0: f.one}}
    for i in range(n):
        row = [(j, _entry_terms(e, f, var_key)) for j, e in enumerate(m[i]) if is_nonzero(e)]
        nxt: dict[int, dict] = {}
        for mask, poly in states.items():
            for j, t in row:
                bit = 1 << j
                if mask & bit:
                    continue
                prod = mul_terms(poly, t, f)
                if not prod:
                    continue
                if signed and bin(mask >> j).count("1") % 2:
                    prod = {k: f.neg(c) for k, c in prod.items()}
                key = mask | bit
                cur = nxt.get(key)
                nxt[key] = prod if cur is None else add_terms(cur, prod, f)
                if len(nxt[key]) > budget:
                    raise BudgetExceeded(f"{len(nxt[key])} terms in a partial expansion")
        states = {k: v for k, v in nxt.items() if v}
        if len(states) > budget:
            raise BudgetExceeded(f"{len(states)} partial column sets")
    return SparsePolynomial(f, variables, states.get((1 << n) - 1, {}))


def symbolic_det(m, f: Field, variables=None, method: str = "auto", budget: int = DEFAULT_BUDGET) -> SparsePolynomial:
    if method == "leibniz":
        return leibniz(m, f, True, variables)
    if method == "cycles":
        return cycle_cover_sum(m, f, True, variables)
    return minor_expansion(m, f, True, variables, budget)


def symbolic_per(m, f: Field, variables=None, method: str = "auto", budget: int = DEFAULT_BUDGET) -> SparsePolynomial:
    if method == "leibniz":
        return leibniz(m, f, False, variables)
    if method == "cycles":
        return cycle_cover_sum(m, f, False, variables)
    return minor_expansion(m, f, False, variables, budget)


# ----------------------------------------------------------------------
# text format


def format_entry(e, f: Field) -> str:
    if isinstance(e, str):
        return e
    if isinstance(e, tuple):
        c, v = e
        if c == f.minus_one:
            return f"-{v}"
        return f"{f.format(c)}*{v}"
    return f.format(e)


def parse_entry(tok: str, f: Field):
    if "*" not in tok and (tok[0].isdigit() or (tok[0] in "+-" and tok[1:2].isdigit())):
        return f.parse_literal(tok)
    m = _SCALED.match(tok)
    if not m:
        raise ValueError(f"bad matrix entry {tok!r}")
    neg, coef, name = m.groups()
    c = f.parse_literal(coef) if coef else f.one
    if neg:
        c = f.neg(c)
    return scale_entry(name, c, f)


def format_matrix(m, f: Field) -> str:
    lines = [f"matrix {len(m)}"]
    for row in m:
        lines.append(" ".join(format_entry(e, f) for e in row))
    return "\n".join(lines) + "\n"


def parse_matrix_lines(lines: list[tuple[int, str]], f: Field):
    """Parse a ``matrix n`` block from (line number, text) pairs; returns the
    matrix and the number of lines consumed."""
    lineno, head = lines[0]
    toks = head.split()
    if len(toks) != 2 or toks[0] != "matrix" or not toks[1].isdigit():
        raise CircuitSyntaxError(lineno, "expected 'matrix <n>'")
    n = int(toks[1])
    if len(lines) < n + 1:
        raise CircuitSyntaxError(lineno, "matrix block is truncated")
    rows = []
    for k in range(1, n + 1):
        ln, text = lines[k]
        toks = text.split()
        if len(toks) != n:
            raise CircuitSyntaxError(ln, f"row needs {n} entries")
        try:
            rows.append([parse_entry(t, f) for t in toks])
        except ValueError as exc:
            raise CircuitSyntaxError(ln, str(exc)) from exc
    return rows, n + 1


def parse_matrix(text: str, f: Field):
    lines = [(i, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [x for x in lines if x[1]]
    if not lines:
        raise CircuitSyntaxError(1, "empty matrix file")
    rows, _ = parse_matrix_lines(lines, f)
    return rows
