"""Determinant side: branching programs as determinant projections,
characteristic polynomials (power traces and Newton identities) and
division-free determinant circuits."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

from .abp import Abp, is_variable, prune, weakly_skew_to_abp
from .circuit import Circuit, CircuitBuilder
from .errors import CharacteristicTooSmall, CircuitSyntaxError, UnknownArtifactKind
from .field import Field, Raw, field_from_spec
from .linalg import identity, mat_mul
from .matrices import (
    format_matrix,
    is_bare,
    is_nonzero,
    parse_matrix_lines,
    scale_entry,
    symbolic_det,
    symbolic_per,
)
from .poly import SparsePolynomial, expand, format_polynomial, parse_polynomial

DET, PER = "det", "per"


@dataclass(frozen=True)
class ProjectionMatrix:
    """Square matrix of constants and variables with a claimed identity
    ``det(M) = target`` or ``per(M) = target``."""

    field: Field
    variables: tuple[str, ...]
    entries: tuple  # tuple of row tuples
    identity: str
    target: SparsePolynomial
    provenance: tuple[str, ...] = dc_field(default=())

    @property
    def side(self) -> int:
        return len(self.entries)

    def off_diagonal_nonzeros(self) -> int:
        return sum(
            1
            for i, row in enumerate(self.entries)
            for j, e in enumerate(row)
            if i != j and is_nonzero(e)
        )

    def diagonal_is_01(self) -> bool:
        return all(
            not is_variable_entry(row[i]) and row[i] in (0, 1)
            for i, row in enumerate(self.entries)
        )

    def scaled_entries(self) -> int:
        return sum(1 for row in self.entries for e in row if not is_bare(e))

    def is_projection(self) -> bool:
        return self.scaled_entries() == 0

    def compute(self, method: str = "auto", budget: int = 10**6) -> SparsePolynomial:
        fn = symbolic_det if self.identity == DET else symbolic_per
        return fn(self.entries, self.field, self.variables, method, budget)

    def target_hash(self) -> str:
        return polynomial_hash(self.target)

    def padded(self, side: int) -> "ProjectionMatrix":
        """Block-diagonal extension by an identity matrix (same det and per)."""
        n = self.side
        if side <= n:
            return self
        f = self.field
        rows = [tuple(row) + (f.zero,) * (side - n) for row in self.entries]
        for i in range(n, side):
            rows.append(tuple(f.one if j == i else f.zero for j in range(side)))
        return ProjectionMatrix(
            f, self.variables, tuple(rows), self.identity, self.target,
            self.provenance + (f"padded with identity to side {side}",),
        )


def is_variable_entry(e) -> bool:
    return isinstance(e, (str, tuple))


def polynomial_hash(p: SparsePolynomial) -> str:
    canon = sorted(
        (tuple(mono), str(c)) for mono, c in p.canonical_items()
    )
    return hashlib.sha256(repr(canon).encode()).hexdigest()


# ----------------------------------------------------------------------
# branching program -> determinant


def simple_abp(a: Abp) -> Abp:
    """Make every ordered node pair carry at most one edge.

    Parallel constant edges are summed into one constant edge; any other
    parallel edge is subdivided by a fresh node.
    """
    f = a.field
    nodes = list(a.nodes)
    const_at: dict = {}
    for u, v, w in a.edges:
        if not is_variable(w):
            const_at[(u, v)] = f.add(const_at.get((u, v), f.zero), w)
    edges = []
    seen = set()
    const_done = set()
    fresh = 0
    for u, v, w in a.edges:
        if not is_variable(w):
            if (u, v) in const_done or const_at[(u, v)] == f.zero and _has_var_edge(a, u, v):
                continue
            const_done.add((u, v))
            w = const_at[(u, v)]
        if (u, v) not in seen:
            seen.add((u, v))
            edges.append((u, v, w))
            continue
        while f"sub{fresh}" in a.nodes:
            fresh += 1
        mid = f"sub{fresh}"
        fresh += 1
        nodes.append(mid)
        edges.append((u, mid, w))
        edges.append((mid, v, f.one))
    return Abp(a.field, a.variables, tuple(nodes), tuple(edges), a.source, a.sink)


def _has_var_edge(a: Abp, u, v) -> bool:
    return any(x == u and y == v and is_variable(w) for x, y, w in a.edges)


def _row_col_signs(n: int, constraints: list[tuple[int, int, int]]) -> list[int]:
    """Signs r_i in {+1,-1} satisfying r_i * r_j = parity for as many
    constraints as possible (union-find with parity; conflicts are skipped)."""
    parent = list(range(n))
    rel = [1] * n  # sign of x times sign of parent[x]

    def find(x):
        sign = 1
        path = []
        while parent[x] != x:
            path.append(x)
            sign *= rel[x]
            x = parent[x]
        root = x
        acc = sign
        for y in path:
            parent[y], rel[y], acc = root, acc, acc * rel[y]
        return root, sign

    for i, j, parity in constraints:
        ri, si = find(i)
        rj, sj = find(j)
        if ri != rj:
            parent[ri] = rj
            rel[ri] = parity * si * sj
    return [find(x)[1] for x in range(n)]


def abp_to_det_projection(a: Abp, check: bool = True) -> ProjectionMatrix:
    """Matrix whose determinant is the path-weight sum of ``a``.

    Source and sink are merged into node 0, every other node gets a loop of
    weight 1 and edge weights are negated; the cycle covers then carry
    ``-f``.  Scaling row i and column i by the same sign r_i (and row 0 and
    column 0 by opposite signs) restores ``+f`` while keeping the diagonal in
    {0, 1}; the signs are chosen so that as many variable entries as possible
    lose their minus sign.
    """
    f = a.field
    g = simple_abp(prune(a))
    inner = [v for v in g.order if v not in (g.source, g.sink)]
    pos = {v: k + 1 for k, v in enumerate(inner)}
    pos[g.source] = pos[g.sink] = 0
    n = len(inner) + 1
    base = [[f.zero] * n for _ in range(n)]
    for k in range(1, n):
        base[k][k] = f.one
    for u, v, w in g.edges:
        i, j = pos[u], pos[v]
        base[i][j] = scale_entry(w, f.minus_one, f)
    provenance = [
        f"branching program: {a.num_nodes} nodes, {a.num_edges} edges",
        f"after pruning and subdivision: {g.num_nodes} nodes, side {n}",
    ]
    target = None
    if check:
        from .abp import abp_expand

        target = abp_expand(a)
        if n <= 12:
            pre = symbolic_det(base, f, a.variables)
            assert pre == -target, "determinant before the sign fix must equal -f"
            provenance.append("checked: determinant before sign fix equals -f")
    # node 0 gets row sign r_0 and column sign -r_0
    constraints = []
    for u, v, w in g.edges:
        if not is_variable(w):
            continue
        i, j = pos[u], pos[v]
        if i == 0 and j == 0:
            continue
        if j == 0:
            constraints.append((i, 0, 1))  # r_i * (-r_0) = -1
        else:
            constraints.append((i, j, -1))
    r = _row_col_signs(n, constraints)
    col = list(r)
    col[0] = -r[0]
    rows = []
    for i in range(n):
        rows.append(tuple(scale_entry(base[i][j], f.mul(_s(r[i], f), _s(col[j], f)), f)
                          if base[i][j] != f.zero or is_variable_entry(base[i][j]) else f.zero
                          for j in range(n)))
    provenance.append("sign fixed by opposite signs on row and column of the merged node")
    if target is None:
        from .abp import abp_expand

        target = abp_expand(a)
    return ProjectionMatrix(f, a.variables, tuple(rows), DET, target, tuple(provenance))


def _s(sign: int, f: Field) -> Raw:
    return f.one if sign > 0 else f.minus_one


def reduce_det(c: Circuit) -> ProjectionMatrix:
    """Weakly-skew circuit -> branching program -> determinant projection,
    padded to side |c| + 1 when smaller."""
    a = weakly_skew_to_abp(c)
    pm = abp_to_det_projection(a)
    target = expand(c)
    pm = ProjectionMatrix(pm.field, c.variables, pm.entries, DET, target.with_variables(c.variables),
                          (f"circuit of size {c.size}",) + pm.provenance)
    return pm.padded(c.size + 1)


def per2_as_det(f: Field, names=("a", "b", "c", "d")) -> ProjectionMatrix:
    """[[a, -b], [c, d]] whose determinant is the 2x2 permanent."""
    a, b, c, d = names
    entries = ((a, scale_entry(b, f.minus_one, f)), (c, d))
    target = symbolic_per(((a, b), (c, d)), f, names)
    return ProjectionMatrix(f, tuple(names), entries, DET, target, ("2x2 sign trick",))


# ----------------------------------------------------------------------
# serialization


def serialize_projection(pm: ProjectionMatrix) -> str:
    lines = [
        f"projection {pm.identity}",
        f"field {pm.field.spec()}",
    ]
    if pm.variables:
        lines.append("var " + " ".join(pm.variables))
    body = format_matrix(pm.entries, pm.field).rstrip("\n")
    lines.append(body)
    lines.append(f"target-sha256 {pm.target_hash()}")
    lines.append("target")
    lines.append(format_polynomial(pm.target.with_variables(pm.variables)
                                   if pm.target.occurring_variables() <= set(pm.variables)
                                   else pm.target))
    lines.append("end")
    for p in pm.provenance:
        lines.append(f"# {p}")
    return "\n".join(lines) + "\n"


def parse_projection(text: str) -> ProjectionMatrix:
    lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1)]
    provenance = tuple(ln[1:].strip() for _, ln in lines if ln.startswith("#"))
    lines = [(i, ln.split("#", 1)[0].strip()) for i, ln in lines]
    lines = [x for x in lines if x[1]]
    if not lines or not lines[0][1].startswith("projection"):
        raise UnknownArtifactKind("not a projection matrix file")
    kind = lines[0][1].split()[1:]
    if kind not in ([DET], [PER]):
        raise UnknownArtifactKind(lines[0][1])
    k = 1
    f = None
    variables: tuple[str, ...] = ()
    entries = None
    digest = None
    target = None
    while k < len(lines):
        ln, text_line = lines[k]
        head = text_line.split()[0]
        if head == "field":
            f = field_from_spec(text_line[5:])
            k += 1
        elif head == "var":
            variables = tuple(text_line.split()[1:])
            k += 1
        elif head == "matrix":
            if f is None:
                raise CircuitSyntaxError(ln, "field must precede the matrix")
            entries, used = parse_matrix_lines(lines[k:], f)
            k += used
        elif head == "target-sha256":
            digest = text_line.split()[1]
            k += 1
        elif head == "target":
            body = []
            k += 1
            while k < len(lines) and lines[k][1] != "end":
                body.append(lines[k][1])
                k += 1
            k += 1
            target = parse_polynomial("\n".join(body), f, None)
        else:
            raise CircuitSyntaxError(ln, f"cannot parse {text_line!r}")
    if f is None or entries is None or target is None:
        raise CircuitSyntaxError(1, "projection file needs field, matrix and target")
    target = target.with_variables(variables) if target.occurring_variables() <= set(variables) else target
    pm = ProjectionMatrix(f, variables, tuple(tuple(r) for r in entries), kind[0], target, provenance)
    if digest is not None and digest != pm.target_hash():
        raise CircuitSyntaxError(1, "target polynomial does not match its recorded hash")
    return pm


# ----------------------------------------------------------------------
# characteristic polynomial from power traces


def _tri_inverse(s: list[list[Raw]], f: Field) -> list[list[Raw]]:
    """Inverse of a lower-triangular matrix by recursive 2x2 blocking."""
    n = len(s)
    if n == 1:
        return [[f.inv(s[0][0])]]
    h = n // 2
    a = [row[:h] for row in s[:h]]
    b = [row[:h] for row in s[h:]]
    c = [row[h:] for row in s[h:]]
    ai = _tri_inverse(a, f)
    ci = _tri_inverse(c, f)
    lower = mat_mul(ci, mat_mul(b, ai, f), f)
    lower = [[f.neg(x) for x in row] for row in lower]
    out = [ai[i] + [f.zero] * (n - h) for i in range(h)]
    out += [lower[i] + ci[i] for i in range(n - h)]
    return out


def csanky_charpoly(a: Sequence[Sequence[Raw]], f: Field) -> list[Raw]:
    """Coefficients c_1..c_n with det(tI - A) = t^n - c_1 t^(n-1) - ... - c_n.

    Power sums s_k = tr(A^k) satisfy a lower-triangular system with k on the
    diagonal, so the characteristic must exceed n.
    """
    n = len(a)
    p = f.characteristic
    if p and p <= n:
        raise CharacteristicTooSmall(f"characteristic {p} must exceed n = {n}")
    a = [[f.coerce(x) for x in row] for row in a]
    s = [f.zero] * (n + 1)
    power = identity(n, f)
    for k in range(1, n + 1):
        power = mat_mul(power, a, f)
        s[k] = f.sum(power[i][i] for i in range(n))
    system = [[f.zero] * n for _ in range(n)]
    for i in range(n):
        system[i][i] = f.coerce(i + 1)
        for j in range(i):
            system[i][j] = s[i - j]
    inv = _tri_inverse(system, f)
    return [f.sum(f.mul(inv[i][j], s[j + 1]) for j in range(n)) for i in range(n)]


def charpoly_at(coeffs: Sequence[Raw], t: Raw, f: Field) -> Raw:
    """t^n - c_1 t^(n-1) - ... - c_n."""
    n = len(coeffs)
    val = f.pow(t, n)
    for i, c in enumerate(coeffs, 1):
        val = f.sub(val, f.mul(c, f.pow(t, n - i)))
    return val


# ----------------------------------------------------------------------
# division-free determinant circuits


ONE = object()


class _Values:
    """Helpers over values that are None (zero), ONE or a gate id."""

    def __init__(self, b: CircuitBuilder):
        self.b = b

    def times_input(self, v, make_input: Callable[[], str]):
        if v is None:
            return None
        if v is ONE:
            return make_input()
        return self.b.mul(v, make_input())

    def neg(self, v):
        if v is None:
            return None
        if v is ONE:
            return self.b.const(-1)
        return self.b.mul(self.b.const(-1), v)

    def add(self, u, v):
        if u is None:
            return v
        if v is None:
            return u
        if u is ONE:
            u = self.b.const(1)
        if v is ONE:
            v = self.b.const(1)
        return self.b.add(u, v)

    def materialize(self, v) -> str:
        if v is None:
            return self.b.const(0)
        if v is ONE:
            return self.b.const(1)
        return v


def matrix_var(i: int, j: int, prefix: str = "x") -> str:
    return f"{prefix}{i + 1}_{j + 1}"


def berkowitz_gates(b: CircuitBuilder, n: int, entry: Callable[[int, int], str]) -> str:
    """Gates computing det of the n x n matrix whose (i, j) entry is a fresh
    gate ``entry(i, j)`` at every use.

    Processes trailing principal submatrices: with A = [[a, R], [C, M]] the
    row vector r (against the characteristic-polynomial coefficients of A)
    becomes r' with r'_j = r_j - a r_{j+1} - U_j C, where
    U_j = r_{j+2} R + U_{j+1} M.  Each product multiplies by an entry gate,
    so the circuit is skew in the entries.
    """
    vals = _Values(b)
    r = [None] * n + [ONE]
    for k in range(n):
        d = n - k
        u_next = None  # U_{j+1}, vector of length d - 1 (None means zero vector)
        new_r = [None] * d
        for j in range(d - 1, -1, -1):
            if j + 2 <= d:
                u = []
                for col in range(d - 1):
                    acc = vals.times_input(r[j + 2], lambda col=col: entry(k, k + 1 + col))
                    if u_next is not None:
                        for row in range(d - 1):
                            acc = vals.add(
                                acc,
                                vals.times_input(u_next[row], lambda row=row, col=col: entry(k + 1 + row, k + 1 + col)),
                            )
                    u.append(acc)
                w = None
                for row in range(d - 1):
                    w = vals.add(w, vals.times_input(u[row], lambda row=row: entry(k + 1 + row, k)))
                u_next = u
            else:
                w = None
            term = vals.neg(vals.times_input(r[j + 1], lambda: entry(k, k)))
            new_r[j] = vals.add(vals.add(r[j], term), vals.neg(w))
        r = new_r
    out = r[0]
    if n % 2:
        out = vals.neg(out)
    return vals.materialize(out)


def berkowitz_det_circuit(n: int, field: Field, prefix: str = "x") -> Circuit:
    """Constant-free weakly-skew circuit for the n x n determinant in
    variables x{i}_{j}."""
    names = [matrix_var(i, j, prefix) for i in range(n) for j in range(n)]
    b = CircuitBuilder(field, names)
    if n == 1:
        return b.build(b.input(names[0]))
    out = berkowitz_gates(b, n, lambda i, j: b.input(matrix_var(i, j, prefix)))
    return b.build(out).restrict(out)
