"""Identity testing: randomized evaluation, grid tests, variable-free integer
circuits by Chinese remaindering, and symbolic determinant pencils."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Mapping

from .abp import Abp, weakly_skew_to_abp
from .circuit import Circuit, classify, formal_degrees, is_constant_free
from .det_embed import abp_to_det_projection
from .errors import (
    DegreeBoundTooSmall,
    FieldTooSmall,
    NotConstantFree,
    NotMultDisjoint,
    TooManyVariables,
)
from .field import Field, Raw, is_prime, prime_field
from .linalg import det_bareiss
from .matrices import entry_coef, entry_var
from .rng import SplitMix64

ZERO, NONZERO = "Zero", "NonZero"
TARGET_ERROR = Fraction(1, 1 << 40)


@dataclass(frozen=True)
class PitVerdict:
    verdict: str
    error_bound: Fraction  # 0 for deterministic answers
    witness: dict | None = None
    trials: int = 0
    sample_size: int = 0
    degree: int = 0
    method: str = "random"

    @property
    def is_zero(self) -> bool:
        return self.verdict == ZERO

    def to_text(self, field: Field | None = None) -> str:
        rows = [
            ("verdict", self.verdict),
            ("method", self.method),
            ("degree_bound", self.degree),
            ("trials", self.trials),
            ("sample_size", self.sample_size),
            ("error_bound", str(self.error_bound)),
        ]
        if self.witness is not None:
            fmt = field.format if field is not None else str
            rows.append(("witness", " ".join(f"{k}={fmt(v)}" for k, v in sorted(self.witness.items()))))
        return "".join(f"{k}: {v}\n" for k, v in rows)


def _sample_set(f: Field, d: int) -> int:
    """Size of the sample set {0, ..., size-1}: all of F_p, or 2d+1 integers over Q."""
    if f.characteristic:
        if f.characteristic <= d:
            raise FieldTooSmall(f"F_{f.characteristic} has at most {d} points; need more than the degree {d}")
        return f.characteristic
    return 2 * d + 1


def trials_for(d: int, size: int, target: Fraction = TARGET_ERROR) -> int:
    """Fewest trials k with (d/size)^k <= target."""
    if d == 0:
        return 1
    k = 1
    ratio = Fraction(d, size)
    bound = ratio
    while bound > target:
        bound *= ratio
        k += 1
    return k


def _output_degree(c: Circuit) -> int:
    return formal_degrees(c)[c.index[c.outputs[0]]]


def pit_random(c1: Circuit, c2: Circuit, trials: int | None = None, seed: int = 0) -> PitVerdict:
    """Decide whether the first outputs of two circuits agree as polynomials
    by evaluation at random points of a sample set larger than the degree.

    ``trials=None`` picks enough trials for an error bound of 2^-40.
    """
    f = c1.field
    if c2.field != f:
        from .errors import FieldMismatch

        raise FieldMismatch("circuits are over different fields")
    variables = sorted(set(c1.variables) | set(c2.variables))
    d = max(_output_degree(c1), _output_degree(c2))
    size = _sample_set(f, d)
    k = trials_for(d, size) if trials is None else trials
    if k < 1:
        raise ValueError("trials must be at least 1")
    rng = SplitMix64(seed)
    for _ in range(k):
        point = {v: f.coerce(rng.below(size)) for v in variables}
        a = c1.eval_raw(point)[0]
        b = c2.eval_raw(point)[0]
        if a != b:
            # re-evaluate so a NonZero verdict is never based on a glitch
            assert c1.eval_raw(point)[0] != c2.eval_raw(point)[0]
            return PitVerdict(NONZERO, Fraction(0), point, k, size, d)
    return PitVerdict(ZERO, Fraction(d, size) ** k, None, k, size, d)


def pit_zero(c: Circuit, trials: int | None = None, seed: int = 0) -> PitVerdict:
    """Random zero test of the first output of one circuit."""
    from .circuit import CircuitBuilder

    zero = CircuitBuilder(c.field, c.variables, prefix="z")
    return pit_random(c, zero.build(zero.const(0)), trials, seed)


def grid_zero_test(c: Circuit, degree_bound: int) -> PitVerdict:
    """Deterministic zero test on the box {0..D}^k, k <= 4 variables.

    A nonzero polynomial of degree at most D in each variable does not
    vanish on the whole box, so D must bound the formal degree.
    """
    f = c.field
    k = len(c.variables)
    if k > 4:
        raise TooManyVariables(f"grid test supports at most 4 variables, got {k}")
    D = degree_bound
    if f.characteristic and f.characteristic <= D:
        raise FieldTooSmall(f"F_{f.characteristic} has fewer than D + 1 = {D + 1} points")
    deg = _output_degree(c)
    if deg > D:
        raise DegreeBoundTooSmall(f"formal degree {deg} exceeds D = {D}")
    import itertools

    for values in itertools.product(range(D + 1), repeat=k):
        point = {v: f.coerce(x) for v, x in zip(c.variables, values)}
        if c.eval_raw(point)[0] != f.zero:
            return PitVerdict(NONZERO, Fraction(0), point, 0, D + 1, D, "grid")
    return PitVerdict(ZERO, Fraction(0), None, (D + 1) ** k, D + 1, D, "grid")


# ----------------------------------------------------------------------
# variable-free integer circuits


def crt_primes(bits: int, start: int = (1 << 31) - 1) -> list[int]:
    """Distinct primes below ``start`` whose product exceeds 2^bits."""
    primes = []
    acc = 1
    q = start
    while acc.bit_length() <= bits:
        if is_prime(q):
            primes.append(q)
            acc *= q
        q -= 1
    return primes


@dataclass(frozen=True)
class EquSlpResult:
    verdict: str
    bound_bits: int
    primes: tuple[int, ...]
    residues: tuple[int, ...]


def equ_slp(c: Circuit) -> EquSlpResult:
    """Decide whether a variable-free, constant-free, multiplicatively
    disjoint circuit computes 0.

    Its value has absolute value below 2^(size + deg + 1), so vanishing
    modulo primes with a larger product forces the integer to be 0.
    """
    if c.variables and any(g.is_input for g in c.gates):
        raise TooManyVariables("equ_slp takes circuits without input variables")
    if not is_constant_free(c):
        raise NotConstantFree("constants must lie in {-1, 0, 1}")
    if not classify(c).is_mult_disjoint:
        raise NotMultDisjoint("the magnitude bound needs a multiplicatively disjoint circuit")
    out = c.outputs[0]
    bits = c.subcircuit_size(out) + _output_degree(c) + 1
    primes = crt_primes(bits)
    residues = []
    for q in primes:
        cq = Circuit(prime_field(q), c.variables, tuple(_reduce_gate(g, q) for g in c.gates), c.outputs)
        residues.append(cq.eval_raw({})[0])
    verdict = ZERO if all(r == 0 for r in residues) else NONZERO
    return EquSlpResult(verdict, bits, tuple(primes), tuple(residues))


def _reduce_gate(g, q: int):
    from .circuit import CONST, Gate

    if g.op == CONST:
        return Gate(g.gid, CONST, (g.value % q,))
    return g


# ----------------------------------------------------------------------
# symbolic determinant identity testing


@dataclass(frozen=True)
class SditInstance:
    """Pencil sum_i x_i A_i of square matrices over one field."""

    field: Field
    variables: tuple[str, ...]
    matrices: tuple  # one n x n tuple-of-tuples per variable
    relation: str = ""
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if len(self.variables) != len(self.matrices):
            raise ValueError("one matrix per variable")
        sides = {len(m) for m in self.matrices}
        if len(sides) > 1 or any(len(row) != len(m) for m in self.matrices for row in m):
            raise ValueError("matrices must be square of one side")

    @property
    def side(self) -> int:
        return len(self.matrices[0]) if self.matrices else 0

    def at(self, point: Mapping[str, Raw]) -> list[list[Raw]]:
        f = self.field
        n = self.side
        out = [[f.zero] * n for _ in range(n)]
        for v, m in zip(self.variables, self.matrices):
            x = point[v]
            if x == f.zero:
                continue
            for i in range(n):
                for j in range(n):
                    if m[i][j]:
                        out[i][j] = f.add(out[i][j], f.mul(x, m[i][j]))
        return out


def sdit_build(obj: Abp | Circuit, aux: str = "t") -> SditInstance:
    """Pencil whose determinant is t^n f(x/t) for the polynomial f of a
    branching program or weakly-skew circuit (n the matrix side).

    The determinant projection has entries c or c*x; its constant part is
    moved onto the auxiliary variable t, which makes the pencil homogeneous
    without changing whether f is zero.
    """
    a = obj if isinstance(obj, Abp) else weakly_skew_to_abp(obj)
    pm = abp_to_det_projection(a, check=False)
    f = a.field
    n = pm.side
    while aux in a.variables:
        aux += "_"
    names = (aux,) + tuple(a.variables)
    mats = {v: [[f.zero] * n for _ in range(n)] for v in names}
    for i, row in enumerate(pm.entries):
        for j, e in enumerate(row):
            v = entry_var(e)
            if v is None:
                mats[aux][i][j] = e
            else:
                mats[v][i][j] = f.add(mats[v][i][j], entry_coef(e, f))
    matrices = tuple(tuple(tuple(r) for r in mats[v]) for v in names)
    relation = f"det(pencil) = {aux}^{n} * f(x/{aux})"
    return SditInstance(f, names, matrices, relation, {"side": n, "aux": aux})


def sdit_decide(inst: SditInstance, trials: int | None = None, seed: int = 0) -> PitVerdict:
    """Random evaluation of det(sum x_i A_i); the determinant has degree n."""
    f = inst.field
    n = inst.side
    size = _sample_set(f, n)
    k = trials_for(n, size) if trials is None else trials
    rng = SplitMix64(seed)
    for _ in range(k):
        point = {v: f.coerce(rng.below(size)) for v in inst.variables}
        if det_bareiss(inst.at(point), f) != f.zero:
            return PitVerdict(NONZERO, Fraction(0), point, k, size, n, "pencil")
    return PitVerdict(ZERO, Fraction(n, size) ** k if n else Fraction(0), None, k, size, n, "pencil")


def serialize_sdit(inst: SditInstance) -> str:
    f = inst.field
    lines = ["sdit", f"field {f.spec()}", f"side {inst.side}"]
    for v, m in zip(inst.variables, inst.matrices):
        lines.append(f"coefficient {v}")
        lines.extend(" ".join(f.format(x) for x in row) for row in m)
    if inst.relation:
        lines.append(f"# {inst.relation}")
    return "\n".join(lines) + "\n"


def parse_sdit(text: str) -> SditInstance:
    from .errors import CircuitSyntaxError
    from .field import field_from_spec

    lines = [(i, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [x for x in lines if x[1]]
    if not lines or lines[0][1] != "sdit":
        raise CircuitSyntaxError(1, "expected 'sdit'")
    f = None
    n = None
    names: list[str] = []
    mats = []
    k = 1
    while k < len(lines):
        ln, text_line = lines[k]
        toks = text_line.split()
        if toks[0] == "field":
            f = field_from_spec(" ".join(toks[1:]))
            k += 1
        elif toks[0] == "side":
            n = int(toks[1])
            k += 1
        elif toks[0] == "coefficient":
            if f is None or n is None:
                raise CircuitSyntaxError(ln, "field and side must come first")
            names.append(toks[1])
            rows = []
            for r in range(n):
                if k + 1 + r >= len(lines):
                    raise CircuitSyntaxError(ln, "truncated matrix")
                vals = lines[k + 1 + r][1].split()
                if len(vals) != n:
                    raise CircuitSyntaxError(lines[k + 1 + r][0], f"row needs {n} entries")
                rows.append(tuple(f.parse_literal(x) for x in vals))
            mats.append(tuple(rows))
            k += n + 1
        else:
            raise CircuitSyntaxError(ln, f"cannot parse {text_line!r}")
    if f is None:
        raise CircuitSyntaxError(1, "missing field")
    return SditInstance(f, tuple(names), tuple(mats))
