"""Arithmetic circuits: gates, validation, text format, metrics and structure.

Gates are stored in topological order.  Add and Mul gates have fan-in two and
refer to their children by gate id.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import (
    CircuitSyntaxError,
    CycleDetected,
    DuplicateGateId,
    FieldLiteralInvalid,
    MissingAssignment,
    UnknownGateRef,
    UnknownVariable,
)
from .field import Field, Raw, field_from_spec

INPUT, CONST, ADD, MUL = "input", "const", "add", "mul"
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Gate:
    gid: str
    op: str
    args: tuple

    @property
    def is_input(self) -> bool:
        return self.op in (INPUT, CONST)

    @property
    def var(self) -> str:
        return self.args[0]

    @property
    def value(self) -> Raw:
        return self.args[0]

    @property
    def left(self) -> str:
        return self.args[0]

    @property
    def right(self) -> str:
        return self.args[1]


@dataclass(frozen=True)
class Circuit:
    field: Field
    variables: tuple[str, ...]
    gates: tuple[Gate, ...]
    outputs: tuple[str, ...]

    def __post_init__(self):
        seen: dict[str, int] = {}
        varset = set(self.variables)
        if len(varset) != len(self.variables):
            raise ValueError("duplicate variable names")
        for i, g in enumerate(self.gates):
            if g.gid in seen:
                raise DuplicateGateId(g.gid)
            if g.op == INPUT:
                if g.var not in varset:
                    raise UnknownVariable(g.var)
            elif g.op in (ADD, MUL):
                for a in g.args:
                    if a not in seen:
                        raise UnknownGateRef(f"{g.gid} refers to {a}")
            elif g.op != CONST:
                raise ValueError(f"unknown gate kind {g.op}")
            seen[g.gid] = i
        if not self.outputs:
            raise ValueError("a circuit needs at least one output")
        for o in self.outputs:
            if o not in seen:
                raise UnknownGateRef(f"output {o}")

    # -- indexing --------------------------------------------------------
    @cached_property
    def index(self) -> dict[str, int]:
        return {g.gid: i for i, g in enumerate(self.gates)}

    @cached_property
    def child_indices(self) -> tuple[tuple[int, ...], ...]:
        idx = self.index
        return tuple(
            (idx[g.args[0]], idx[g.args[1]]) if g.op in (ADD, MUL) else ()
            for g in self.gates
        )

    @cached_property
    def consumers(self) -> tuple[tuple[int, ...], ...]:
        """For each gate, the gates using it (with multiplicity)."""
        out: list[list[int]] = [[] for _ in self.gates]
        for i, ch in enumerate(self.child_indices):
            for c in ch:
                out[c].append(i)
        return tuple(tuple(x) for x in out)

    @cached_property
    def cone_masks(self) -> tuple[int, ...]:
        """Bitset of the subcircuit rooted at each gate (including itself)."""
        masks: list[int] = []
        for i, ch in enumerate(self.child_indices):
            m = 1 << i
            for c in ch:
                m |= masks[c]
            masks.append(m)
        return tuple(masks)

    def gate(self, gid: str) -> Gate:
        return self.gates[self.index[gid]]

    @property
    def output(self) -> str:
        return self.outputs[0]

    @property
    def size(self) -> int:
        return sum(1 for g in self.gates if g.op in (ADD, MUL))

    def subcircuit_size(self, gid: str) -> int:
        mask = self.cone_masks[self.index[gid]]
        return sum(
            1 for i, g in enumerate(self.gates) if (mask >> i) & 1 and g.op in (ADD, MUL)
        )

    def with_outputs(self, outputs: Sequence[str]) -> "Circuit":
        return Circuit(self.field, self.variables, self.gates, tuple(outputs))

    def restrict(self, gid: str | None = None) -> "Circuit":
        """Keep only the subcircuit of one gate and make it the single output."""
        gid = self.outputs[0] if gid is None else gid
        mask = self.cone_masks[self.index[gid]]
        gates = tuple(g for i, g in enumerate(self.gates) if (mask >> i) & 1)
        return Circuit(self.field, self.variables, gates, (gid,))

    # -- evaluation ------------------------------------------------------
    def eval_gates(self, point: Mapping[str, Raw]) -> list[Raw]:
        """Raw values of every gate at a point given as raw field values."""
        f = self.field
        vals: list[Raw] = []
        ch = self.child_indices
        add, mul = f.add, f.mul
        for i, g in enumerate(self.gates):
            op = g.op
            if op == ADD:
                a, b = ch[i]
                vals.append(add(vals[a], vals[b]))
            elif op == MUL:
                a, b = ch[i]
                vals.append(mul(vals[a], vals[b]))
            elif op == CONST:
                vals.append(g.value)
            else:
                try:
                    vals.append(point[g.var])
                except KeyError:
                    raise MissingAssignment(g.var) from None
        return vals

    def eval_raw(self, point: Mapping[str, Raw]) -> list[Raw]:
        vals = self.eval_gates(point)
        idx = self.index
        return [vals[idx[o]] for o in self.outputs]


class CircuitBuilder:
    """Incremental construction with automatic gate ids.

    ``input`` creates a fresh gate on every call, so circuits built without
    explicit reuse are formulas.
    """

    def __init__(self, field: Field, variables: Iterable[str] = (), prefix: str = "g"):
        self.field = field
        self.variables: list[str] = list(variables)
        self._varset = set(self.variables)
        self.gates: list[Gate] = []
        self._ids: set[str] = set()
        self._prefix = prefix
        self._counter = 0

    def _fresh(self) -> str:
        while True:
            self._counter += 1
            gid = f"{self._prefix}{self._counter}"
            if gid not in self._ids:
                return gid

    def _push(self, op: str, args: tuple, gid: str | None) -> str:
        gid = self._fresh() if gid is None else gid
        if gid in self._ids:
            raise DuplicateGateId(gid)
        self._ids.add(gid)
        self.gates.append(Gate(gid, op, args))
        return gid

    def declare(self, *names: str) -> None:
        for n in names:
            if n not in self._varset:
                self._varset.add(n)
                self.variables.append(n)

    def input(self, var: str, gid: str | None = None) -> str:
        self.declare(var)
        return self._push(INPUT, (var,), gid)

    def const(self, value, gid: str | None = None) -> str:
        return self._push(CONST, (self.field.coerce(value),), gid)

    def add(self, a: str, b: str, gid: str | None = None) -> str:
        return self._push(ADD, (a, b), gid)

    def mul(self, a: str, b: str, gid: str | None = None) -> str:
        return self._push(MUL, (a, b), gid)

    def neg(self, a: str) -> str:
        return self.mul(self.const(-1), a)

    def sum(self, items: Sequence[str]) -> str:
        """Balanced binary sum; an empty sum is the constant 0."""
        return self._balanced(list(items), self.add, 0)

    def product(self, items: Sequence[str]) -> str:
        return self._balanced(list(items), self.mul, 1)

    def _balanced(self, items: list[str], op, empty) -> str:
        if not items:
            return self.const(empty)
        while len(items) > 1:
            nxt = [op(items[i], items[i + 1]) for i in range(0, len(items) - 1, 2)]
            if len(items) % 2:
                nxt.append(items[-1])
            items = nxt
        return items[0]

    def build(self, outputs: Sequence[str] | str) -> Circuit:
        if isinstance(outputs, str):
            outputs = (outputs,)
        return Circuit(self.field, tuple(self.variables), tuple(self.gates), tuple(outputs))


# ----------------------------------------------------------------------
# text format


def parse_circuit(text: str) -> Circuit:
    field: Field | None = None
    variables: list[str] = []
    defs: list[tuple[int, str, str, list[str]]] = []
    outputs: list[str] = []
    seen_lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0]
        if head == "field":
            if field is not None or defs:
                raise CircuitSyntaxError(lineno, "field must be declared once, first")
            try:
                field = field_from_spec(" ".join(toks[1:]))
            except FieldLiteralInvalid as exc:
                raise CircuitSyntaxError(lineno, str(exc)) from exc
        elif head == "var":
            if len(toks) < 2:
                raise CircuitSyntaxError(lineno, "var needs at least one name")
            for name in toks[1:]:
                if not _IDENT.match(name):
                    raise CircuitSyntaxError(lineno, f"bad variable name {name!r}")
                if name in variables:
                    raise CircuitSyntaxError(lineno, f"variable {name} declared twice")
                variables.append(name)
        elif head == "output":
            if len(toks) < 2:
                raise CircuitSyntaxError(lineno, "output needs at least one gate")
            outputs.extend(toks[1:])
        elif len(toks) >= 3 and toks[1] == "=":
            gid, kind, args = toks[0], toks[2], toks[3:]
            if not _IDENT.match(gid):
                raise CircuitSyntaxError(lineno, f"bad gate id {gid!r}")
            want = {INPUT: 1, CONST: 1, ADD: 2, MUL: 2}.get(kind)
            if want is None:
                raise CircuitSyntaxError(lineno, f"unknown gate kind {kind!r}")
            if len(args) != want:
                raise CircuitSyntaxError(lineno, f"{kind} takes {want} argument(s)")
            if gid in seen_lines:
                raise DuplicateGateId(f"{gid} (lines {seen_lines[gid]} and {lineno})")
            seen_lines[gid] = lineno
            defs.append((lineno, gid, kind, args))
        else:
            raise CircuitSyntaxError(lineno, f"cannot parse {line!r}")
    if field is None:
        raise CircuitSyntaxError(1, "missing field declaration")
    if not outputs:
        raise CircuitSyntaxError(len(text.splitlines()), "missing output line")

    order = {gid: k for k, (_, gid, _, _) in enumerate(defs)}
    edges = {gid: args for _, gid, kind, args in defs if kind in (ADD, MUL)}
    for k, (lineno, gid, kind, args) in enumerate(defs):
        if kind not in (ADD, MUL):
            continue
        for a in args:
            if a not in order:
                raise UnknownGateRef(f"line {lineno}: {gid} refers to undefined {a}")
            if order[a] >= k:
                if _reaches(edges, a, gid):
                    raise CycleDetected(f"line {lineno}: {gid} depends on itself")
                raise CircuitSyntaxError(lineno, f"forward reference to {a}")
    for o in outputs:
        if o not in order:
            raise UnknownGateRef(f"output refers to undefined {o}")

    gates: list[Gate] = []
    varset = set(variables)
    for lineno, gid, kind, args in defs:
        if kind == INPUT:
            if args[0] not in varset:
                raise CircuitSyntaxError(lineno, f"undeclared variable {args[0]!r}")
            gates.append(Gate(gid, INPUT, (args[0],)))
        elif kind == CONST:
            gates.append(Gate(gid, CONST, (field.parse_literal(args[0]),)))
        else:
            gates.append(Gate(gid, kind, tuple(args)))
    return Circuit(field, tuple(variables), tuple(gates), tuple(outputs))


def _reaches(edges: dict[str, list[str]], start: str, target: str) -> bool:
    stack, seen = [start], set()
    while stack:
        g = stack.pop()
        if g == target:
            return True
        if g in seen:
            continue
        seen.add(g)
        stack.extend(edges.get(g, ()))
    return False


def serialize_circuit(c: Circuit) -> str:
    lines = [f"field {c.field.spec()}"]
    if c.variables:
        lines.append("var " + " ".join(c.variables))
    for g in c.gates:
        if g.op == INPUT:
            lines.append(f"{g.gid} = input {g.var}")
        elif g.op == CONST:
            lines.append(f"{g.gid} = const {c.field.format(g.value)}")
        else:
            lines.append(f"{g.gid} = {g.op} {g.left} {g.right}")
    lines.append("output " + " ".join(c.outputs))
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class CircuitMetrics:
    size: int
    depth: int
    degree: int
    gate_depth: dict = dc_field(repr=False)
    gate_degree: dict = dc_field(repr=False)
    constant_free_size: int | None = None


def formal_degrees(c: Circuit) -> list[int]:
    degs: list[int] = []
    ch = c.child_indices
    for i, g in enumerate(c.gates):
        if g.op == INPUT:
            degs.append(1)
        elif g.op == CONST:
            degs.append(0)
        elif g.op == ADD:
            a, b = ch[i]
            degs.append(max(degs[a], degs[b]))
        else:
            a, b = ch[i]
            degs.append(degs[a] + degs[b])
    return degs


def gate_depths(c: Circuit) -> list[int]:
    depths: list[int] = []
    for i, ch in enumerate(c.child_indices):
        depths.append(1 + max(depths[a] for a in ch) if ch else 0)
    return depths


def is_constant_free(c: Circuit) -> bool:
    ok = {0, 1, c.field.minus_one}
    return all(g.value in ok for g in c.gates if g.op == CONST)


def metrics(c: Circuit) -> CircuitMetrics:
    degs = formal_degrees(c)
    depths = gate_depths(c)
    idx = c.index
    out_idx = [idx[o] for o in c.outputs]
    size = c.size
    return CircuitMetrics(
        size=size,
        depth=max(depths[i] for i in out_idx),
        degree=max(degs[i] for i in out_idx),
        gate_depth={g.gid: d for g, d in zip(c.gates, depths)},
        gate_degree={g.gid: d for g, d in zip(c.gates, degs)},
        constant_free_size=size if is_constant_free(c) else None,
    )


# ----------------------------------------------------------------------
# structural classification


@dataclass(frozen=True)
class StructureFlags:
    is_formula: bool
    is_skew: bool
    is_weakly_skew: bool
    is_mult_disjoint: bool
    is_constant_free: bool
    distinguished: dict = dc_field(repr=False)  # mul gate id -> private child id
    failures: dict = dc_field(repr=False)  # mul gate id -> reason


def _private_child(c: Circuit, v: int, w: int) -> str | None:
    """None if the subcircuit of w meets the rest only through the edge (w, v);
    otherwise a reason naming an offending gate."""
    mask = c.cone_masks[w]
    consumers = c.consumers
    gates = c.gates
    if Counter(consumers[w]) != Counter([v]):
        return f"{gates[w].gid} feeds gates other than {gates[v].gid}"
    m = mask & ~(1 << w)
    while m:
        low = m & -m
        u = low.bit_length() - 1
        m ^= low
        for x in consumers[u]:
            if not (mask >> x) & 1:
                return f"{gates[u].gid} has an edge to {gates[x].gid} outside the subcircuit"
    return None


def classify(c: Circuit) -> StructureFlags:
    consumers = c.consumers
    ch = c.child_indices
    masks = c.cone_masks
    gates = c.gates
    is_formula = all(len(x) <= 1 for x in consumers)
    is_skew = True
    is_md = True
    distinguished: dict[str, str] = {}
    failures: dict[str, str] = {}
    for i, g in enumerate(gates):
        if g.op != MUL:
            continue
        a, b = ch[i]
        if not (gates[a].is_input or gates[b].is_input):
            is_skew = False
        if a == b or masks[a] & masks[b]:
            is_md = False
        reasons = []
        for w in (b, a) if gates[b].is_input and not gates[a].is_input else (a, b):
            r = _private_child(c, i, w)
            if r is None:
                distinguished[g.gid] = gates[w].gid
                break
            reasons.append(r)
        else:
            failures[g.gid] = "; ".join(reasons)
    flags = StructureFlags(
        is_formula=is_formula,
        is_skew=is_skew,
        is_weakly_skew=not failures,
        is_mult_disjoint=is_md,
        is_constant_free=is_constant_free(c),
        distinguished=distinguished,
        failures=failures,
    )
    assert not flags.is_formula or flags.is_weakly_skew
    assert not flags.is_weakly_skew or flags.is_mult_disjoint
    return flags


# ----------------------------------------------------------------------
# small structural rewrites


def unshare_inputs(c: Circuit) -> Circuit:
    """Give every use of an input gate its own copy.

    Input gates are free in the size measure, so this never changes |c| but
    turns e.g. skew circuits with reused variables into weakly-skew ones.
    """
    consumers = c.consumers
    b = _Renamer(c)
    new_gates: list[Gate] = []
    rename: dict[str, list[str]] = {}
    out_uses = Counter(c.outputs)
    for i, g in enumerate(c.gates):
        uses = len(consumers[i]) + out_uses[g.gid]
        if g.is_input and uses > 1:
            copies = [b.fresh(g.gid) for _ in range(uses)]
            rename[g.gid] = copies[::-1]
            new_gates.extend(Gate(n, g.op, g.args) for n in copies)
        elif g.op in (ADD, MUL):
            args = tuple(rename[a].pop() if a in rename else a for a in g.args)
            new_gates.append(Gate(g.gid, g.op, args))
        else:
            new_gates.append(g)
    outs = tuple(rename[o].pop() if o in rename else o for o in c.outputs)
    return Circuit(c.field, c.variables, tuple(new_gates), outs)


class _Renamer:
    def __init__(self, c: Circuit):
        self.used = {g.gid for g in c.gates}
        self.n = 0

    def fresh(self, base: str) -> str:
        while True:
            self.n += 1
            gid = f"{base}_{self.n}"
            if gid not in self.used:
                self.used.add(gid)
                return gid


def canonical_text(c: Circuit) -> str:
    """Serialization with gates renumbered g1, g2, ... in file order."""
    ren = {g.gid: f"g{i}" for i, g in enumerate(c.gates, 1)}
    gates = tuple(
        Gate(ren[g.gid], g.op, tuple(ren[a] for a in g.args) if g.op in (ADD, MUL) else g.args)
        for g in c.gates
    )
    return serialize_circuit(
        Circuit(c.field, c.variables, gates, tuple(ren[o] for o in c.outputs))
    )
