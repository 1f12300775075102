"""Arithmetic circuits, branching programs and determinant/permanent reductions
with exact arithmetic and brute-force oracles."""

from .field import QQ, Field, FieldElement, prime_field
from .circuit import (
    Circuit,
    CircuitBuilder,
    Gate,
    classify,
    metrics,
    parse_circuit,
    serialize_circuit,
)
from .poly import SparsePolynomial, evaluate, expand, poly_equal

__all__ = [
    "QQ",
    "Field",
    "FieldElement",
    "prime_field",
    "Circuit",
    "CircuitBuilder",
    "Gate",
    "classify",
    "metrics",
    "parse_circuit",
    "serialize_circuit",
    "SparsePolynomial",
    "evaluate",
    "expand",
    "poly_equal",
]
