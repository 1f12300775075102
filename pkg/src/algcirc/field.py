"""Exact arithmetic over the rationals and prime fields.

A :class:`Field` works on *raw* values so that hot loops (polynomial products,
permanents) avoid wrapper objects:

* over Q a raw value is an ``int`` or a :class:`fractions.Fraction` whose
  denominator is not 1 (integers are demoted to ``int``);
* over F_p a raw value is an ``int`` in ``[0, p)``.

:class:`FieldElement` wraps a raw value together with its field for callers
that prefer operator syntax.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import (
    CharacteristicTwo,
    DivisionByZero,
    FieldLiteralInvalid,
    FieldMismatch,
    NotPrime,
    RationalOverPrimeField,
)

Raw = Union[int, Fraction]

MAX_MODULUS = 2**61
_TRIAL_DIVISION_LIMIT = 2**32
_LITERAL = re.compile(r"^([+-]?)(\d+)(?:/(\d+))?$")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0 or n % 3 == 0:
        return False
    if n >= _TRIAL_DIVISION_LIMIT:
        # trial division up to 2^30.5 is too slow in pure Python
        from sympy import isprime

        return bool(isprime(n))
    i = 5
    r = math.isqrt(n)
    while i <= r:
        if n % i == 0 or n % (i + 2) == 0:
            return False
        i += 6
    return True


@dataclass(frozen=True)
class Field:
    """Q when ``modulus`` is None, otherwise F_p with p = ``modulus``."""

    modulus: int | None = None

    def __post_init__(self):
        p = self.modulus
        if p is None:
            return
        if not isinstance(p, int) or p < 2 or p > MAX_MODULUS or not is_prime(p):
            raise NotPrime(p)

    # -- descriptive ---------------------------------------------------
    @property
    def characteristic(self) -> int:
        return 0 if self.modulus is None else self.modulus

    @property
    def is_rational(self) -> bool:
        return self.modulus is None

    @property
    def size(self) -> int | None:
        """Number of elements, or None for Q."""
        return self.modulus

    def spec(self) -> str:
        return "Q" if self.modulus is None else f"Fp {self.modulus}"

    def cli_spec(self) -> str:
        return "Q" if self.modulus is None else f"Fp:{self.modulus}"

    def __repr__(self) -> str:
        return "Field(Q)" if self.modulus is None else f"Field(F_{self.modulus})"

    # -- constants -----------------------------------------------------
    @property
    def zero(self) -> Raw:
        return 0

    @property
    def one(self) -> Raw:
        return 1

    @property
    def minus_one(self) -> Raw:
        return -1 if self.modulus is None else self.modulus - 1

    def half(self) -> Raw:
        if self.modulus == 2:
            raise CharacteristicTwo("1/2 does not exist in characteristic 2")
        return self.div(1, 2)

    # -- construction --------------------------------------------------
    def coerce(self, value) -> Raw:
        """Map an int, Fraction or FieldElement into a canonical raw value."""
        if isinstance(value, FieldElement):
            if value.field != self:
                raise FieldMismatch(f"{value.field} vs {self}")
            return value.value
        if isinstance(value, bool):
            value = int(value)
        p = self.modulus
        if isinstance(value, int):
            return value if p is None else value % p
        if isinstance(value, Fraction):
            if p is None:
                return value.numerator if value.denominator == 1 else value
            den = value.denominator % p
            if den == 0:
                raise RationalOverPrimeField(f"denominator of {value} vanishes mod {p}")
            return value.numerator * pow(den, -1, p) % p
        raise TypeError(f"cannot coerce {value!r} into {self}")

    def element(self, value) -> "FieldElement":
        return FieldElement(self, self.coerce(value))

    def parse_literal(self, text: str) -> Raw:
        """Parse ``12``, ``-3`` or ``a/b`` into a raw value."""
        m = _LITERAL.match(text.strip())
        if not m:
            raise FieldLiteralInvalid(text)
        sign, num, den = m.groups()
        n = int(num)
        if sign == "-":
            n = -n
        if den is None:
            return self.coerce(n)
        d = int(den)
        if d == 0:
            raise FieldLiteralInvalid(text)
        return self.coerce(Fraction(n, d))

    def format(self, a: Raw) -> str:
        return str(a)

    # -- raw arithmetic --------------------------------------------------
    def add(self, a: Raw, b: Raw) -> Raw:
        p = self.modulus
        if p is None:
            return _demote(a + b)
        s = a + b
        return s - p if s >= p else s

    def sub(self, a: Raw, b: Raw) -> Raw:
        p = self.modulus
        if p is None:
            return _demote(a - b)
        s = a - b
        return s + p if s < 0 else s

    def neg(self, a: Raw) -> Raw:
        p = self.modulus
        if p is None:
            return -a
        return p - a if a else 0

    def mul(self, a: Raw, b: Raw) -> Raw:
        p = self.modulus
        if p is None:
            return _demote(a * b)
        return a * b % p

    def inv(self, a: Raw) -> Raw:
        if not a:
            raise DivisionByZero("inverse of zero")
        p = self.modulus
        if p is None:
            return _demote(1 / Fraction(a))
        return pow(a, -1, p)

    def div(self, a: Raw, b: Raw) -> Raw:
        if not b:
            raise DivisionByZero("division by zero")
        p = self.modulus
        if p is None:
            return _demote(Fraction(a) / b)
        return a * pow(b, -1, p) % p

    def pow(self, a: Raw, e: int) -> Raw:
        if e < 0:
            return self.pow(self.inv(a), -e)
        p = self.modulus
        if p is None:
            return _demote(a**e)
        return pow(a, e, p)

    def sum(self, values) -> Raw:
        total = sum(values, 0)
        return _demote(total) if self.modulus is None else total % self.modulus

    def is_zero(self, a: Raw) -> bool:
        return not a

    def signed(self, a: Raw) -> Raw:
        """Symmetric representative: residues above p/2 become negative ints."""
        p = self.modulus
        if p is None:
            return a
        return a - p if a > p // 2 else a


def _demote(x: Raw) -> Raw:
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


QQ = Field(None)


def prime_field(p: int) -> Field:
    return Field(p)


def field_from_spec(text: str) -> Field:
    """Accept ``Q``, ``Fp 7`` and ``Fp:7``."""
    t = text.strip()
    if t == "Q":
        return QQ
    m = re.match(r"^Fp[\s:]+(\d+)$", t)
    if not m:
        raise FieldLiteralInvalid(f"unknown field spec {text!r}")
    return Field(int(m.group(1)))


@dataclass(frozen=True)
class FieldElement:
    field: Field
    value: Raw

    def _other(self, other) -> Raw:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field} vs {other.field}")
            return other.value
        return self.field.coerce(other)

    def __add__(self, other):
        return FieldElement(self.field, self.field.add(self.value, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.field, self.field.sub(self.value, self._other(other)))

    def __rsub__(self, other):
        return FieldElement(self.field, self.field.sub(self._other(other), self.value))

    def __mul__(self, other):
        return FieldElement(self.field, self.field.mul(self.value, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElement(self.field, self.field.div(self.value, self._other(other)))

    def __rtruediv__(self, other):
        return FieldElement(self.field, self.field.div(self._other(other), self.value))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field.pow(self.value, e))

    def inv(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.value))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field} vs {other.field}")
            return self.value == other.value
        if isinstance(other, (int, Fraction)):
            try:
                return self.value == self.field.coerce(other)
            except RationalOverPrimeField:
                return False
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.value))

    def __bool__(self):
        return bool(self.value)

    def __repr__(self):
        return f"{self.value}"
