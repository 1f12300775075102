"""Exception hierarchy shared by every module.

Domain errors derive from :class:`AlgCircError`; the CLI maps them to exit
code 2.
"""

from __future__ import annotations


class AlgCircError(Exception):
    """Base class for all domain errors raised by the toolkit."""


# field arithmetic
class NotPrime(AlgCircError):
    pass


class RationalOverPrimeField(AlgCircError):
    pass


class DivisionByZero(AlgCircError, ZeroDivisionError):
    pass


class FieldMismatch(AlgCircError):
    pass


class CharacteristicTwo(AlgCircError):
    pass


class CharacteristicTooSmall(AlgCircError):
    pass


class FieldTooSmall(AlgCircError):
    pass


# circuit files
class CircuitSyntaxError(AlgCircError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownGateRef(AlgCircError):
    pass


class CycleDetected(AlgCircError):
    pass


class DuplicateGateId(AlgCircError):
    pass


class FieldLiteralInvalid(AlgCircError):
    pass


class UnknownVariable(AlgCircError):
    pass


# polynomials
class BudgetExceeded(AlgCircError):
    pass


class NotMultilinear(AlgCircError):
    pass


class BlocksNotPartition(AlgCircError):
    pass


class NonIntegerCoefficients(AlgCircError):
    pass


class MissingAssignment(AlgCircError):
    pass


# structure requirements
class NotAFormula(AlgCircError):
    pass


class NotWeaklySkew(AlgCircError):
    pass


class NotConstantFree(AlgCircError):
    pass


class NotMultDisjoint(AlgCircError):
    pass


class DegreeBoundTooSmall(AlgCircError):
    pass


# permanent embedding
class SharedEndpoints(AlgCircError):
    pass


class DuplicateEdge(AlgCircError):
    pass


class SizeBoundViolated(AlgCircError):
    pass


class UnusedYVariable(AlgCircError):
    pass


# families, testing, cli
class ParamOutOfRange(AlgCircError):
    pass


class TooManyVariables(AlgCircError):
    pass


class UnknownArtifactKind(AlgCircError):
    pass
